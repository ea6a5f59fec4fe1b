//! Invariant measure, transition operators, periods and quotient refinement.

mod period;
mod refine;
mod twisted;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use period::{
    check_irreducibility, default_search_depth, lifted_period, lifted_period_detail,
    IrreducibilityReport, LiftedPeriod,
};
pub use refine::{refine_quotient, RefinedQuotient};
pub use twisted::{perron_eigendata, twisted_operator, PerronData};

use crate::error::{Error, Result};
use crate::lattice::QuotientGraph;

/// Normalized positive fixed point of the transposed transition operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantMeasure {
    pub values: Vec<f64>,
    pub residual: f64,
}

impl InvariantMeasure {
    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }
}

/// Dense transition matrix `L[x][y] = Σ_{e: x→y} p(e)`.
pub fn transition_matrix(g: &QuotientGraph) -> DMatrix<f64> {
    let n = g.n_vertices();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.origin, e.terminus)] += e.probability;
    }
    l
}

/// `Lf(x) = Σ_{e∈E_x} p(e) f(t(e))`, or `ᵗLf(x) = Σ_{e∈E_x} p(ē) f(t(e))`.
pub fn apply_transition(g: &QuotientGraph, f: &[f64], transpose: bool) -> Vec<f64> {
    assert_eq!(
        f.len(),
        g.n_vertices(),
        "function must be defined on every vertex"
    );
    let edges = g.edges();
    (0..g.n_vertices())
        .map(|x| {
            g.out_edges(x)
                .iter()
                .map(|&i| {
                    let e = &edges[i];
                    let p = if transpose {
                        edges[e.inverse].probability
                    } else {
                        e.probability
                    };
                    p * f[e.terminus]
                })
                .sum()
        })
        .collect()
}

/// Unique solution of `ᵗL m = m`, `Σm = 1`.
pub fn invariant_measure(g: &QuotientGraph) -> Result<InvariantMeasure> {
    let n = g.n_vertices();
    let l = transition_matrix(g);
    let mut a = l.transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let m = a.lu().solve(&b).ok_or_else(|| {
        Error::Singular("invariant measure system (walk not irreducible?)".into())
    })?;
    if let Some(x) = m.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Singular(format!(
            "invariant measure is not positive at {} (walk not irreducible?)",
            g.vertices()[x]
        )));
    }
    let values: Vec<f64> = m.iter().copied().collect();
    let lm = apply_transition(g, &values, true);
    let residual = lm
        .iter()
        .zip(&values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(InvariantMeasure { values, residual })
}

/// `(1/N) Σ_{j<N} (Lʲf)(x)`.
pub fn ergodic_average(g: &QuotientGraph, f: &[f64], x: usize, n: usize) -> f64 {
    assert!(n >= 1);
    let mut cur = f.to_vec();
    let mut total = 0.0;
    for j in 0..n {
        total += cur[x];
        if j + 1 < n {
            cur = apply_transition(g, &cur, false);
        }
    }
    total / n as f64
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Breadth-first distances from vertex 0 along positive-probability edges.
fn bfs_levels(g: &QuotientGraph) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n_vertices()];
    dist[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for &i in g.out_edges(v) {
            let e = &g.edges()[i];
            if e.probability > 0.0 && dist[e.terminus].is_none() {
                dist[e.terminus] = Some(dv + 1);
                queue.push_back(e.terminus);
            }
        }
    }
    dist
}

/// Period of the quotient walk: gcd of the lengths of its closed walks.
pub fn quotient_period(g: &QuotientGraph) -> usize {
    let dist = bfs_levels(g);
    let mut k = 0;
    for e in g.edges().iter().filter(|e| e.probability > 0.0) {
        if let (Some(a), Some(b)) = (dist[e.origin], dist[e.terminus]) {
            k = gcd(k, (a + 1).abs_diff(b));
        }
    }
    k
}

/// Labels `dist mod K` on a quotient whose period is `K`.
pub(crate) fn quotient_labels(g: &QuotientGraph, k: usize) -> Vec<usize> {
    bfs_levels(g)
        .into_iter()
        .map(|d| d.map_or(0, |d| d % k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Builtin;

    #[test]
    fn bouquet_measure_is_one() {
        let m = invariant_measure(&Builtin::Square.simple()).unwrap();
        assert_eq!(m.values, vec![1.0]);
        assert!(m.residual < 1e-15);
    }

    #[test]
    fn hexagonal_transition() {
        let g = Builtin::Hexagonal.simple();
        let lf = apply_transition(&g, &[1.0, 0.0], false);
        assert_eq!(lf, vec![0.0, 1.0]);
        assert_eq!(quotient_period(&g), 2);
    }

    #[test]
    fn ergodic_average_alternates() {
        let g = Builtin::Hexagonal.simple();
        for n in 1..40 {
            let avg = ergodic_average(&g, &[1.0, 0.0], 0, n);
            assert!((avg - 0.5).abs() <= 0.5 / n as f64 + 1e-15);
        }
    }
}
