use std::collections::VecDeque;

use serde::Serialize;
use serde_json::{json, Value};

use super::period::{lifted_period_detail, LiftBox, LiftedPeriod};
use super::{quotient_labels, quotient_period};
use crate::error::{Error, Result};
use crate::hnf;
use crate::lattice::{LatticeVector, QuotientEdge, QuotientGraph};

/// Quotient by a sublattice `Γ₁ ⊂ Γ` on which the walk has the period of
/// the lifted walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedQuotient {
    pub period_k: usize,
    pub quotient_period_k0: usize,
    /// Rows are the basis vectors of `Γ₁` in `Γ`-coordinates.
    pub sublattice_basis: Vec<Vec<i64>>,
    pub index: usize,
    pub coset_reps: Vec<LatticeVector>,
    #[serde(skip)]
    pub refined_graph: QuotientGraph,
    pub partition_label: Vec<usize>,
    /// Original vertex under each refined vertex.
    pub original_vertex: Vec<usize>,
    /// Coset representative index of each refined vertex.
    pub coset: Vec<usize>,
    pub search: LiftedPeriod,
}

fn coset_name(v: &str, c: &[i64]) -> String {
    let parts: Vec<String> = c.iter().map(i64::to_string).collect();
    format!("{v}@[{}]", parts.join(","))
}

impl RefinedQuotient {
    pub fn is_identity(&self) -> bool {
        self.index == 1
    }

    pub fn dim(&self) -> usize {
        self.sublattice_basis.len()
    }

    /// Refined vertex and `Γ₁`-cell of the original state `(v, τ)`.
    pub fn locate(&self, v: usize, tau: &[i64]) -> (usize, LatticeVector) {
        if self.is_identity() {
            return (v, tau.to_vec());
        }
        let (k, c) = hnf::reduce(&self.sublattice_basis, tau);
        let ci = self
            .coset_reps
            .iter()
            .position(|r| *r == c)
            .expect("reduced vector is a coset representative");
        let w = (0..self.original_vertex.len())
            .find(|&w| self.original_vertex[w] == v && self.coset[w] == ci)
            .expect("every (vertex, coset) pair is a refined vertex");
        (w, k)
    }

    /// Original state `(v, τ)` of the refined state `(w, k)`.
    pub fn lift(&self, w: usize, k: &[i64]) -> (usize, LatticeVector) {
        let d = self.dim();
        let c = &self.coset_reps[self.coset[w]];
        let tau = (0..d)
            .map(|j| {
                c[j] + (0..d)
                    .map(|i| k[i] * self.sublattice_basis[i][j])
                    .sum::<i64>()
            })
            .collect();
        (self.original_vertex[w], tau)
    }

    /// `Γ`-coordinates of a vector given in the `Γ₁` basis.
    pub fn to_gamma(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| x[i] * self.sublattice_basis[i][j] as f64)
                    .sum()
            })
            .collect()
    }

    /// Sidecar document `{K, K0, hnf, index, labels}` keyed by refined vertex id.
    pub fn sidecar(&self) -> Value {
        let labels: serde_json::Map<String, Value> = self
            .refined_graph
            .vertices()
            .iter()
            .zip(&self.partition_label)
            .map(|(v, l)| (v.clone(), json!(l)))
            .collect();
        json!({
            "K": self.period_k,
            "K0": self.quotient_period_k0,
            "hnf": self.sublattice_basis,
            "index": self.index,
            "labels": labels,
        })
    }
}

fn check_labels(g: &QuotientGraph, labels: &[usize], k: usize) -> Result<()> {
    for e in g.edges().iter().filter(|e| e.probability > 0.0) {
        if (labels[e.origin] + 1) % k != labels[e.terminus] {
            return Err(Error::LabelConflict {
                state: g.vertices()[e.terminus].clone(),
                period: k,
            });
        }
    }
    Ok(())
}

/// Refine the quotient so that its period equals the lifted period.
pub fn refine_quotient(g: &QuotientGraph, search_depth: usize) -> Result<RefinedQuotient> {
    let search = lifted_period_detail(g, search_depth)?;
    let (k, k0) = (search.period, search.quotient_period);
    let d = g.dim();
    if k == k0 {
        let labels = quotient_labels(g, k);
        check_labels(g, &labels, k)?;
        let basis = (0..d)
            .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
            .collect();
        return Ok(RefinedQuotient {
            period_k: k,
            quotient_period_k0: k0,
            sublattice_basis: basis,
            index: 1,
            coset_reps: vec![vec![0; d]],
            refined_graph: g.clone(),
            partition_label: labels,
            original_vertex: (0..g.n_vertices()).collect(),
            coset: vec![0; g.n_vertices()],
            search,
        });
    }

    // Label lifted states by walk length mod K.
    let lift = LiftBox::new(g, search.radius)?;
    let origin = lift.encode(0, &vec![0; d]).unwrap();
    let mut label = vec![usize::MAX; lift.states];
    label[origin] = 0;
    let mut queue = VecDeque::from([origin]);
    while let Some(s) = queue.pop_front() {
        let next_label = (label[s] + 1) % k;
        for t in lift.successors(g, s) {
            if label[t] == usize::MAX {
                label[t] = next_label;
                queue.push_back(t);
            } else if label[t] != next_label {
                let (v, tau) = lift.decode(t);
                return Err(Error::LabelConflict {
                    state: coset_name(&g.vertices()[v], &tau),
                    period: k,
                });
            }
        }
    }

    let mut basis: Vec<Vec<i64>> = Vec::new();
    for (s, &l) in label.iter().enumerate() {
        if l != 0 {
            continue;
        }
        let (v, tau) = lift.decode(s);
        if v == 0 && tau.iter().any(|&t| t != 0) {
            basis.push(tau);
            basis = hnf::hermite_normal_form(&basis, d);
        }
    }
    if basis.len() < d {
        return Err(Error::RankDeficient {
            rank: basis.len(),
            dim: d,
            radius: search.radius,
        });
    }

    let reps = hnf::coset_representatives(&basis);
    let mut names = Vec::new();
    for v in g.vertices() {
        for c in &reps {
            names.push(coset_name(v, c));
        }
    }
    let mut sorted = names.clone();
    sorted.sort();
    let slot = |v: usize, ci: usize| -> usize {
        sorted
            .binary_search(&names[v * reps.len() + ci])
            .expect("refined vertex name")
    };
    let rep_index = |c: &[i64]| {
        reps.iter()
            .position(|r| r == c)
            .expect("coset representative")
    };

    let mut original_vertex = vec![0; sorted.len()];
    let mut coset = vec![0; sorted.len()];
    for v in 0..g.n_vertices() {
        for ci in 0..reps.len() {
            original_vertex[slot(v, ci)] = v;
            coset[slot(v, ci)] = ci;
        }
    }

    // Edge (e, c) starts at (o(e), c); the inverse of (e, c) is (ē, c′),
    // where c′ is the representative reached by e.
    let n_edges = g.edges().len();
    let edge_slot = |ei: usize, ci: usize| ci * n_edges + ei;
    let mut targets = vec![(0usize, Vec::new()); n_edges * reps.len()];
    for (ci, c) in reps.iter().enumerate() {
        for (ei, e) in g.edges().iter().enumerate() {
            let moved: Vec<i64> = c.iter().zip(&e.translation).map(|(a, b)| a + b).collect();
            let (kk, c2) = hnf::reduce(&basis, &moved);
            targets[edge_slot(ei, ci)] = (rep_index(&c2), kk);
        }
    }
    let mut edges = Vec::with_capacity(targets.len());
    for (ci, c) in reps.iter().enumerate() {
        for (ei, e) in g.edges().iter().enumerate() {
            let (c2, kk) = &targets[edge_slot(ei, ci)];
            edges.push(QuotientEdge {
                id: coset_name(&e.id, c),
                origin: slot(e.origin, ci),
                terminus: slot(e.terminus, *c2),
                translation: kk.clone(),
                probability: e.probability,
                inverse: edge_slot(e.inverse, *c2),
            });
        }
    }
    let refined = QuotientGraph::from_edges(d, sorted, edges);

    let refined_k = quotient_period(&refined);
    if refined_k != k {
        return Err(Error::LabelConflict {
            state: format!("refined quotient has period {refined_k}"),
            period: k,
        });
    }
    let labels = quotient_labels(&refined, k);
    check_labels(&refined, &labels, k)?;

    Ok(RefinedQuotient {
        period_k: k,
        quotient_period_k0: k0,
        index: hnf::index(&basis) as usize,
        sublattice_basis: basis,
        coset_reps: reps,
        refined_graph: refined,
        partition_label: labels,
        original_vertex,
        coset,
        search,
    })
}
