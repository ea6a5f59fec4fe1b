mod common;

use std::collections::HashMap;

use common::random_graph;
use crystalwalk::albanese::{epsilon_family, LatticeState};
use crystalwalk::heat_kernel::{
    a1_numeric, exact_transition, exact_transition_on, extrapolate_a1, lclt_ratio, lclt_series,
    lclt_sup_error, A1Sample, Extrapolation, Propagator,
};
use crystalwalk::spectral::{invariant_measure, transition_matrix};
use crystalwalk::{analyze, Builtin, Error, QuotientGraph};
use proptest::prelude::*;

/// Distribution after `n` steps by enumerating every edge sequence.
fn enumerate(g: &QuotientGraph, start: usize, n: usize) -> HashMap<(usize, Vec<i64>), f64> {
    let mut out = HashMap::new();
    fn walk(
        g: &QuotientGraph,
        v: usize,
        cell: Vec<i64>,
        p: f64,
        left: usize,
        out: &mut HashMap<(usize, Vec<i64>), f64>,
    ) {
        if left == 0 {
            *out.entry((v, cell)).or_insert(0.0) += p;
            return;
        }
        for &i in g.out_edges(v) {
            let e = &g.edges()[i];
            let next = cell
                .iter()
                .zip(&e.translation)
                .map(|(a, b)| a + b)
                .collect();
            walk(g, e.terminus, next, p * e.probability, left - 1, out);
        }
    }
    walk(g, start, vec![0; g.dim()], 1.0, n, &mut out);
    out
}

/// `C(2n, n)² / 16ⁿ`, the return probability of the simple walk on ℤ².
fn square_return(n: usize) -> f64 {
    let mut c = 1.0;
    for k in 1..=n {
        c *= (n + k) as f64 / (4.0 * k as f64);
    }
    c * c
}

#[test]
fn square_return_probabilities() {
    let g = Builtin::Square.simple();
    for n in [1, 2, 5, 10, 40] {
        let t = exact_transition_on(&g, 0, 2 * n).unwrap();
        let p = t.get(0, &[0, 0]);
        assert!((p / square_return(n) - 1.0).abs() < 1e-12, "n = {n}");
    }
}

#[test]
fn propagator_steps_match_tables() {
    let g = common::hex_drift();
    let mut prop = Propagator::new(&g, 1, 12).unwrap();
    for n in 0..=12 {
        let t = exact_transition_on(&g, 1, n).unwrap();
        for (v, cell, p) in t.entries() {
            assert_eq!(prop.get(v, &cell), p);
        }
        if n < 12 {
            prop.step();
        }
    }
    assert_eq!(prop.n(), 12);
    assert_eq!(prop.start(), 1);
}

#[test]
fn local_clt_ratios() {
    let sq = analyze(&Builtin::Square.simple()).unwrap();
    let x = sq.base_state();
    assert!((lclt_ratio(&sq, 200, &x, &x).unwrap() - 1.0).abs() < 0.01);
    assert!(matches!(
        lclt_ratio(&sq, 201, &x, &x),
        Err(Error::ZeroGaussian { n: 201 })
    ));

    let tri = analyze(&Builtin::Triangular.simple()).unwrap();
    let x = tri.base_state();
    assert!((lclt_ratio(&tri, 100, &x, &x).unwrap() - 1.0).abs() < 0.01);

    let hex = analyze(&Builtin::Hexagonal.simple()).unwrap();
    let table = exact_transition(&hex, hex.base_state().vertex, 200).unwrap();
    assert!(lclt_sup_error(&hex, &table, None) < 0.05);
    let window = [(-3, 3), (-3, 3)];
    assert!(lclt_sup_error(&hex, &table, Some(&window)) <= lclt_sup_error(&hex, &table, None));
}

#[test]
fn series_follows_the_drift() {
    let a = analyze(&common::hex_drift()).unwrap();
    let x = a.base_state();
    let y = common::along_drift(&a, &x, x.vertex, &[0, 0]);
    let pts = lclt_series(&a, &x, &y, &[160, 40, 80]).unwrap();
    assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), [40, 80, 160]);
    let errs: Vec<f64> = pts.iter().map(|p| (p.ratio - 1.0).abs()).collect();
    assert!(errs[2] < errs[0] && errs[2] < 0.02, "{errs:?}");
}

#[test]
fn a1_numeric_inputs() {
    let a = analyze(&Builtin::Square.simple()).unwrap();
    let x = a.base_state();
    assert!(a1_numeric(&a, &x, |_| x.clone(), &[64]).is_err());
    assert!(a1_numeric(&a, &x, |_| x.clone(), &[64, 32]).is_err());
    let r = a1_numeric(&a, &x, |_| x.clone(), &[16, 32, 64]).unwrap();
    assert_eq!(r.method, Extrapolation::Richardson);
    assert!((r.estimate + 0.5).abs() < 0.01, "{}", r.estimate);
}

#[test]
fn extrapolation_branches() {
    let sample = |n: usize, f: f64| A1Sample {
        n,
        u: 1.0 + f / n as f64,
        f,
    };
    let exact = |n: usize| -0.25 + 2.0 / n as f64;
    let r = extrapolate_a1([10, 20, 40].map(|n| sample(n, exact(n))).to_vec());
    assert_eq!(r.method, Extrapolation::Richardson);
    assert!((r.estimate - (2.0 * exact(40) - exact(10))).abs() < 1e-15);
    let r = extrapolate_a1(
        [9, 25, 49]
            .map(|n| sample(n, -0.25 + 1.0 / (n as f64).sqrt()))
            .to_vec(),
    );
    assert_eq!(r.method, Extrapolation::LeastSquares);
    assert!((r.estimate + 0.25).abs() < 1e-12 && (r.slope - 1.0).abs() < 1e-12);
    assert!(r.warning.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matches_path_enumeration(g in random_graph(), start in 0usize..3, n in 0usize..=4) {
        let start = start % g.n_vertices();
        let table = exact_transition_on(&g, start, n).unwrap();
        let oracle = enumerate(&g, start, n);
        for ((v, cell), p) in &oracle {
            prop_assert!((table.get(*v, cell) - p).abs() < 1e-15);
        }
        prop_assert_eq!(table.entries().filter(|(v, c, _)| !oracle.contains_key(&(*v, c.clone()))).count(), 0);
    }

    #[test]
    fn mass_and_quotient_marginal(g in random_graph(), n in 1usize..=20) {
        let table = exact_transition_on(&g, 0, n).unwrap();
        prop_assert!((table.total_mass() - 1.0).abs() < 1e-13);
        let l = transition_matrix(&g).pow(n as u32);
        for (v, mass) in table.vertex_marginal().iter().enumerate() {
            prop_assert!((mass - l[(0, v)]).abs() < 1e-13);
        }
    }

    #[test]
    fn time_reversal_duality(g in random_graph(), n in 1usize..=12) {
        // m(x)p(n,x,y) = m(y)p̄(n,y,x) for the m-reversed walk p̄ = p₀ − q.
        let m = invariant_measure(&g).unwrap();
        let fam = epsilon_family(&g, &m);
        let reversed: Vec<f64> = fam.p0.iter().zip(&fam.q).map(|(a, b)| (a - b).max(0.0)).collect();
        let gr = g.with_probabilities(&reversed);
        for x in 0..g.n_vertices() {
            let fwd = exact_transition_on(&g, x, n).unwrap();
            for y in 0..g.n_vertices() {
                let back = exact_transition_on(&gr, y, n).unwrap();
                for (v, cell, p) in fwd.entries() {
                    if v != y {
                        continue;
                    }
                    let neg: Vec<i64> = cell.iter().map(|c| -c).collect();
                    let q = back.get(x, &neg);
                    prop_assert!((m.get(x) * p - m.get(y) * q).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn base_state_is_admissible(g in random_graph()) {
        let a = analyze(&g).unwrap();
        let x = a.base_state();
        let k = a.period_k;
        prop_assert!(a.admissible(k, &x, &x));
        let y = LatticeState::new(x.vertex, x.cell.clone());
        let table = exact_transition(&a, x.vertex, k).unwrap();
        if k > 1 {
            prop_assert!(!a.admissible(1, &x, &y));
            prop_assert_eq!(exact_transition(&a, x.vertex, 1).unwrap().get(y.vertex, &[0, 0]), 0.0);
        }
        prop_assert!(table.total_mass() > 0.0);
    }
}
