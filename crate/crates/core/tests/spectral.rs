mod common;

use std::f64::consts::PI;

use common::{build, random_graph};
use crystalwalk::lattice::validate;
use crystalwalk::spectral::{
    apply_transition, check_irreducibility, default_search_depth, ergodic_average,
    invariant_measure, lifted_period, perron_eigendata, quotient_period, refine_quotient,
    twisted_operator,
};
use crystalwalk::{Builtin, QuotientGraph};
use proptest::prelude::*;

fn translations(g: &QuotientGraph) -> Vec<Vec<f64>> {
    g.edges()
        .iter()
        .map(|e| e.translation.iter().map(|&t| t as f64).collect())
        .collect()
}

#[test]
fn hexagonal_measure_and_operator() {
    for g in [Builtin::Hexagonal.simple(), common::hex_drift()] {
        let m = invariant_measure(&g).unwrap();
        assert!((m.get(0) - 0.5).abs() < 1e-15 && (m.get(1) - 0.5).abs() < 1e-15);
        assert!(m.residual < 1e-15);
    }
    let g = Builtin::Hexagonal.simple();
    let lf = apply_transition(&g, &[1.0, 0.0], false);
    assert!(lf[0].abs() < 1e-15 && (lf[1] - 1.0).abs() < 1e-15);
    let lf = apply_transition(&g, &[2.0, 5.0], true);
    assert!((lf[0] - 5.0).abs() < 1e-14 && (lf[1] - 2.0).abs() < 1e-14);
}

#[test]
fn hexagonal_ergodic_average() {
    let g = Builtin::Hexagonal.simple();
    for n in 1..=40 {
        let avg = ergodic_average(&g, &[1.0, 0.0], 0, n);
        assert!(
            (avg - 0.5).abs() <= 0.5 / n as f64 + 1e-15,
            "N = {n}: {avg}"
        );
    }
}

#[test]
fn periods() {
    assert_eq!(quotient_period(&Builtin::Square.simple()), 1);
    assert_eq!(quotient_period(&Builtin::Hexagonal.simple()), 2);
    let depth = |g: &QuotientGraph| default_search_depth(g);
    let sq = Builtin::Square.simple();
    assert_eq!(lifted_period(&sq, depth(&sq)).unwrap(), 2);
    let tri = Builtin::Triangular.simple();
    assert_eq!(lifted_period(&tri, depth(&tri)).unwrap(), 1);
}

#[test]
fn triangular_without_reverse_steps() {
    let g = build(
        Builtin::Triangular,
        "alpha=1/3,alpha_p=0,beta=1/3,beta_p=0,gamma=1/3,gamma_p=0",
    );
    let r = refine_quotient(&g, default_search_depth(&g)).unwrap();
    assert_eq!((r.period_k, r.quotient_period_k0, r.index), (3, 1, 3));
    assert_eq!(r.sublattice_basis, vec![vec![1, 1], vec![0, 3]]);
    assert_eq!(r.refined_graph.n_vertices(), 3);
    assert_eq!(quotient_period(&r.refined_graph), 3);
    let side = r.sidecar();
    assert_eq!(side["K"], 3);
    assert_eq!(side["index"], 3);
}

#[test]
fn refined_square_names() {
    let g = Builtin::Square.simple();
    let r = refine_quotient(&g, default_search_depth(&g)).unwrap();
    assert_eq!(r.refined_graph.vertices(), ["x0@[0,0]", "x0@[0,1]"]);
    assert!(validate(&r.refined_graph).is_empty());
}

#[test]
fn irreducibility_checks() {
    let r = check_irreducibility(&Builtin::Square.simple(), 4).unwrap();
    assert!(r.quotient_irreducible && r.lifted_reachable && r.heuristic);

    // Only horizontal steps: the lift never leaves its row.
    let line = common::square(0.5, 0.5, 0.0, 0.0);
    let r = check_irreducibility(&line, 4).unwrap();
    assert!(r.quotient_irreducible);
    assert!(!r.lifted_reachable && r.inner_unreached > 0);

    let r = check_irreducibility(&common::square(0.5, 0.0, 0.5, 0.0), 4).unwrap();
    assert!(!r.lifted_reachable);

    // Steps (1,0), (0,−1), (−1,1) close up, so one-way steps reach every cell.
    let r = check_irreducibility(
        &build(
            Builtin::Triangular,
            "alpha=1/3,alpha_p=0,beta=1/3,beta_p=0,gamma=1/3,gamma_p=0",
        ),
        4,
    )
    .unwrap();
    assert!(r.lifted_reachable);
}

#[test]
fn bouquet_twisted_operator() {
    let g = Builtin::Square.simple();
    let w = translations(&g);
    for omega in [[0.0, 0.0], [0.25, 0.0], [0.1, 0.3], [-0.2, 0.45]] {
        let h = twisted_operator(&g, &w, &omega);
        let expect = ((2.0 * PI * omega[0]).cos() + (2.0 * PI * omega[1]).cos()) / 2.0;
        assert!((h[(0, 0)].re - expect).abs() < 1e-15 && h[(0, 0)].im.abs() < 1e-15);
    }
    let p = perron_eigendata(&g, &w, &[0.25, 0.0]).unwrap();
    assert!((p.mu.re - 0.5).abs() < 1e-15 && p.mu.im.abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn invariant_measure_is_stationary(g in random_graph()) {
        let m = invariant_measure(&g).unwrap();
        prop_assert!((m.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let back = apply_transition(&g, &m.values, true);
        for (a, b) in back.iter().zip(&m.values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_operator_fixes_constants(g in random_graph()) {
        let one = vec![1.0; g.n_vertices()];
        for v in apply_transition(&g, &one, false) {
            prop_assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perron_conjugate_symmetry(g in random_graph(), w1 in -0.2f64..0.2, w2 in -0.2f64..0.2) {
        let d = translations(&g);
        let plus = perron_eigendata(&g, &d, &[w1, w2]).unwrap().mu;
        let minus = perron_eigendata(&g, &d, &[-w1, -w2]).unwrap().mu;
        prop_assert!((plus - minus.conj()).norm() < 1e-10);
        prop_assert!(plus.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn refinement_is_consistent(g in random_graph(), t1 in -5i64..=5, t2 in -5i64..=5) {
        let r = refine_quotient(&g, default_search_depth(&g)).unwrap();
        let h = &r.refined_graph;
        prop_assert!(validate(h).is_empty(), "{}", validate(h));
        prop_assert_eq!(h.n_vertices(), g.n_vertices() * r.index);
        prop_assert_eq!(quotient_period(h), r.period_k);
        let diag: i64 = (0..2).map(|i| r.sublattice_basis[i][i]).product();
        prop_assert_eq!(diag as usize, r.index);
        for e in h.edges().iter().filter(|e| e.probability > 0.0) {
            prop_assert_eq!(
                (r.partition_label[e.origin] + 1) % r.period_k,
                r.partition_label[e.terminus]
            );
        }
        for v in 0..g.n_vertices() {
            let (w, k) = r.locate(v, &[t1, t2]);
            prop_assert_eq!(r.lift(w, &k), (v, vec![t1, t2]));
        }
    }
}
