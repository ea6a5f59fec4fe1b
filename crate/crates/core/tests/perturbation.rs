mod common;

use std::f64::consts::PI;

use common::random_graph;
use crystalwalk::perturbation::{
    a1_analytic, a1_terms, eigen_derivatives, eigen_derivatives_with, fd_crosscheck, q_tensors,
    PerturbationData, Tensor,
};
use crystalwalk::{analyze, Builtin, LatticeAnalysis, QuotientGraph};
use nalgebra::Complex;
use proptest::prelude::*;

type C64 = Complex<f64>;

/// `ω(e) = ⟨u, τ(e)⟩` with `τ` the translation of the original edge, on the
/// refined graph; the Perron branch is then that of the unrefined bouquet.
fn original_translations(a: &LatticeAnalysis) -> Vec<Vec<f64>> {
    a.graph
        .edges()
        .iter()
        .map(|e| {
            let id = e.id.split('@').next().unwrap();
            let i = a.original.edge_index(id).unwrap();
            a.original.edges()[i]
                .translation
                .iter()
                .map(|&t| t as f64)
                .collect()
        })
        .collect()
}

/// `−(2π√−1)ᵏ κ_k(⟨u, W⟩)` for a bouquet with step law `P(W = w(e)) = p(e)`.
fn cumulant_oracle(g: &QuotientGraph, forms: &[Vec<f64>], u: &[f64], k: usize) -> C64 {
    let xs: Vec<(f64, f64)> = g
        .edges()
        .iter()
        .zip(forms)
        .map(|(e, w)| (e.probability, w.iter().zip(u).map(|(a, b)| a * b).sum()))
        .collect();
    let mean: f64 = xs.iter().map(|(p, x)| p * x).sum();
    let central = |r: i32| -> f64 { xs.iter().map(|(p, x)| p * (x - mean).powi(r)).sum() };
    let kappa = match k {
        1 => mean,
        2 => central(2),
        3 => central(3),
        4 => central(4) - 3.0 * central(2).powi(2),
        _ => unreachable!(),
    };
    -C64::new(0.0, 2.0 * PI).powi(k as i32) * kappa
}

fn lambdas(p: &PerturbationData, u: &[f64]) -> [C64; 4] {
    [p.lambda1(u), p.lambda2(u), p.lambda3(u), p.lambda4(u)]
}

fn bouquet() -> impl Strategy<Value = QuotientGraph> {
    prop::collection::vec(0.05f64..1.0, 6).prop_map(|w| {
        let s: f64 = w.iter().sum();
        common::build(
            Builtin::Triangular,
            &format!(
                "alpha={},alpha_p={},beta={},beta_p={},gamma={},gamma_p={}",
                w[0] / s,
                w[1] / s,
                w[2] / s,
                w[3] / s,
                w[4] / s,
                1.0 - (w[0] + w[1] + w[2] + w[3] + w[4]) / s
            ),
        )
    })
}

#[test]
fn square_bouquet_fixture() {
    let a = analyze(&Builtin::Square.simple()).unwrap();
    let p = eigen_derivatives_with(&a, &original_translations(&a)).unwrap();
    let pi4 = PI.powi(4);
    let q4 = Tensor::from_polynomial(2, 4, |u| {
        4.0 * pi4 * (u[0].powi(4) + u[1].powi(4)) + 24.0 * pi4 * u[0] * u[0] * u[1] * u[1]
    });
    assert!(p.lam4.max_abs_diff(&q4) < 1e-9);
    assert!((p.lam4.get(&[0, 0, 0, 0]) - 4.0 * pi4).abs() < 1e-9);
    assert!((p.lam4.get(&[0, 0, 1, 1]) - 4.0 * pi4).abs() < 1e-9);

    let x = a.base_state();
    let q = q_tensors(&a, &p, x.vertex, x.vertex);
    assert!(q.q1.iter().all(|v| v.abs() < 1e-12));
    assert!(q.q3.data.iter().all(|v| v.abs() < 1e-12));
    let t = a1_terms(&q, a.m(x.vertex), &[0.0, 0.0]);
    assert!(
        (t.quartic_trace + 0.125).abs() < 1e-12,
        "{}",
        t.quartic_trace
    );
}

#[test]
fn square_a1() {
    let a = analyze(&Builtin::Square.simple()).unwrap();
    let p = eigen_derivatives(&a).unwrap();
    let x = a.base_state();
    let r = a1_analytic(&a, &p, &x, &x, 64);
    assert!((r.value + 0.5).abs() < 1e-12, "{}", r.value);
    assert!((r.value - r.printed).abs() < 1e-12);
    assert!(r.z.iter().all(|z| z.abs() < 1e-15));
}

#[test]
fn tensor_basics() {
    let mut t = Tensor::zeros(2, 3);
    t.set(&[0, 1, 1], 2.0);
    assert_eq!(t.get(&[1, 0, 1]), 0.0);
    assert!(t.symmetry_defect() > 0.0);
    let s = Tensor::from_polynomial(2, 3, |u| 6.0 * u[0] * u[1] * u[1]);
    assert!((s.get(&[1, 0, 1]) - 2.0).abs() < 1e-12);
    assert!((s.scaled(0.5).eval(&[1.0, 2.0]) - 12.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bouquet_derivatives_are_cumulants(g in bouquet(), angle in 0.0f64..(2.0 * PI)) {
        let a = analyze(&g).unwrap();
        prop_assert_eq!(a.graph.n_vertices(), 1);
        let forms = a.embedded_displacements();
        let p = eigen_derivatives(&a).unwrap();
        let u = [angle.cos(), angle.sin()];
        for (k, got) in lambdas(&p, &u).iter().enumerate() {
            let want = cumulant_oracle(&a.graph, &forms, &u, k + 1);
            prop_assert!((got - want).norm() < 1e-9 * (1.0 + want.norm()), "order {}: {} vs {}", k + 1, got, want);
        }
    }

    #[test]
    fn structural_identities(g in random_graph()) {
        let a = analyze(&g).unwrap();
        let p = eigen_derivatives(&a).unwrap();
        let four_pi2 = 4.0 * PI * PI;
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { four_pi2 } else { 0.0 };
                prop_assert!((p.lam2.get(&[i, j]) - want).abs() < 1e-9);
            }
        }
        prop_assert!(p.lam3.max_abs_diff(&p.lam3_psi) < 1e-8 * (1.0 + p.lam3.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        prop_assert!(p.side_condition_defect(&a.measure.values) < 1e-10);
        prop_assert!(p.lam3.symmetry_defect() < 1e-9 && p.lam4.symmetry_defect() < 1e-7);
        let rho = a.embedded_rho();
        for k in 0..2 {
            prop_assert!((p.gamma[k] - rho[k]).abs() < 1e-12);
        }
        for x in 0..a.graph.n_vertices() {
            let q = q_tensors(&a, &p, x, x);
            prop_assert!(q.q2.symmetry_defect() < 1e-9);
        }
    }

    #[test]
    fn finite_differences_agree(g in random_graph(), angle in 0.0f64..(2.0 * PI)) {
        let a = analyze(&g).unwrap();
        let p = eigen_derivatives(&a).unwrap();
        let report = fd_crosscheck(&a, &p, &[angle.cos(), angle.sin()], 1e-2).unwrap();
        for o in &report.orders {
            let scale = 1.0 + (o.analytic[0].powi(2) + o.analytic[1].powi(2)).sqrt();
            prop_assert!(o.error_richardson / scale < 1e-2, "order {}: {:?}", o.order, o);
        }
    }
}
