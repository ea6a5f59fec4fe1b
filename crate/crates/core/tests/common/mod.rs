#![allow(dead_code)]

use crystalwalk::albanese::{LatticeAnalysis, LatticeState};
use crystalwalk::lattice::{parse_params, Builtin};
use crystalwalk::QuotientGraph;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn build(lattice: Builtin, params: &str) -> QuotientGraph {
    lattice.build(&parse_params(params).unwrap()).unwrap()
}

/// Hexagonal walk with α̌ = 0.2, β̌ = −0.2, γ̌ = 0, drift (0.1, 0).
pub fn hex_drift() -> QuotientGraph {
    build(
        Builtin::Hexagonal,
        "alpha=0.4,beta=0.3,gamma=0.3,alpha_p=0.2,beta_p=0.5,gamma_p=0.3",
    )
}

pub fn square(alpha: f64, alpha_p: f64, beta: f64, beta_p: f64) -> QuotientGraph {
    build(
        Builtin::Square,
        &format!("alpha={alpha},alpha_p={alpha_p},beta={beta},beta_p={beta_p}"),
    )
}

/// Triangular walk with `x = (x̂+κ)/2`, `x′ = (x̂−κ)/2`.
pub fn triangular(ah: f64, bh: f64, gh: f64, kappa: f64) -> QuotientGraph {
    build(
        Builtin::Triangular,
        &format!(
            "alpha={},alpha_p={},beta={},beta_p={},gamma={},gamma_p={}",
            (ah + kappa) / 2.0,
            (ah - kappa) / 2.0,
            (bh + kappa) / 2.0,
            (bh - kappa) / 2.0,
            (gh + kappa) / 2.0,
            (gh - kappa) / 2.0
        ),
    )
}

/// Closed-form `a₁` of the triangular walk, `z` in lattice coordinates.
pub fn triangular_closed_form(ah: f64, bh: f64, gh: f64, kappa: f64, z: &[f64]) -> f64 {
    let vol = 1.0 / (ah * bh + bh * gh + gh * ah).sqrt();
    let v4 = vol.powi(4);
    -1.0 + v4 / 8.0 * (ah * (bh + gh).powi(2) + bh * (gh + ah).powi(2) + gh * (ah + bh).powi(2))
        + v4 * ((ah * bh - 2.0 * bh * gh + gh * ah) * z[0]
            + (-ah * bh - bh * gh + 2.0 * gh * ah) * z[1])
            * kappa
        + 0.375 * v4 * (-1.0 + 5.0 * ah * bh * gh * vol * vol) * kappa * kappa
}

/// Target state `x + round(nρ) + shift`, which keeps `z` fixed along `n`
/// whenever `nρ` is integral.
pub fn along_drift(
    a: &LatticeAnalysis,
    x: &LatticeState,
    vertex: usize,
    shift: &[i64],
) -> impl Fn(usize) -> LatticeState {
    let rho = a.rho().to_vec();
    let base = x.cell.clone();
    let shift = shift.to_vec();
    move |n| {
        let cell = (0..rho.len())
            .map(|k| base[k] + (n as f64 * rho[k]).round() as i64 + shift[k])
            .collect();
        LatticeState::new(vertex, cell)
    }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn all_builtins() -> Vec<(&'static str, QuotientGraph)> {
    vec![
        ("square", Builtin::Square.simple()),
        ("triangular", Builtin::Triangular.simple()),
        ("hexagonal", Builtin::Hexagonal.simple()),
        ("square drift", square(0.4, 0.1, 0.3, 0.2)),
        ("triangular κ", triangular(0.4, 0.3, 0.3, 0.1)),
        ("hexagonal drift", hex_drift()),
    ]
}

use crystalwalk::lattice::EdgeSpec;
use proptest::prelude::*;

type Extra = (usize, usize, i64, i64, f64, f64);

/// Connected, irreducible quotient graphs on 1–3 vertices whose translations
/// span ℤ²: a path through the vertices, two unit loops at the first vertex
/// and up to three random extra edge pairs, all with random positive weights
/// normalized per vertex.
pub fn random_graph() -> impl Strategy<Value = QuotientGraph> {
    (1usize..=3)
        .prop_flat_map(|nv| {
            let base = prop::collection::vec(0.05f64..1.0, 2 * nv + 2);
            let extra = prop::collection::vec(
                (
                    0..nv,
                    0..nv,
                    -1i64..=1,
                    -1i64..=1,
                    0.05f64..1.0,
                    0.05f64..1.0,
                ),
                0..4,
            );
            (Just(nv), base, extra)
        })
        .prop_map(|(nv, base, extra)| assemble(nv, &base, &extra))
}

fn assemble(nv: usize, base: &[f64], extra: &[Extra]) -> QuotientGraph {
    let mut pairs: Vec<Extra> = Vec::new();
    for i in 0..nv.saturating_sub(1) {
        pairs.push((i, i + 1, 0, 0, base[2 * i], base[2 * i + 1]));
    }
    let k = 2 * nv - 2;
    pairs.push((0, 0, 1, 0, base[k], base[k + 1]));
    pairs.push((0, 0, 0, 1, base[k + 2], base[k + 3]));
    pairs.extend_from_slice(extra);

    let mut row = vec![0.0; nv];
    for &(a, b, _, _, w, wb) in &pairs {
        row[a] += w;
        row[b] += wb;
    }
    let name = |v: usize| format!("v{v}");
    let mut specs = Vec::new();
    for (i, &(a, b, tx, ty, w, wb)) in pairs.iter().enumerate() {
        specs.push(EdgeSpec {
            id: format!("e{i}"),
            from: name(a),
            to: name(b),
            translation: vec![tx, ty],
            p: w / row[a],
            inverse: format!("e{i}bar"),
        });
        specs.push(EdgeSpec {
            id: format!("e{i}bar"),
            from: name(b),
            to: name(a),
            translation: vec![-tx, -ty],
            p: wb / row[b],
            inverse: format!("e{i}"),
        });
    }
    QuotientGraph::new(2, (0..nv).map(name).collect(), specs).unwrap()
}
