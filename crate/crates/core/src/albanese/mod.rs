//! Asymptotic direction, modified harmonic realization and Albanese metric.
//!
//! All vectors are in `Γ`-coordinates (the basis of the quotient's
//! translation lattice). Euclidean quantities always pass through the
//! embedding matrix `A`, which maps `Γ`-coordinates to coordinates that are
//! orthonormal for the Albanese metric.

mod analysis;
mod export;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub use analysis::{analyze, analyze_with, rows, AnalysisOptions, LatticeAnalysis, LatticeState};
pub use export::{export_realization, RealizationTable};

use crate::error::{Error, Result};
use crate::lattice::QuotientGraph;
use crate::spectral::{invariant_measure, transition_matrix, InvariantMeasure};

/// Edge weights `m̃(e) = p(e)m(o(e))`, the homological direction and its
/// image in `Γ ⊗ ℝ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomologicalData {
    pub edge_weight: Vec<f64>,
    /// One edge per inverse pair (the one listed first).
    pub orientation: Vec<usize>,
    /// Coefficient `m̃(e) − m̃(ē)` on each orientation representative.
    pub cycle_coefficients: Vec<f64>,
    pub asymptotic_direction: Vec<f64>,
    /// `max_x |Σ_in − Σ_out|` of the cycle mass.
    pub boundary_residual: f64,
}

pub fn homological_data(g: &QuotientGraph, m: &InvariantMeasure) -> HomologicalData {
    let edges = g.edges();
    let weight: Vec<f64> = edges
        .iter()
        .map(|e| e.probability * m.get(e.origin))
        .collect();
    let orientation: Vec<usize> = (0..edges.len())
        .filter(|&i| i <= edges[i].inverse)
        .collect();
    let cycle = orientation
        .iter()
        .map(|&i| weight[i] - weight[edges[i].inverse])
        .collect();

    let mut rho = vec![0.0; g.dim()];
    for (e, w) in edges.iter().zip(&weight) {
        for (r, &t) in rho.iter_mut().zip(&e.translation) {
            *r += w * t as f64;
        }
    }

    let mut flow = vec![0.0; g.n_vertices()];
    for (e, w) in edges.iter().zip(&weight) {
        flow[e.terminus] += w;
        flow[e.origin] -= w;
    }
    HomologicalData {
        edge_weight: weight,
        orientation,
        cycle_coefficients: cycle,
        asymptotic_direction: rho,
        boundary_residual: flow.iter().fold(0.0, |a, b| a.max(b.abs())),
    }
}

/// Periodic realization `Φ` with `Σ_{e∈E_x} p(e)dΦ(e) = ρ` at every vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicRealization {
    pub positions: Vec<Vec<f64>>,
    pub base_vertex: usize,
    pub residual: f64,
}

impl HarmonicRealization {
    /// `dΦ(e) = Φ(t(e)) + τ(e) − Φ(o(e))` for every edge.
    pub fn displacements(&self, g: &QuotientGraph) -> Vec<Vec<f64>> {
        g.edges()
            .iter()
            .map(|e| {
                (0..g.dim())
                    .map(|k| {
                        self.positions[e.terminus][k] + e.translation[k] as f64
                            - self.positions[e.origin][k]
                    })
                    .collect()
            })
            .collect()
    }
}

/// Mean one-step displacement minus `ρ`, per vertex and coordinate.
pub fn harmonicity_defect(g: &QuotientGraph, positions: &[Vec<f64>], rho: &[f64]) -> f64 {
    let real = HarmonicRealization {
        positions: positions.to_vec(),
        base_vertex: 0,
        residual: 0.0,
    };
    let dphi = real.displacements(g);
    let mut worst: f64 = 0.0;
    for x in 0..g.n_vertices() {
        for (k, r) in rho.iter().enumerate() {
            let mean: f64 = g
                .out_edges(x)
                .iter()
                .map(|&i| g.edges()[i].probability * dphi[i][k])
                .sum();
            worst = worst.max((mean - r).abs());
        }
    }
    worst
}

pub fn modified_harmonic_realization(
    g: &QuotientGraph,
    m: &InvariantMeasure,
    base: usize,
) -> Result<HarmonicRealization> {
    let rho = homological_data(g, m).asymptotic_direction;
    let n = g.n_vertices();
    let d = g.dim();
    let mut a = transition_matrix(g) - DMatrix::identity(n, n);
    a.row_mut(base).fill(0.0);
    a[(base, base)] = 1.0;
    let lu = a.lu();

    let mut positions = vec![vec![0.0; d]; n];
    for k in 0..d {
        let mut b = DVector::zeros(n);
        for x in 0..n {
            let drift: f64 = g
                .out_edges(x)
                .iter()
                .map(|&i| g.edges()[i].probability * g.edges()[i].translation[k] as f64)
                .sum();
            b[x] = rho[k] - drift;
        }
        b[base] = 0.0;
        let phi = lu
            .solve(&b)
            .ok_or_else(|| Error::Singular("harmonic realization system".into()))?;
        for x in 0..n {
            positions[x][k] = phi[x] + 0.0;
        }
    }
    let residual = harmonicity_defect(g, &positions, &rho);
    Ok(HarmonicRealization {
        positions,
        base_vertex: base,
        residual,
    })
}

/// Gram matrix `G` of the Albanese inner product, its inverse `g₀`, the
/// volume of the Albanese torus and the embedding `A` with `AGAᵀ = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlbaneseStructure {
    pub gram: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    pub volume: f64,
    pub embedding: DMatrix<f64>,
}

impl AlbaneseStructure {
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// `A·x`: orthonormal coordinates of a `Γ`-coordinate vector.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        (&self.embedding * DVector::from_column_slice(x))
            .iter()
            .copied()
            .collect()
    }

    /// `√(xᵀg₀x) = |A·x|`.
    pub fn metric_norm(&self, x: &[f64]) -> f64 {
        metric_norm(self, x)
    }
}

pub fn metric_norm(s: &AlbaneseStructure, x: &[f64]) -> f64 {
    s.embed(x).iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn albanese_structure(
    g: &QuotientGraph,
    m: &InvariantMeasure,
    realization: &HarmonicRealization,
) -> Result<AlbaneseStructure> {
    let h = homological_data(g, m);
    let d = g.dim();
    let rho = DVector::from_column_slice(&h.asymptotic_direction);
    let mut gram = -&rho * rho.transpose();
    for (w, dphi) in h.edge_weight.iter().zip(realization.displacements(g)) {
        let v = DVector::from_vec(dphi);
        gram += &v * v.transpose() * *w;
    }
    gram = (&gram + gram.transpose()) * 0.5;
    let chol = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let r = chol.l();
    let embedding = r
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or(Error::NotPositiveDefinite)?;
    let metric = embedding.transpose() * &embedding;
    let volume = 1.0 / gram.determinant().sqrt();
    Ok(AlbaneseStructure {
        gram,
        metric,
        volume,
        embedding,
    })
}

/// Measure, homology, realization and metric of one quotient graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub measure: InvariantMeasure,
    pub homology: HomologicalData,
    pub realization: HarmonicRealization,
    pub albanese: AlbaneseStructure,
}

impl Geometry {
    pub fn compute(g: &QuotientGraph) -> Result<Self> {
        let measure = invariant_measure(g).map_err(Error::at("invariant_measure"))?;
        let homology = homological_data(g, &measure);
        let realization = modified_harmonic_realization(g, &measure, 0)
            .map_err(Error::at("modified_harmonic_realization"))?;
        let albanese = albanese_structure(g, &measure, &realization)
            .map_err(Error::at("albanese_structure"))?;
        Ok(Self {
            measure,
            homology,
            realization,
            albanese,
        })
    }

    pub fn rho(&self) -> &[f64] {
        &self.homology.asymptotic_direction
    }
}

/// Interpolation `p_ε = p₀ + εq` between the m-symmetrization of `p` and `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonFamily {
    pub base: QuotientGraph,
    pub measure: Vec<f64>,
    pub p0: Vec<f64>,
    pub q: Vec<f64>,
}

pub fn epsilon_family(g: &QuotientGraph, m: &InvariantMeasure) -> EpsilonFamily {
    let edges = g.edges();
    let (mut p0, mut q) = (Vec::new(), Vec::new());
    for e in edges {
        let back = edges[e.inverse].probability * m.get(e.terminus) / m.get(e.origin);
        p0.push((e.probability + back) / 2.0);
        q.push((e.probability - back) / 2.0);
    }
    EpsilonFamily {
        base: g.clone(),
        measure: m.values.clone(),
        p0,
        q,
    }
}

const NEGATIVE_TOL: f64 = 1e-14;

impl EpsilonFamily {
    pub fn member(&self, eps: f64) -> Result<QuotientGraph> {
        family_member(self, eps)
    }
}

pub fn family_member(f: &EpsilonFamily, eps: f64) -> Result<QuotientGraph> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Argument(format!("ε = {eps} outside [0, 1]")));
    }
    let mut p = Vec::with_capacity(f.p0.len());
    for (i, (a, b)) in f.p0.iter().zip(&f.q).enumerate() {
        let v = a + eps * b;
        if v < -NEGATIVE_TOL {
            return Err(Error::NegativeProbability {
                edge: f.base.edges()[i].id.clone(),
                value: v,
            });
        }
        p.push(v.max(0.0));
    }
    if eps == 1.0 {
        return Ok(f.base.clone());
    }
    Ok(f.base.with_probabilities(&p))
}
