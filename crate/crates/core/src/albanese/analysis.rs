use nalgebra::{Complex, DMatrix};
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    export_realization, AlbaneseStructure, Geometry, HarmonicRealization, HomologicalData,
    RealizationTable,
};
use crate::error::{Error, Result};
use crate::lattice::{validate, QuotientGraph};
use crate::spectral::{
    default_search_depth, perron_eigendata, refine_quotient, twisted_operator, InvariantMeasure,
    PerronData, RefinedQuotient,
};

#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    /// Lifted-period search depth; `None` uses `max(32, 4|V₀|)`.
    pub search_depth: Option<usize>,
}

/// A state `(v, σ)` of the lattice: quotient vertex plus fiber cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeState {
    pub vertex: usize,
    pub cell: Vec<i64>,
}

impl LatticeState {
    pub fn new(vertex: usize, cell: Vec<i64>) -> Self {
        Self { vertex, cell }
    }

    pub fn origin(vertex: usize, dim: usize) -> Self {
        Self {
            vertex,
            cell: vec![0; dim],
        }
    }
}

/// Output of the analysis pipeline.
///
/// `graph` is the refined quotient (equal to `original` when no refinement
/// was needed) and every vector below is in its lattice coordinates.
/// `original_geometry` holds the same quantities for the unrefined quotient.
#[derive(Clone, Debug)]
pub struct LatticeAnalysis {
    pub original: QuotientGraph,
    pub original_geometry: Geometry,
    pub graph: QuotientGraph,
    pub refinement: RefinedQuotient,
    pub measure: InvariantMeasure,
    pub homology: HomologicalData,
    pub realization: HarmonicRealization,
    pub albanese: AlbaneseStructure,
    pub period_k: usize,
    pub search_depth: usize,
}

pub fn analyze(g: &QuotientGraph) -> Result<LatticeAnalysis> {
    analyze_with(g, &AnalysisOptions::default())
}

pub fn analyze_with(g: &QuotientGraph, options: &AnalysisOptions) -> Result<LatticeAnalysis> {
    let report = validate(g);
    if !report.is_empty() {
        return Err(Error::at("validate")(Error::Invalid(report)));
    }
    let depth = options
        .search_depth
        .unwrap_or_else(|| default_search_depth(g));
    let refinement = refine_quotient(g, depth).map_err(Error::at("refine_quotient"))?;
    let original_geometry = Geometry::compute(g)?;
    let graph = refinement.refined_graph.clone();
    let geometry = if refinement.is_identity() {
        original_geometry.clone()
    } else {
        Geometry::compute(&graph)?
    };
    Ok(LatticeAnalysis {
        original: g.clone(),
        original_geometry,
        period_k: refinement.period_k,
        graph,
        refinement,
        measure: geometry.measure,
        homology: geometry.homology,
        realization: geometry.realization,
        albanese: geometry.albanese,
        search_depth: depth,
    })
}

impl LatticeAnalysis {
    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn rho(&self) -> &[f64] {
        &self.homology.asymptotic_direction
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            measure: self.measure.clone(),
            homology: self.homology.clone(),
            realization: self.realization.clone(),
            albanese: self.albanese.clone(),
        }
    }

    pub fn m(&self, v: usize) -> f64 {
        self.measure.get(v)
    }

    pub fn label(&self, v: usize) -> usize {
        self.refinement.partition_label[v]
    }

    /// State of the analysed graph lying over the original state `(v, τ)`.
    pub fn locate(&self, v: usize, tau: &[i64]) -> LatticeState {
        let (w, k) = self.refinement.locate(v, tau);
        LatticeState { vertex: w, cell: k }
    }

    /// Original quotient state `(v, τ)` of a state of the analysed graph.
    pub fn lift(&self, s: &LatticeState) -> (usize, Vec<i64>) {
        self.refinement.lift(s.vertex, &s.cell)
    }

    /// The base state: the refined vertex over `(original base, 0)`.
    pub fn base_state(&self) -> LatticeState {
        self.locate(0, &vec![0; self.original.dim()])
    }

    /// State over the original `(v, round(nρ) + shift)`, which follows the
    /// drift so that `Φ(y) − Φ(x) − nρ` stays bounded for `x` over `(·, 0)`.
    pub fn drift_target(&self, v: usize, shift: &[i64], n: usize) -> LatticeState {
        let rho = self.original_geometry.rho();
        let cell: Vec<i64> = shift
            .iter()
            .zip(rho)
            .map(|(s, r)| (n as f64 * r).round() as i64 + s)
            .collect();
        self.locate(v, &cell)
    }

    /// `Φ(v) + σ` in lattice coordinates.
    pub fn position(&self, s: &LatticeState) -> Vec<f64> {
        self.realization.positions[s.vertex]
            .iter()
            .zip(&s.cell)
            .map(|(p, c)| p + *c as f64)
            .collect()
    }

    /// `Φ(y) − Φ(x) − nρ` in lattice coordinates.
    pub fn drift_corrected(&self, n: usize, x: &LatticeState, y: &LatticeState) -> Vec<f64> {
        let (px, py) = (self.position(x), self.position(y));
        (0..self.dim())
            .map(|k| py[k] - px[k] - n as f64 * self.rho()[k])
            .collect()
    }

    /// `A·(Φ(y) − Φ(x) − nρ)`, orthonormal coordinates.
    pub fn z(&self, n: usize, x: &LatticeState, y: &LatticeState) -> Vec<f64> {
        self.albanese.embed(&self.drift_corrected(n, x, y))
    }

    /// Whether `p(n, x, y)` can be positive according to the K-partition.
    pub fn admissible(&self, n: usize, x: &LatticeState, y: &LatticeState) -> bool {
        let k = self.period_k;
        (self.label(x.vertex) + n) % k == self.label(y.vertex) % k
    }

    /// `dΦ(e)` per edge, lattice coordinates.
    pub fn displacements(&self) -> Vec<Vec<f64>> {
        self.realization.displacements(&self.graph)
    }

    /// `A·dΦ(e)` per edge, orthonormal coordinates.
    pub fn embedded_displacements(&self) -> Vec<Vec<f64>> {
        self.displacements()
            .iter()
            .map(|w| self.albanese.embed(w))
            .collect()
    }

    /// `A·ρ`.
    pub fn embedded_rho(&self) -> Vec<f64> {
        self.albanese.embed(self.rho())
    }

    /// Twisted operator at `ω` given in lattice-dual coordinates.
    pub fn twisted_operator(&self, omega: &[f64]) -> DMatrix<Complex<f64>> {
        twisted_operator(&self.graph, &self.displacements(), omega)
    }

    /// Perron data at `ω` given in lattice-dual coordinates.
    pub fn perron_eigendata(&self, omega: &[f64]) -> Result<PerronData> {
        perron_eigendata(&self.graph, &self.displacements(), omega)
    }

    /// Perron data at `u` given in orthonormal dual coordinates.
    pub fn perron_eigendata_orthonormal(&self, u: &[f64]) -> Result<PerronData> {
        perron_eigendata(&self.graph, &self.embedded_displacements(), u)
    }

    /// Realization of the original quotient over a box of original cells.
    pub fn export_realization(&self, window: &[(i64, i64)]) -> RealizationTable {
        export_realization(&self.original, &self.original_geometry, window)
    }

    /// JSON summary of the analysis.
    pub fn report(&self) -> Value {
        let named = |g: &QuotientGraph, v: &[f64]| -> Value {
            g.vertices()
                .iter()
                .zip(v)
                .map(|(k, x)| (k.clone(), json!(x)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let positions = |g: &QuotientGraph, geo: &HarmonicRealization| -> Value {
            g.vertices()
                .iter()
                .zip(&geo.positions)
                .map(|(k, x)| (k.clone(), json!(x)))
                .collect::<serde_json::Map<_, _>>()
                .into()
        };
        let geometry = |g: &QuotientGraph, geo: &Geometry| -> Value {
            json!({
                "measure": named(g, &geo.measure.values),
                "measure_residual": geo.measure.residual,
                "asymptotic_direction": geo.homology.asymptotic_direction,
                "positions": positions(g, &geo.realization),
                "harmonic_residual": geo.realization.residual,
                "gram": rows(&geo.albanese.gram),
                "metric": rows(&geo.albanese.metric),
                "embedding": rows(&geo.albanese.embedding),
                "volume": geo.albanese.volume,
            })
        };
        json!({
            "period": {
                "K": self.period_k,
                "K0": self.refinement.quotient_period_k0,
                "index": self.refinement.index,
                "hnf": self.refinement.sublattice_basis,
                "coset_reps": self.refinement.coset_reps,
                "search_depth": self.search_depth,
                "horizon": self.refinement.search.horizon,
                "radius": self.refinement.search.radius,
            },
            "refined": {
                "vertices": self.graph.vertices(),
                "labels": self.refinement.partition_label,
                "geometry": geometry(&self.graph, &self.geometry()),
            },
            "original": geometry(&self.original, &self.original_geometry),
        })
    }
}

/// Row-major nested vectors.
pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}
