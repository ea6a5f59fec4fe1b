//! Quotient graphs of crystal lattices.
//!
//! A crystal lattice `X` is never stored directly. It is represented by its
//! finite quotient `X₀ = Γ\X` together with an integer translation `τ(e) ∈ ℤᵈ`
//! on every directed edge, so that a lift of `e` starting in the fiber cell
//! `σ` ends in the cell `σ + τ(e)`.

mod builtin;
mod document;
pub(crate) mod validate;

use std::collections::HashMap;

pub use builtin::{build_builtin, parse_params, Builtin};
pub use document::{
    graph_value, load_graph, load_graph_str, parse_probability, save_graph, save_graph_string,
};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};

use crate::error::{Error, Result};

/// Coordinates of an element of `Γ ≅ ℤᵈ` in a fixed basis `σ₁,…,σ_d`.
pub type LatticeVector = Vec<i64>;

/// Edge description by vertex and edge identifiers, as found in documents.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub translation: LatticeVector,
    pub p: f64,
    pub inverse: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuotientEdge {
    pub id: String,
    pub origin: usize,
    pub terminus: usize,
    pub translation: LatticeVector,
    pub probability: f64,
    pub inverse: usize,
}

/// Finite quotient graph with translation labels and transition probabilities.
///
/// Vertices are kept in lexicographic order of their ids; edges keep the
/// order in which they were given. Construction only checks that the
/// references resolve; the probabilistic invariants are checked by
/// [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientGraph {
    dim: usize,
    vertices: Vec<String>,
    edges: Vec<QuotientEdge>,
    out_edges: Vec<Vec<usize>>,
}

impl QuotientGraph {
    pub fn new(dim: usize, vertices: Vec<String>, edges: Vec<EdgeSpec>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        let mut vertices = vertices;
        vertices.sort();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!("duplicate vertex id {}", w[0])));
        }
        if vertices.is_empty() {
            return Err(Error::Argument("graph has no vertices".into()));
        }
        let vindex: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let mut eindex: HashMap<&str, usize> = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter().enumerate() {
            if eindex.insert(e.id.as_str(), i).is_some() {
                return Err(Error::Argument(format!("duplicate edge id {}", e.id)));
            }
        }

        let mut out = Vec::with_capacity(edges.len());
        for e in &edges {
            let vertex = |name: &String| {
                vindex
                    .get(name.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownVertex {
                        edge: e.id.clone(),
                        vertex: name.clone(),
                    })
            };
            if e.translation.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: format!("translation of edge {}", e.id),
                    expected: dim,
                    found: e.translation.len(),
                });
            }
            let inverse =
                *eindex
                    .get(e.inverse.as_str())
                    .ok_or_else(|| Error::DanglingInverse {
                        edge: e.id.clone(),
                        inverse: e.inverse.clone(),
                    })?;
            out.push(QuotientEdge {
                id: e.id.clone(),
                origin: vertex(&e.from)?,
                terminus: vertex(&e.to)?,
                translation: e.translation.clone(),
                probability: e.p,
                inverse,
            });
        }
        Ok(Self::from_edges(dim, vertices, out))
    }

    pub(crate) fn from_edges(dim: usize, vertices: Vec<String>, edges: Vec<QuotientEdge>) -> Self {
        let mut out_edges = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.origin].push(i);
        }
        Self {
            dim,
            vertices,
            edges,
            out_edges,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.probability).collect()
    }

    /// Same graph with the edge probabilities replaced (in edge order).
    pub fn with_probabilities(&self, p: &[f64]) -> Self {
        assert_eq!(p.len(), self.edges.len());
        let mut g = self.clone();
        for (e, &pe) in g.edges.iter_mut().zip(p) {
            e.probability = pe;
        }
        g
    }

    /// Largest `‖τ(e)‖∞` over all edges.
    pub fn max_translation(&self) -> i64 {
        self.edges
            .iter()
            .flat_map(|e| e.translation.iter().map(|t| t.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Edge specs in document form.
    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                from: self.vertices[e.origin].clone(),
                to: self.vertices[e.terminus].clone(),
                translation: e.translation.clone(),
                p: e.probability,
                inverse: self.edges[e.inverse].id.clone(),
            })
            .collect()
    }
}
