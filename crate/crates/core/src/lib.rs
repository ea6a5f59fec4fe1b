//! Discrete geometric analysis of random walks on crystal lattices.
//!
//! The pipeline runs from a finite quotient graph with translation labels
//! ([`lattice`]) through the invariant measure and period refinement
//! ([`spectral`]) to the Albanese geometry and modified harmonic realization
//! ([`albanese`]). On top of that sit exact heat kernels and the local CLT
//! ([`heat_kernel`]), the analytic correction coefficient `a₁`
//! ([`perturbation`]) and Monte Carlo checks of the central limit theorems
//! ([`montecarlo`]).

pub mod albanese;
pub mod error;
pub mod heat_kernel;
pub mod hnf;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod montecarlo;
pub mod perturbation;
pub mod spectral;

pub use albanese::{analyze, analyze_with, AnalysisOptions, LatticeAnalysis};
pub use error::{Error, Result};
pub use lattice::{Builtin, QuotientGraph};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
