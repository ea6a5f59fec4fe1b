use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lattice::QuotientGraph;

type C64 = Complex<f64>;

const CONTINUATION_STEPS: usize = 8;
const AMBIGUITY_TOL: f64 = 1e-8;

/// `H_ω[x][y] = Σ_{e: x→y} p(e) exp(2πi ⟨ω, dΦ(e)⟩)`.
///
/// `displacement[e]` is `dΦ(e)` for each edge, in the same coordinates as `ω`
/// is dual to.
pub fn twisted_operator(
    g: &QuotientGraph,
    displacement: &[Vec<f64>],
    omega: &[f64],
) -> DMatrix<C64> {
    let n = g.n_vertices();
    let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (e, w) in g.edges().iter().zip(displacement) {
        let phase: f64 = omega.iter().zip(w).map(|(a, b)| a * b).sum();
        let theta = 2.0 * std::f64::consts::PI * phase;
        h[(e.origin, e.terminus)] += C64::from_polar(e.probability, theta);
    }
    h
}

/// Perron eigenvalue `μ₀(χ_ω)` with its right and left eigenvectors.
///
/// `right` is normalized by `Σ|φ|² = 1` with its largest-modulus entry real
/// positive; `left` satisfies `ψᴴH = μψᴴ` and `Σ φ·conj(ψ) = 1`.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub mu: C64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

impl PerronData {
    /// `−log μ₀` on the principal branch.
    pub fn neg_log_mu(&self) -> C64 {
        -self.mu.ln()
    }
}

fn eigenvalues(h: &DMatrix<C64>) -> Result<Vec<C64>> {
    h.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| Error::Singular("complex Schur decomposition did not converge".into()))
}

/// Track the eigenvalue through 1 along `t·ω`, `t ∈ [0, 1]`.
pub fn perron_eigendata(
    g: &QuotientGraph,
    displacement: &[Vec<f64>],
    omega: &[f64],
) -> Result<PerronData> {
    let n = g.n_vertices();
    let mut mu = C64::new(1.0, 0.0);
    let mut h = twisted_operator(g, displacement, omega);
    for s in 0..=CONTINUATION_STEPS {
        let t = s as f64 / CONTINUATION_STEPS as f64;
        let w: Vec<f64> = omega.iter().map(|x| x * t).collect();
        h = twisted_operator(g, displacement, &w);
        let ev = eigenvalues(&h)?;
        let best = ev
            .iter()
            .copied()
            .min_by(|a, b| (a - mu).norm().total_cmp(&(b - mu).norm()))
            .expect("nonempty spectrum");
        let close = ev
            .iter()
            .filter(|l| (*l - best).norm() < AMBIGUITY_TOL)
            .count();
        if close > 1 {
            return Err(Error::BranchAmbiguity {
                count: close,
                tol: AMBIGUITY_TOL,
            });
        }
        mu = best;
    }

    let shifted = &h - DMatrix::identity(n, n) * mu;
    let svd = shifted.svd(true, true);
    let i = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let vt = svd.v_t.as_ref().unwrap();
    let u = svd.u.as_ref().unwrap();
    let mut phi: DVector<C64> = vt.row(i).transpose().map(|z| z.conj());
    let mut psi: DVector<C64> = u.column(i).into_owned();

    let num = psi.dotc(&(&h * &phi));
    let den = psi.dotc(&phi);
    if den.norm() > 0.0 {
        mu = num / den;
    }

    let norm = phi.norm();
    phi /= C64::new(norm, 0.0);
    let lead = phi
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap();
    phi *= lead.conj() / lead.norm();
    let s: C64 = phi.iter().zip(psi.iter()).map(|(a, b)| a * b.conj()).sum();
    psi /= s.conj();

    Ok(PerronData {
        mu,
        right: phi.iter().copied().collect(),
        left: psi.iter().copied().collect(),
    })
}
