//! Small dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Least-squares solver for a singular square system `M x = b` augmented with
/// one side condition `wᵀx = s` that removes the kernel.
pub struct ConstrainedSolver {
    aug: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

pub const CONSISTENCY_TOL: f64 = 1e-10;

impl ConstrainedSolver {
    pub fn new(m: &DMatrix<f64>, w: &[f64]) -> Result<Self> {
        let n = m.ncols();
        assert_eq!(w.len(), n);
        let mut aug = DMatrix::zeros(n + 1, n);
        aug.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        for (j, &x) in w.iter().enumerate() {
            aug[(m.nrows(), j)] = x;
        }
        let svd = aug.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-12 * smax.max(1.0)) {
            return Err(Error::Singular(format!(
                "augmented system is rank deficient (σ_min = {smin:e})"
            )));
        }
        let pinv = svd
            .pseudo_inverse(0.0)
            .map_err(|e| Error::Singular(e.to_string()))?;
        Ok(Self { aug, pinv })
    }

    /// Solve, returning the solution and the max-norm residual of the
    /// augmented system. Fails if the residual exceeds the tolerance.
    pub fn solve(&self, b: &[f64], s: f64, context: &str) -> Result<Vec<f64>> {
        let n = self.aug.ncols();
        let mut rhs = DVector::zeros(n + 1);
        for (i, &x) in b.iter().enumerate() {
            rhs[i] = x;
        }
        rhs[n] = s;
        let x = &self.pinv * &rhs;
        let residual = (&self.aug * &x - &rhs).amax();
        let scale = 1.0 + rhs.amax();
        if residual > CONSISTENCY_TOL * scale {
            return Err(Error::Inconsistent {
                context: context.into(),
                residual,
            });
        }
        Ok(x.iter().copied().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constrained_solution() {
        // Laplacian of a path on three vertices; kernel spanned by 1.
        let m = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let solver = ConstrainedSolver::new(&m, &[1.0, 1.0, 1.0]).unwrap();
        let x = solver.solve(&[1.0, 0.0, -1.0], 0.0, "test").unwrap();
        let r = &m * DVector::from_vec(x.clone());
        assert!((r[0] - 1.0).abs() < 1e-12 && r[1].abs() < 1e-12 && (r[2] + 1.0).abs() < 1e-12);
        assert!(x.iter().sum::<f64>().abs() < 1e-12);
        assert!(solver.solve(&[1.0, 0.0, 0.0], 0.0, "test").is_err());
    }
}
