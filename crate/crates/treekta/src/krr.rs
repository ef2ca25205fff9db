//! Kernel ridge regression on precomputed kernels.
//!
//! The ridge is not tuned: following the minimal-invertibility rule, the
//! fit walks lambda through {1e-10, 1e-9, ..., 1e-1} and keeps the first
//! value whose Cholesky factorization succeeds. Targets are used raw (no
//! centering).

use crate::error::{Error, Result};
use crate::kernel::{CrossKernel, KernelMatrix};
use crate::linalg::solve_spd;

/// Ascending ridge grid shared with the landmark solver.
pub(crate) const RIDGE_GRID: [f64; 10] = [
    1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1,
];

#[derive(Debug, Clone)]
pub struct KrrModel {
    alpha: Vec<f64>,
    lambda: f64,
    train_targets: Vec<f64>,
}

impl KrrModel {
    /// Dual coefficients, one per training row.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// The accepted ridge.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn train_targets(&self) -> &[f64] {
        &self.train_targets
    }
}

/// Solves (K + lambda I) alpha = Y at the smallest workable lambda.
pub fn fit_krr(k: &KernelMatrix, y: &[f64]) -> Result<KrrModel> {
    if y.len() != k.n() {
        return Err(Error::DimensionMismatch(format!(
            "kernel is {}x{} but target has length {}",
            k.n(),
            k.n(),
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::KernelUnusable);
    }
    for &lambda in &RIDGE_GRID {
        match solve_spd(k.values(), lambda, y) {
            Ok(alpha) => {
                return Ok(KrrModel {
                    alpha,
                    lambda,
                    train_targets: y.to_vec(),
                })
            }
            Err(Error::NotPositiveDefinite) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::KernelUnusable)
}

/// Predictions are the cross-kernel rows dotted with alpha.
pub fn predict_krr(model: &KrrModel, kx: &CrossKernel) -> Result<Vec<f64>> {
    if kx.n_train() != model.alpha.len() {
        return Err(Error::DimensionMismatch(format!(
            "cross kernel has {} train columns but model has {} coefficients",
            kx.n_train(),
            model.alpha.len()
        )));
    }
    kx.values().mul_vec(&model.alpha)
}
