// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Kernel ridge regression on top of any kernel evaluator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Training points with real targets.
#[derive(Debug, Clone)]
pub struct Dataset<X> {
    pub points: Vec<X>,
    pub targets: Vec<f64>,
}

impl<X> Dataset<X> {
    pub fn new(points: Vec<X>, targets: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != targets.len() {
            return Err(Error::DimensionMismatch(format!("{} points and {} targets", points.len(), targets.len())));
        }
        Ok(Self { points, targets })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// K_ij = kernel(xᵢ, xⱼ) for i ≤ j, mirrored and symmetrized.
pub fn kernel_matrix<X, F>(d: &Dataset<X>, kernel: F) -> Result<DMatrix<f64>>
where
    X: Sync,
    F: Fn(&X, &X) -> Result<f64> + Sync,
{
    let n = d.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            kernel(&d.points[i], &d.points[j]).map_err(|e| Error::KernelEntry { i, j, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let mut k = DMatrix::zeros(n, n);
    for (&(i, j), v) in pairs.iter().zip(vals) {
        k[(i, j)] = v;
        k[(j, i)] = v;
    }
    Ok(k)
}

/// Ridge coefficients.
#[derive(Debug, Clone)]
pub struct RidgeModel {
    pub alphas: Vec<f64>,
    pub lambda: f64,
}

/// Eigenvalues below this are treated as genuine indefiniteness.
pub const PSD_FLOOR: f64 = -1e-6;

/// Solve (K + nλI)α = y.
pub fn ridge_fit(k: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    let n = k.nrows();
    if k.ncols() != n || y.len() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!("{}x{} kernel with {} targets", k.nrows(), k.ncols(), y.len())));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("regularization λ = {lambda} must be positive")));
    }
    let sym = (k + k.transpose()) * 0.5;
    let lmin = SymmetricEigen::new(sym.clone()).eigenvalues.min();
    if lmin < PSD_FLOOR {
        return Err(Error::NotPositiveSemidefinite(lmin));
    }
    let a = sym + DMatrix::identity(n, n) * (n as f64 * lambda);
    let rhs = DVector::from_column_slice(y);
    let sol = a
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| a.clone().lu().solve(&rhs))
        .ok_or_else(|| Error::SolveFailed("regularized kernel matrix is singular".into()))?;
    let resid = (&a * &sol - &rhs).norm() / rhs.norm().max(1e-300);
    if resid > 1e-10 {
        return Err(Error::SolveFailed(format!("relative residual {resid:.2e}")));
    }
    Ok(RidgeModel { alphas: sol.iter().cloned().collect(), lambda })
}

/// Symmetrize and clip negative eigenvalues to zero.
pub fn project_psd(k: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (k + k.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Σᵢ αᵢ K(x, xᵢ).
pub fn predict(m: &RidgeModel, kernel_row: &[f64]) -> Result<f64> {
    if kernel_row.len() != m.alphas.len() {
        return Err(Error::DimensionMismatch(format!("row of {} for {} coefficients", kernel_row.len(), m.alphas.len())));
    }
    Ok(m.alphas.iter().zip(kernel_row).map(|(a, k)| a * k).sum())
}
