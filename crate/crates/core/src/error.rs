// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ordering parameter s = {0} is in the singular regime (s must be < 1)")]
    SingularOrdering(f64),
    #[error("ordering parameter {0} outside [-1, 1]")]
    OrderingOutOfRange(f64),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Σ - sI is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    PositiveDefiniteViolation { min_eigenvalue: f64 },
    #[error("covariance is not symmetric (max asymmetry {0:.3e})")]
    SymmetryViolation(f64),
    #[error("covariance violates the uncertainty relation (Σ + iΩ has eigenvalue {0:.3e})")]
    PhysicalityViolation(f64),
    #[error("transfer matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("matrix operator norm {0:.6} exceeds 1")]
    NormViolation(f64),
    #[error("conditioning block is singular beyond the pseudo-inverse tolerance")]
    SingularConditioning,
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("rejection sampler stalled (acceptance rate {0:.2e})")]
    RejectionStall(f64),
    #[error("ordering infeasible: {0}")]
    OrderingInfeasible(String),
    #[error("guard violation: {0}")]
    GuardViolation(String),
    #[error("required sample count exceeds 2^62")]
    SampleOverflow,
    #[error("estimator produced a non-finite value")]
    NonFiniteEstimate,
    #[error("error budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("Fock truncation: {0}")]
    Truncation(String),
    #[error("loss pattern weights differ (‖p‖₁ ≠ ‖q‖₁)")]
    PatternMismatch,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("kernel evaluation failed at entry ({i}, {j}): {source}")]
    KernelEntry {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("matrix has eigenvalue {0:.3e} below the PSD floor; project onto the PSD cone before solving")]
    NotPositiveSemidefinite(f64),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("every ordering on the grid failed")]
    AllGridFailed,
    #[error("zero trace operator")]
    ZeroTrace,
}

pub type Result<T> = std::result::Result<T, Error>;
