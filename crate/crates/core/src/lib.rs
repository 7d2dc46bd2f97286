// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase-space Monte Carlo estimation of bosonic quantum kernels.
//!
//! Kernels K(x, x') = Tr[ρ(x)ρ(x')] of photonic data encodings are written
//! as overlaps of s-ordered quasi-probability distributions and estimated by
//! sampling, with sample counts sized by Hoeffding's inequality. A truncated
//! Fock-space oracle provides exact values for small instances.
//!
//! Modules:
//! - [`phase_space`]: s-ordered distributions, point operators, negativity.
//! - [`gaussian`]: covariance calculus for Gaussian states.
//! - [`sources`]: product inputs through linear optical networks.
//! - [`estimator`]: Monte Carlo estimators (direct and post-selected).
//! - [`permanent`]: permanent-based estimator for lossy single photons.
//! - [`oracle`]: exact truncated Fock-space computations.
//! - [`kernelml`]: kernel matrices and ridge regression.
//! - [`runner`]: config-driven experiments behind the `qkpse` binary.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod gaussian;
pub mod kernelml;
mod numeric;
pub mod oracle;
pub mod permanent;
pub mod phase_space;
pub mod runner;
pub mod sources;

pub use error::{Error, Result};
