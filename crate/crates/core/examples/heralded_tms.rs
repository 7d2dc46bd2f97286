// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Kernel between single-mode states heralded from a two-mode squeezed
//! vacuum, estimated with the post-selected algorithm and checked against
//! the Fock oracle.

use qkpse::estimator::{algorithm2_kernel, number_povm, Alg2Orderings};
use qkpse::gaussian::{prepare, GaussianSpec};
use qkpse::oracle;

fn main() -> qkpse::Result<()> {
    let lambda = 0.3;
    let tms = prepare(&GaussianSpec::TwoModeSqueezed(lambda))?;
    for (n, n2) in [(1, 1), (1, 2)] {
        let (a, pa) = oracle::tms_heralded_state(lambda, n, 30)?;
        let (b, _) = oracle::tms_heralded_state(lambda, n2, 30)?;
        let exact = oracle::exact_kernel(&a, &b)?;
        let r = algorithm2_kernel(&tms, &tms, &[number_povm(n)], &[number_povm(n2)], Alg2Orderings::default(), 0.1, 0.05, 7)?;
        println!(
            "herald ({n}, {n2}): K = {:.4} (exact {exact:.4}, bound {:.3}), P(herald) = {pa:.4}",
            r.kernel.value, r.kernel.epsilon
        );
        println!(
            "  a = {:.5} ({} samples), b = {:.5} ({}), c = {:.5} ({}), orderings {:?}, {:.1} s",
            r.numerator.value,
            r.numerator.n_samples,
            r.denominator_x.value,
            r.denominator_x.n_samples,
            r.denominator_x2.value,
            r.denominator_x2.n_samples,
            r.orderings,
            r.kernel.wall_seconds
        );
    }
    Ok(())
}
