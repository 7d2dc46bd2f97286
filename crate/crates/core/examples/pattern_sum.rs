// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Unheralded kernel of one arm of a two-mode squeezed vacuum, written as a
//! sum over photon-number patterns on the other arm.

use qkpse::estimator::{number_povm, overlap_numerator, pattern_sum_kernel, EstimateReport};
use qkpse::gaussian::{prepare, GaussianSpec};

fn main() -> qkpse::Result<()> {
    let lambda: f64 = 0.3;
    let l2 = lambda * lambda;
    let tms = prepare(&GaussianSpec::TwoModeSqueezed(lambda))?;
    let prob = |n: usize| (1.0 - l2) * l2.powi(n as i32);
    for keep in [0usize, 1, 2, 3] {
        let patterns: Vec<(Vec<usize>, Vec<usize>)> =
            (0..=keep).flat_map(|a| (0..=keep).map(move |b| (vec![a], vec![b]))).collect();
        let kept: f64 = (0..=keep).map(prob).sum();
        let mut seed = 0;
        let r = pattern_sum_kernel(
            &patterns,
            |a: &[usize], b: &[usize]| -> qkpse::Result<EstimateReport> {
                seed += 1;
                Ok(overlap_numerator(&tms, &tms, &[number_povm(a[0])], &[number_povm(b[0])], None, 0.002, 0.01, seed)?.0)
            },
            1.0 - kept * kept,
            Some(0.05),
        )?;
        println!(
            "patterns up to n = {keep}: {:.4} ± {:.4} ({} samples); exact {:.4}",
            r.value,
            r.epsilon,
            r.n_samples,
            (1.0 - l2) / (1.0 + l2)
        );
    }
    Ok(())
}
