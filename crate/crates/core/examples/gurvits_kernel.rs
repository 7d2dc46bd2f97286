// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Permanent-based kernel estimates for lossy single photons, with the exact
//! enumeration for comparison.

use nalgebra::DMatrix;
use qkpse::gaussian::{LossVector, TransferMatrix};
use qkpse::permanent::{exact_photonic_kernel, glynn_estimate, lossy_photonic_kernel_eps, ryser, PatternSampler};

fn main() -> qkpse::Result<()> {
    let v = TransferMatrix::haar(8, 3);
    let w = DMatrix::from_fn(5, 5, |i, j| v.matrix()[(i, j)]);
    let g = glynn_estimate(&w, 200_000, 1)?;
    println!("Per(W): Ryser {:.6}, Glynn {:.6} ± {:.6}", ryser(&w).re, g.value, g.std_error);

    for m in [4, 6, 8] {
        let (vx, vx2) = (TransferMatrix::haar(m, 100), TransferMatrix::haar(m, 200));
        let eta = LossVector::uniform(0.7, m)?;
        let exact = exact_photonic_kernel(&vx, &vx2, &eta)?;
        for sampler in [PatternSampler::Direct, PatternSampler::UniformEta] {
            let r = lossy_photonic_kernel_eps(&vx, &vx2, &eta, 0.02, 0.05, sampler, 5)?;
            println!("m = {m} {sampler:?}: {:.4} (exact {exact:.4}), {} repeats", r.value, r.n_samples);
        }
    }
    Ok(())
}
