// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Kernel of lossy single photons through random interferometers.

use qkpse::estimator::{algorithm1_kernel, Encoding};
use qkpse::gaussian::TransferMatrix;
use qkpse::oracle;
use qkpse::sources::{default_ordering_grid, optimize_ordering, InputStateSpec, LonEncoding, ModeState};

fn main() -> qkpse::Result<()> {
    let m = 3;
    let inputs = vec![InputStateSpec::new(ModeState::SinglePhoton, 0.6); m];
    let x = LonEncoding::new(inputs.clone(), TransferMatrix::haar(m, 10))?;
    let (s, bound) = optimize_ordering(&x, &default_ordering_grid())?;
    println!("ordering s = {s:.4}, range bound {bound:.4}");
    for seed in 11..15 {
        let x2 = LonEncoding::new(inputs.clone(), TransferMatrix::haar(m, seed))?;
        let exact = oracle::lon_kernel(&x, &x2, m + 1)?;
        let r = algorithm1_kernel(&Encoding::Lon(x.clone()), &Encoding::Lon(x2), s, 0.02, 0.05, seed)?;
        println!(
            "V' seed {seed}: estimate {:.4} (oracle {exact:.4}, {} samples, {:.2} s)",
            r.value, r.n_samples, r.wall_seconds
        );
    }
    Ok(())
}
