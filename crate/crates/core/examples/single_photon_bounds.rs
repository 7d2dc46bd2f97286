// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Negative volume, extrema and estimator range bounds for lossy single
//! photons, scanned over the ordering parameter.

use qkpse::gaussian::TransferMatrix;
use qkpse::phase_space::{extrema_lossy_single_photon, negvol_lossy_single_photon};
use qkpse::sources::{default_ordering_grid, lon_range_bound, mode_range_factor, optimize_ordering, InputStateSpec, LonEncoding, ModeState};

fn main() -> qkpse::Result<()> {
    for eta in [0.5, 0.85, 1.0] {
        let input = InputStateSpec::new(ModeState::SinglePhoton, eta);
        println!("eta = {eta}");
        println!("  {:>6} {:>10} {:>10} {:>10} {:>10}", "s", "N(W^s)", "min W^-s", "max W^-s", "factor");
        for s in [-0.5, -0.2, 0.0, 0.3, 0.5] {
            let n = negvol_lossy_single_photon(eta, s)?;
            let ext = extrema_lossy_single_photon(eta, s)?;
            let factor = mode_range_factor(&input, s)?;
            println!("  {s:>6.2} {n:>10.5} {:>10.5} {:>10.5} {factor:>10.5}", ext.min(), ext.max());
        }
        let e = LonEncoding::new(vec![input; 4], TransferMatrix::haar(4, 1))?;
        let (s, b) = optimize_ordering(&e, &default_ordering_grid())?;
        println!("  4 modes: best s on the grid {s:.4}, bound {b:.4} (s = 0.3 gives {:.4})\n", lon_range_bound(&e, 0.3)?);
    }
    Ok(())
}
