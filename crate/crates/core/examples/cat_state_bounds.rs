// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-mode range factors of lossy cat states.

use num_complex::Complex64;
use qkpse::sources::{mode_range_factor, InputStateSpec, ModeState};

fn main() -> qkpse::Result<()> {
    println!("{:>5} {:>5} {:>6} {:>10} {:>10}", "gamma", "eta", "s", "N(W^s)", "factor");
    for (g, eta) in [(1.0, 1.0), (2.0, 0.9), (4.0, 0.8)] {
        let input = InputStateSpec::new(ModeState::Cat(Complex64::new(g, 0.0)), eta);
        for s in [-0.3, 0.0, 0.1] {
            match (input.pqd(s), mode_range_factor(&input, s)) {
                (Ok(p), Ok(f)) => println!("{g:>5} {eta:>5} {s:>6.2} {:>10.5} {f:>10.5}", p.neg_volume()),
                (Err(e), _) | (_, Err(e)) => println!("{g:>5} {eta:>5} {s:>6.2} failed: {e}"),
            }
        }
    }
    Ok(())
}
