// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated point operators: closed form against the displaced-number-state
//! construction, and the trace approaching 1/π.

use std::f64::consts::PI;

use num_complex::Complex64;
use qkpse::phase_space::{point_operator_diagonal, point_operator_spectral, single_mode_point_operator};

fn main() -> qkpse::Result<()> {
    let alpha = Complex64::new(0.4, -0.3);
    for s in [-0.9, -0.5, 0.0, 0.4] {
        let closed = single_mode_point_operator(s, alpha, 12)?;
        let spectral = point_operator_spectral(s, alpha, 12, 160)?;
        let scale = closed.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap = (&closed.matrix - &spectral.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!("s = {s:+.1}: max entry {scale:.3e}, relative gap to spectral form {:.1e}", gap / scale);
    }
    println!("\ntrace of the truncated operator, times π (converges to 1 for s < 0):");
    for s in [-0.8, -0.3, 0.3] {
        let row: Vec<String> = [10, 40, 160]
            .iter()
            .map(|&d| {
                let t: f64 = point_operator_diagonal(s, alpha, d).unwrap().iter().sum();
                format!("d={d}: {:+.6e}", t * PI)
            })
            .collect();
        println!("  s = {s:+.1}  {}", row.join("  "));
    }
    Ok(())
}
