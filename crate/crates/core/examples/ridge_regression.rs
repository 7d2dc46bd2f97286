// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Kernel ridge regression with estimated quantum kernels of displaced
//! squeezed states.

use num_complex::Complex64;
use qkpse::estimator::{algorithm1_kernel, Encoding};
use qkpse::gaussian::{apply_lon, exact_gaussian_kernel, prepare, GaussianSpec, GaussianState, TransferMatrix};
use qkpse::kernelml::{kernel_matrix, predict, project_psd, ridge_fit, Dataset};

fn encode(x: f64) -> qkpse::Result<GaussianState> {
    let sq = prepare(&GaussianSpec::Squeezed { r: vec![0.3, 0.3], phases: vec![x, -x] })?;
    let coh = prepare(&GaussianSpec::Coherent(vec![Complex64::new(x, 0.0), Complex64::new(0.0, 0.5 * x)]))?;
    let shifted = qkpse::gaussian::make_gaussian(coh.mean() + sq.mean(), sq.cov().clone())?;
    apply_lon(&shifted, &TransferMatrix::haar(2, 9))
}

fn main() -> qkpse::Result<()> {
    let f = |x: f64| x.sin() * (-0.3 * x * x).exp();
    let xs: Vec<f64> = (0..15).map(|i| -2.0 + 4.0 * i as f64 / 14.0).collect();
    let data = Dataset::new(xs.iter().map(|&x| encode(x)).collect::<qkpse::Result<Vec<_>>>()?, xs.iter().map(|&x| f(x)).collect())?;

    let exact = kernel_matrix(&data, exact_gaussian_kernel)?;
    let estimated = kernel_matrix(&data, |a, b| {
        algorithm1_kernel(&Encoding::Gaussian(a.clone()), &Encoding::Gaussian(b.clone()), 0.0, 0.02, 0.01, 17).map(|r| r.value)
    })?;
    let gap = (&exact - &estimated).amax();
    println!("max |K_est - K_exact| = {gap:.4}");

    let lambda = 1e-3;
    for (name, k) in [("exact", exact), ("estimated", project_psd(&estimated))] {
        let model = ridge_fit(&k, &data.targets, lambda)?;
        let mut mse = 0.0;
        let tests: Vec<f64> = (0..40).map(|i| -1.9 + 3.8 * i as f64 / 39.0).collect();
        for &x in &tests {
            let g = encode(x)?;
            let row = data.points.iter().map(|p| exact_gaussian_kernel(&g, p)).collect::<qkpse::Result<Vec<_>>>()?;
            mse += (predict(&model, &row)? - f(x)).powi(2);
        }
        println!("{name:>9} kernel: test MSE {:.3e}", mse / tests.len() as f64);
    }
    Ok(())
}
