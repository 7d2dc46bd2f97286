// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form Gaussian kernels, the Monte Carlo estimate and the Fock oracle.

use num_complex::Complex64;
use qkpse::estimator::{algorithm1_kernel, Encoding};
use qkpse::gaussian::{apply_loss, exact_gaussian_kernel, nonclassical_depth, prepare, GaussianSpec, LossVector};
use qkpse::oracle::{self, FockOperator};

fn main() -> qkpse::Result<()> {
    let d = 50;
    let pairs = [((0.5, 0.0), (0.2, 1.0)), ((0.8, 0.3), (0.8, -0.3)), ((0.0, 0.0), (1.0, 0.5))];
    for ((r1, p1), (r2, p2)) in pairs {
        let g1 = prepare(&GaussianSpec::Squeezed { r: vec![r1], phases: vec![p1] })?;
        let g2 = prepare(&GaussianSpec::Squeezed { r: vec![r2], phases: vec![p2] })?;
        let closed = exact_gaussian_kernel(&g1, &g2)?;
        let f1 = FockOperator::pure(1, d, &oracle::squeezed_vacuum_vector(r1, p1, d))?;
        let f2 = FockOperator::pure(1, d, &oracle::squeezed_vacuum_vector(r2, p2, d))?;
        let fock = oracle::exact_kernel(&f1, &f2)?;
        let mc = algorithm1_kernel(&Encoding::Gaussian(g1.clone()), &Encoding::Gaussian(g2), 0.0, 0.01, 0.05, 1)?;
        println!(
            "r=({r1}, {r2}): closed {closed:.8}, Fock {fock:.8}, estimate {:.4} ({} samples)",
            mc.value, mc.n_samples
        );
    }
    let coh = |a: f64, b: f64| prepare(&GaussianSpec::Coherent(vec![Complex64::new(a, b)]));
    println!("coherent pair: {:.12}", exact_gaussian_kernel(&coh(0.3, 0.1)?, &coh(-0.2, 0.4)?)?);

    let sq = prepare(&GaussianSpec::Squeezed { r: vec![0.7], phases: vec![0.0] })?;
    println!("\nnon-classical depth of r = 0.7 under loss:");
    for eta in [1.0, 0.75, 0.5, 0.25] {
        let lossy = apply_loss(&sq, &LossVector::uniform(eta, 1)?)?;
        println!("  eta = {eta:.2}: tau = {:.6}", nonclassical_depth(&lossy));
    }
    Ok(())
}
