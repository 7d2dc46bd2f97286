// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase-space quantities against the truncated Fock-space oracle.

use num_complex::Complex64;

use qkpse::estimator::{algorithm1_kernel, number_povm, overlap_numerator, pattern_sum_kernel, Encoding, EstimateReport};
use qkpse::gaussian::{exact_gaussian_kernel, prepare, GaussianSpec, LossVector, TransferMatrix};
use qkpse::oracle::{self, FockOperator};
use qkpse::permanent::{exact_photonic_kernel, lossy_photonic_kernel_eps, PatternSampler};
use qkpse::phase_space::{spqd_gaussian, OrderingVector};
use qkpse::sources::{spqd_output, InputStateSpec, LonEncoding, ModeState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const POINTS: [(f64, f64); 4] = [(0.0, 0.0), (0.3, -0.2), (-0.5, 0.6), (0.9, 0.1)];

#[test]
fn lon_output_distribution_matches_oracle() {
    let inputs = vec![
        InputStateSpec::new(ModeState::SinglePhoton, 0.7),
        InputStateSpec::new(ModeState::Coherent(c(0.4, 0.2)), 0.9),
    ];
    let e = LonEncoding::new(inputs, TransferMatrix::haar(2, 5)).unwrap();
    let rho = oracle::lon_output_state(&e, 14).unwrap();
    for s in [-0.6, -0.2] {
        let ord = OrderingVector::uniform(s, 2).unwrap();
        for &(a, b) in &POINTS {
            let alpha = [c(a, b), c(b, -a)];
            let want = oracle::pqd_check(&rho, &ord, &alpha).unwrap();
            assert!(!want.truncated);
            let got = spqd_output(&e, s, &alpha).unwrap();
            assert!((got - want.value).abs() < 1e-8, "s={s} α={alpha:?}: {got} vs {}", want.value);
        }
    }
}

#[test]
fn cat_distribution_matches_oracle() {
    let spec = InputStateSpec::new(ModeState::Cat(c(1.2, 0.5)), 0.8);
    let rho = oracle::fock_density(&[spec], 40).unwrap();
    let pqd = spec.pqd(-0.3).unwrap();
    let ord = OrderingVector::uniform(-0.3, 1).unwrap();
    for &(a, b) in &POINTS {
        let want = oracle::pqd_check(&rho, &ord, &[c(a, b)]).unwrap().value;
        assert!((pqd.eval(&[c(a, b)]) - want).abs() < 1e-9);
    }
}

#[test]
fn gaussian_distribution_matches_oracle() {
    let (r, phi) = (0.4, 0.9);
    let g = prepare(&GaussianSpec::Squeezed { r: vec![r], phases: vec![phi] }).unwrap();
    // For s > 0 the point-operator weights grow like ((1+s)/(1-s))ⁿ, so the
    // truncation has to reach well into the squeezed tail.
    let d = 90;
    let rho = FockOperator::pure(1, d, &oracle::squeezed_vacuum_vector(r, phi, d)).unwrap();
    for s in [-0.5, 0.0, 0.3] {
        let ord = OrderingVector::uniform(s, 1).unwrap();
        for &(a, b) in &POINTS {
            let want = oracle::pqd_check(&rho, &ord, &[c(a, b)]).unwrap().value;
            let got = spqd_gaussian(&g, &ord, &[c(a, b)]).unwrap();
            assert!((got - want).abs() < 1e-9, "s={s}: {got} vs {want}");
        }
    }
}

#[test]
fn algorithm1_gaussian_path_matches_closed_form() {
    let g1 = prepare(&GaussianSpec::Squeezed { r: vec![0.3, 0.1], phases: vec![0.2, -1.0] }).unwrap();
    let g2 = prepare(&GaussianSpec::Coherent(vec![c(0.3, 0.0), c(-0.2, 0.4)])).unwrap();
    let exact = exact_gaussian_kernel(&g1, &g2).unwrap();
    let r = algorithm1_kernel(&Encoding::Gaussian(g1), &Encoding::Gaussian(g2), 0.2, 0.02, 0.01, 3).unwrap();
    assert!((r.value - exact).abs() < 0.02, "{} vs {exact}", r.value);
}

#[test]
fn permanent_kernel_matches_fock_oracle() {
    for m in [2, 3] {
        let (vx, vx2) = (TransferMatrix::haar(m, 31), TransferMatrix::haar(m, 32));
        let eta = LossVector::new((0..m).map(|j| 0.4 + 0.2 * j as f64).collect()).unwrap();
        let inputs: Vec<_> = eta.as_slice().iter().map(|&e| InputStateSpec::new(ModeState::SinglePhoton, e)).collect();
        let x = LonEncoding::new(inputs.clone(), vx.clone()).unwrap();
        let x2 = LonEncoding::new(inputs, vx2.clone()).unwrap();
        let fock = oracle::lon_kernel(&x, &x2, m + 1).unwrap();
        let enumerated = exact_photonic_kernel(&vx, &vx2, &eta).unwrap();
        assert!((fock - enumerated).abs() < 1e-12, "m={m}: {fock} vs {enumerated}");
    }
}

#[test]
fn uniform_eta_sampler_estimates_the_kernel() {
    let m = 3;
    let (vx, vx2) = (TransferMatrix::haar(m, 41), TransferMatrix::haar(m, 42));
    let eta = LossVector::uniform(0.6, m).unwrap();
    let exact = exact_photonic_kernel(&vx, &vx2, &eta).unwrap();
    let r = lossy_photonic_kernel_eps(&vx, &vx2, &eta, 0.03, 0.01, PatternSampler::UniformEta, 9).unwrap();
    assert!((r.value - exact).abs() < 0.03, "{} vs {exact}", r.value);
}

#[test]
fn pattern_sum_recovers_unheralded_kernel() {
    let lambda: f64 = 0.3;
    let tms = prepare(&GaussianSpec::TwoModeSqueezed(lambda)).unwrap();
    let l2 = lambda * lambda;
    let p = |n: usize| (1.0 - l2) * l2.powi(n as i32);
    let keep = 3;
    let patterns: Vec<(Vec<usize>, Vec<usize>)> =
        (0..=keep).flat_map(|a| (0..=keep).map(move |b| (vec![a], vec![b]))).collect();
    let kept: f64 = (0..=keep).map(p).sum();
    let tail = 1.0 - kept * kept;
    let mut seed = 0;
    let r = pattern_sum_kernel(
        &patterns,
        |a: &[usize], b: &[usize]| -> qkpse::Result<EstimateReport> {
            seed += 1;
            let (r, _, _) = overlap_numerator(&tms, &tms, &[number_povm(a[0])], &[number_povm(b[0])], None, 0.002, 0.001, seed)?;
            Ok(r)
        },
        tail,
        None,
    )
    .unwrap();
    let exact = (1.0 - l2) / (1.0 + l2);
    assert!((r.value - exact).abs() <= r.epsilon, "{} vs {exact} (bound {})", r.value, r.epsilon);
    assert!(r.epsilon < 0.05);
}

#[test]
fn heralded_arm_matches_gaussian_oracle() {
    let lambda = 0.4;
    let d = 30;
    let tms = FockOperator::pure(2, d, &oracle::tms_vector(lambda, d).unwrap()).unwrap();
    for n in 0..4 {
        let heralded = oracle::herald(&tms, 0, n).unwrap();
        let (want, prob) = oracle::tms_heralded_state(lambda, n, d).unwrap();
        assert!((heralded.trace() - prob).abs() < 1e-12);
        assert!((oracle::exact_kernel(&heralded, &want).unwrap() - 1.0).abs() < 1e-10);
    }
}
