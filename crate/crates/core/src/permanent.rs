// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Permanents and the randomized kernel estimator for lossy single-photon
//! inputs.
//!
//! For inputs ⊗ⱼ((1-ηⱼ)|0⟩⟨0| + ηⱼ|1⟩⟨1|) the kernel is
//! Σ_{p,q} f(p) f(q) |Per V_{p,q}|², with V = V(x)†V(x') restricted to the
//! occupied rows p and columns q. Each term is estimated by one Glynn sample
//! of Per(V_n ⊕ V_n*) = |Per V_n|².

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimator::{hoeffding_samples, sharded_mean, EstimateReport};
use crate::gaussian::{LossVector, TransferMatrix};
use crate::numeric::{binomial, operator_norm};

/// Exact permanent by Ryser's formula with Gray-code subset updates.
pub fn ryser(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent of a non-square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    assert!(n < 31, "Ryser is exponential; n = {n} is out of reach");
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1..(1u64 << n) {
        let next = k ^ (k >> 1);
        let j = (next ^ gray).trailing_zeros() as usize;
        let add = next & (1 << j) != 0;
        for (i, rs) in row_sums.iter_mut().enumerate() {
            if add {
                *rs += a[(i, j)];
            } else {
                *rs -= a[(i, j)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        let sign = if (n - next.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += prod * sign;
    }
    total
}

/// One Glynn sample Re[Πᵢ yᵢ · Πᵢ (W y)ᵢ] for uniform y ∈ {±1}ⁿ.
pub fn glynn_sample(w: &DMatrix<Complex64>, rng: &mut dyn RngCore) -> f64 {
    let n = w.nrows();
    let y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let sign: f64 = y.iter().product();
    let mut prod = Complex64::new(sign, 0.0);
    for i in 0..n {
        let row: Complex64 = (0..n).map(|j| w[(i, j)] * y[j]).sum();
        prod *= row;
    }
    prod.re
}

/// Mean of `n` Glynn samples with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct GlynnEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Unbiased randomized estimate of Per(W) for ‖W‖ ≤ 1.
pub fn glynn_estimate(w: &DMatrix<Complex64>, n: u64, seed: u64) -> Result<GlynnEstimate> {
    if w.nrows() != w.ncols() || w.nrows() == 0 {
        return Err(Error::DimensionMismatch("Glynn estimator needs a non-empty square matrix".into()));
    }
    let norm = operator_norm(w);
    if norm > 1.0 + 1e-8 {
        return Err(Error::NormViolation(norm));
    }
    let (value, std_error) = sharded_mean(n, seed, |rng| Ok(glynn_sample(w, rng)))?;
    Ok(GlynnEstimate { value, std_error, samples: n })
}

/// Occupation patterns of the two inputs after loss.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LossPattern {
    pub p: Vec<u8>,
    pub q: Vec<u8>,
}

impl LossPattern {
    pub fn weights(&self) -> (usize, usize) {
        (
            self.p.iter().map(|&v| v as usize).sum(),
            self.q.iter().map(|&v| v as usize).sum(),
        )
    }

    pub fn is_matched(&self) -> bool {
        let (a, b) = self.weights();
        a == b
    }
}

/// Independent patterns with Pr[photon survives in mode j] = ηⱼ.
pub fn sample_loss_pattern(eta: &LossVector, rng: &mut dyn RngCore) -> LossPattern {
    let mut draw = || eta.as_slice().iter().map(|&e| u8::from(rng.random::<f64>() < e)).collect::<Vec<u8>>();
    let p = draw();
    let q = draw();
    LossPattern { p, q }
}

/// Probability θ = Σₙ C(m,n)² η²ⁿ (1-η)^{2(m-n)} that two uniform-loss
/// patterns have equal weight.
pub fn match_probability(m: usize, eta: f64) -> f64 {
    (0..=m).map(|n| weight_term(m, n, eta)).sum()
}

fn weight_term(m: usize, n: usize, eta: f64) -> f64 {
    binomial(m, n).powi(2) * eta.powi(2 * n as i32) * (1.0 - eta).powi(2 * (m - n) as i32)
}

/// Uniform subset of size n of m positions by sequential selection.
fn fixed_weight_pattern(m: usize, n: usize, rng: &mut dyn RngCore) -> Vec<u8> {
    let mut need = n;
    (0..m)
        .map(|j| {
            let left = m - j;
            let take = need > 0 && rng.random::<f64>() * (left as f64) < need as f64;
            if take {
                need -= 1;
            }
            u8::from(take)
        })
        .collect()
}

/// Two-stage sampler for uniform loss. Halts (returns `None`) with
/// probability 1 - θ; otherwise draws the shared weight n with probability
/// ∝ C(m,n)² η²ⁿ (1-η)^{2(m-n)} and two independent uniform patterns of
/// that weight.
pub fn sample_uniform_eta(m: usize, eta: f64, rng: &mut dyn RngCore) -> Result<Option<LossPattern>> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("transmissivity {eta} outside [0, 1]")));
    }
    let theta = match_probability(m, eta);
    if rng.random::<f64>() >= theta {
        return Ok(None);
    }
    let mut u = rng.random::<f64>() * theta;
    let mut n = m;
    for k in 0..=m {
        let w = weight_term(m, k, eta);
        if u < w {
            n = k;
            break;
        }
        u -= w;
    }
    let p = fixed_weight_pattern(m, n, rng);
    let q = fixed_weight_pattern(m, n, rng);
    Ok(Some(LossPattern { p, q }))
}

/// W = V_n ⊕ V_n* where V_n keeps rows with pⱼ = 1 and columns with qⱼ = 1.
pub fn reduced_matrix(v: &TransferMatrix, lp: &LossPattern) -> Result<DMatrix<Complex64>> {
    if !lp.is_matched() {
        return Err(Error::PatternMismatch);
    }
    if lp.p.len() != v.dim() || lp.q.len() != v.dim() {
        return Err(Error::DimensionMismatch("pattern length differs from network size".into()));
    }
    let rows: Vec<usize> = lp.p.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i).collect();
    let cols: Vec<usize> = lp.q.iter().enumerate().filter(|(_, &b)| b == 1).map(|(i, _)| i).collect();
    let n = rows.len();
    let vm = v.matrix();
    let mut w = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in cols.iter().enumerate() {
            w[(i, j)] = vm[(r, c)];
            w[(n + i, n + j)] = vm[(r, c)].conj();
        }
    }
    Ok(w)
}

/// Pattern law used by the kernel estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternSampler {
    /// Independent Bernoulli draws per mode.
    Direct,
    /// θ-gated fixed-weight draws; requires uniform η.
    UniformEta,
}

/// One bounded repeat: draw (p, q), output 0 on a weight mismatch, else one
/// Glynn sample of Per(V_n ⊕ V_n*). The value lies in [-1, 1].
pub fn kernel_repeat(v: &TransferMatrix, eta: &LossVector, sampler: PatternSampler, rng: &mut dyn RngCore) -> Result<f64> {
    let lp = match sampler {
        PatternSampler::Direct => sample_loss_pattern(eta, rng),
        PatternSampler::UniformEta => match sample_uniform_eta(eta.len(), eta.as_slice()[0], rng)? {
            Some(lp) => lp,
            None => return Ok(0.0),
        },
    };
    if !lp.is_matched() {
        return Ok(0.0);
    }
    let w = reduced_matrix(v, &lp)?;
    if w.nrows() == 0 {
        return Ok(1.0);
    }
    let val = glynn_sample(&w, rng);
    debug_assert!(val.abs() <= 1.0 + 1e-9, "repeat value {val} escapes [-1, 1]");
    Ok(val)
}

/// Kernel of lossy single-photon encodings through networks V(x), V(x'),
/// averaged over `repeats` bounded repeats.
pub fn lossy_photonic_kernel(
    vx: &TransferMatrix,
    vx2: &TransferMatrix,
    eta: &LossVector,
    repeats: u64,
    sampler: PatternSampler,
    seed: u64,
) -> Result<EstimateReport> {
    let start = Instant::now();
    if vx.dim() != vx2.dim() || eta.len() != vx.dim() {
        return Err(Error::DimensionMismatch("networks and loss vector differ in size".into()));
    }
    if sampler == PatternSampler::UniformEta && eta.as_slice().iter().any(|&e| e != eta.as_slice()[0]) {
        return Err(Error::InvalidArgument("uniform-η sampler needs equal transmissivities".into()));
    }
    let v = vx.adjoint().compose(vx2)?;
    if !v.is_unitary() {
        return Err(Error::NonUnitary(v.unitarity_defect()));
    }
    let (value, std_error) = sharded_mean(repeats, seed, |rng| {
        let val = kernel_repeat(&v, eta, sampler, rng)?;
        if val.abs() > 1.0 + 1e-9 {
            return Err(Error::GuardViolation(format!("repeat value {val} outside [-1, 1]")));
        }
        Ok(val)
    })?;
    Ok(EstimateReport {
        value,
        n_samples: repeats,
        epsilon: f64::NAN,
        delta: f64::NAN,
        range_bound: 2.0,
        seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        std_error,
    })
}

/// Repeats needed for an (ε, δ) guarantee: each repeat lies in [-1, 1].
pub fn gurvits_repeats(epsilon: f64, delta: f64) -> Result<u64> {
    hoeffding_samples(2.0, epsilon, delta)
}

/// `lossy_photonic_kernel` sized by Hoeffding for accuracy ε with
/// confidence 1 - δ.
pub fn lossy_photonic_kernel_eps(
    vx: &TransferMatrix,
    vx2: &TransferMatrix,
    eta: &LossVector,
    epsilon: f64,
    delta: f64,
    sampler: PatternSampler,
    seed: u64,
) -> Result<EstimateReport> {
    let mut r = lossy_photonic_kernel(vx, vx2, eta, gurvits_repeats(epsilon, delta)?, sampler, seed)?;
    r.epsilon = epsilon;
    r.delta = delta;
    Ok(r)
}

/// Exact kernel by enumerating all pattern pairs (small m only).
pub fn exact_photonic_kernel(vx: &TransferMatrix, vx2: &TransferMatrix, eta: &LossVector) -> Result<f64> {
    let m = vx.dim();
    if m > 12 {
        return Err(Error::Unsupported("exact enumeration beyond 12 modes".into()));
    }
    let v = vx.adjoint().compose(vx2)?;
    let e = eta.as_slice();
    let prob = |mask: u32| -> f64 {
        (0..m).map(|j| if mask >> j & 1 == 1 { e[j] } else { 1.0 - e[j] }).product()
    };
    let bits = |mask: u32| -> Vec<u8> { (0..m).map(|j| (mask >> j & 1) as u8).collect() };
    let mut k = 0.0;
    for pm in 0..(1u32 << m) {
        for qm in 0..(1u32 << m) {
            if pm.count_ones() != qm.count_ones() {
                continue;
            }
            let lp = LossPattern { p: bits(pm), q: bits(qm) };
            k += prob(pm) * prob(qm) * ryser(&reduced_matrix(&v, &lp)?).re;
        }
    }
    Ok(k)
}

/// Seeded convenience wrapper around `sample_loss_pattern`.
pub fn sample_loss_pattern_seeded(eta: &LossVector, seed: u64) -> LossPattern {
    sample_loss_pattern(eta, &mut ChaCha8Rng::seed_from_u64(seed))
}
