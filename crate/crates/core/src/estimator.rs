// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo overlap estimation.
//!
//! Tr[ρA] = π^n ∫ W^(t)_ρ W^(-t)_A d²ⁿμ is estimated by sampling μ from
//! |W^(t)_ρ|/N and averaging E(μ) = π^n N sgn(W^(t)_ρ(μ)) W^(-t)_A(μ).
//! Sample counts come from Hoeffding's inequality for the range of E.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{partial_overlap, partial_trace, s_max_nonneg, GaussianState};
use crate::numeric::extrema_2d;
use crate::oracle::FockOperator;
use crate::phase_space::{
    point_operator_diagonal, spqd_from_fock_operator, GaussianDensity, OrderingVector, PqdFunction,
};
use crate::sources::{eval_product, LonEncoding, OutputSampler};

/// Samples per shard. Shard boundaries do not depend on the thread count,
/// so results are reproducible for any pool size.
pub const SHARD_SIZE: u64 = 4096;

/// Outcome of one Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub value: f64,
    pub n_samples: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub range_bound: f64,
    pub seed: u64,
    pub wall_seconds: f64,
    /// Empirical standard error of the mean.
    pub std_error: f64,
}

/// ⌈R²/(2ε²) ln(2/δ)⌉.
pub fn hoeffding_samples(range_bound: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("ε = {epsilon}, δ = {delta} must lie in (0, 1)")));
    }
    if !(range_bound > 0.0) || !range_bound.is_finite() {
        return Err(Error::InvalidArgument(format!("range bound {range_bound} must be positive")));
    }
    let n = (range_bound * range_bound / (2.0 * epsilon * epsilon) * (2.0 / delta).ln()).ceil();
    if n > 2f64.powi(62) {
        return Err(Error::SampleOverflow);
    }
    Ok(n as u64)
}

/// Independent generator for shard `shard` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Mean and standard error of `n` draws of `f`, computed shard by shard and
/// folded in shard order.
pub fn sharded_mean<F>(n: u64, seed: u64, f: F) -> Result<(f64, f64)>
where
    F: Fn(&mut dyn RngCore) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("zero samples requested".into()));
    }
    let shards = n.div_ceil(SHARD_SIZE);
    let partial: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|sh| {
            let mut rng = shard_rng(seed, sh);
            let count = SHARD_SIZE.min(n - sh * SHARD_SIZE);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..count {
                let v = f(&mut rng)?;
                if !v.is_finite() {
                    return Err(Error::NonFiniteEstimate);
                }
                sum += v;
                sq += v * v;
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let (sum, sq) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean = sum / n as f64;
    let var = if n > 1 { ((sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0) } else { 0.0 };
    Ok((mean, (var / n as f64).sqrt()))
}

/// Sampling problem for Tr[ρA].
pub trait OverlapProblem: Sync {
    fn modes(&self) -> usize;
    /// N(W^(t)_ρ).
    fn neg_volume(&self) -> f64;
    /// Width of the interval containing every value of E(μ).
    fn range_bound(&self) -> f64;
    /// Extra constant multiplying E(μ).
    fn scale(&self) -> f64 {
        1.0
    }
    /// μ ~ |W^(t)_ρ|/N.
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>>;
    /// sgn W^(t)_ρ(μ).
    fn sign(&self, mu: &[Complex64]) -> Result<f64>;
    /// W^(-t)_A(μ).
    fn observable(&self, mu: &[Complex64]) -> Result<f64>;

    /// E(μ) for one fresh draw.
    fn draw(&self, rng: &mut dyn RngCore) -> Result<f64> {
        let mu = self.sample(rng)?;
        let v = PI.powi(self.modes() as i32) * self.neg_volume() * self.scale() * self.sign(&mu)? * self.observable(&mu)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEstimate)
        }
    }
}

/// Hoeffding-sized estimate of Tr[ρA].
pub fn mc_overlap(p: &dyn OverlapProblem, epsilon: f64, delta: f64, seed: u64) -> Result<EstimateReport> {
    let n = hoeffding_samples(p.range_bound(), epsilon, delta)?;
    let mut r = mc_overlap_fixed(p, n, seed)?;
    r.epsilon = epsilon;
    r.delta = delta;
    Ok(r)
}

/// Estimate with a caller-chosen sample count (no accuracy guarantee).
pub fn mc_overlap_fixed(p: &dyn OverlapProblem, n: u64, seed: u64) -> Result<EstimateReport> {
    let start = Instant::now();
    let (value, se) = sharded_mean(n, seed, |rng| p.draw(rng))?;
    Ok(EstimateReport {
        value,
        n_samples: n,
        epsilon: f64::NAN,
        delta: f64::NAN,
        range_bound: p.range_bound(),
        seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        std_error: se,
    })
}

/// Interval product [a₁,b₁]·[a₂,b₂]·…
fn interval_product(intervals: impl IntoIterator<Item = (f64, f64)>) -> (f64, f64) {
    intervals.into_iter().fold((1.0, 1.0), |(lo, hi), (a, b)| {
        let c = [lo * a, lo * b, hi * a, hi * b];
        (c.iter().cloned().fold(f64::INFINITY, f64::min), c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    })
}

/// Range width of π^n N sgn·a given the interval of a.
fn estimator_range(modes: usize, neg_volume: f64, scale: f64, a: (f64, f64)) -> f64 {
    let pref = PI.powi(modes as i32) * neg_volume * scale.abs();
    if neg_volume <= 1.0 {
        pref * (a.1 - a.0)
    } else {
        pref * 2.0 * a.1.max(-a.0)
    }
}

/// Tr[ρ(x)ρ(x')] for two network encodings with ρ(x) sampled at ordering s
/// and ρ(x') evaluated at ordering -s.
pub struct LonOverlap {
    rho: LonEncoding,
    a: LonEncoding,
    sampler: OutputSampler,
    a_pqds: Vec<PqdFunction>,
    neg_volume: f64,
    range: f64,
}

impl LonOverlap {
    pub fn new(rho: &LonEncoding, a: &LonEncoding, s: f64) -> Result<Self> {
        if rho.modes() != a.modes() {
            return Err(Error::DimensionMismatch("encodings differ in mode count".into()));
        }
        let rho_pqds = rho.mode_pqds(s)?;
        let a_pqds = a.mode_pqds(-s).map_err(|e| Error::OrderingInfeasible(format!("ordering {} for A: {e}", -s)))?;
        let neg_volume: f64 = rho_pqds.iter().map(|p| p.neg_volume()).product();
        let a_range = interval_product(a_pqds.iter().map(|p| p.range()));
        let range = estimator_range(rho.modes(), neg_volume, 1.0, a_range);
        Ok(Self { rho: rho.clone(), a: a.clone(), sampler: OutputSampler::new(rho, s)?, a_pqds, neg_volume, range })
    }
}

impl OverlapProblem for LonOverlap {
    fn modes(&self) -> usize {
        self.rho.modes()
    }
    fn neg_volume(&self) -> f64 {
        self.neg_volume
    }
    fn range_bound(&self) -> f64 {
        self.range
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>> {
        self.sampler.sample(rng)
    }
    fn sign(&self, mu: &[Complex64]) -> Result<f64> {
        if self.neg_volume <= 1.0 {
            return Ok(1.0);
        }
        self.sampler.sign_input_frame(&self.rho.to_input_frame(mu))
    }
    fn observable(&self, mu: &[Complex64]) -> Result<f64> {
        Ok(eval_product(&self.a_pqds, &self.a.to_input_frame(mu)))
    }
}

/// Tr[ρσ] for two Gaussian states, ρ at ordering s and σ at ordering -s.
pub struct GaussianOverlap {
    rho: GaussianDensity,
    a: GaussianDensity,
    range: f64,
}

impl GaussianOverlap {
    pub fn new(rho: &GaussianState, a: &GaussianState, s: f64) -> Result<Self> {
        if rho.modes() != a.modes() {
            return Err(Error::DimensionMismatch("states differ in mode count".into()));
        }
        let m = rho.modes();
        let rho_d = GaussianDensity::with_orderings(rho, &vec![s; m])
            .map_err(|e| Error::OrderingInfeasible(format!("ordering {s} for ρ: {e}")))?;
        let a_d = GaussianDensity::with_orderings(a, &vec![-s; m])
            .map_err(|e| Error::OrderingInfeasible(format!("ordering {} for A: {e}", -s)))?;
        let range = PI.powi(m as i32) * a_d.peak();
        Ok(Self { rho: rho_d, a: a_d, range })
    }
}

impl OverlapProblem for GaussianOverlap {
    fn modes(&self) -> usize {
        self.rho.modes()
    }
    fn neg_volume(&self) -> f64 {
        1.0
    }
    fn range_bound(&self) -> f64 {
        self.range
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>> {
        Ok(self.rho.sample(rng))
    }
    fn sign(&self, _mu: &[Complex64]) -> Result<f64> {
        Ok(1.0)
    }
    fn observable(&self, mu: &[Complex64]) -> Result<f64> {
        Ok(self.a.eval(mu))
    }
}

/// Data encodings accepted by Algorithm 1.
#[derive(Debug, Clone)]
pub enum Encoding {
    Lon(LonEncoding),
    Gaussian(GaussianState),
}

/// Algorithm 1: direct estimate of K(x, x') = Tr[ρ(x)ρ(x')].
pub fn algorithm1_kernel(
    ex: &Encoding,
    ex2: &Encoding,
    s: f64,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<EstimateReport> {
    match (ex, ex2) {
        (Encoding::Lon(a), Encoding::Lon(b)) => mc_overlap(&LonOverlap::new(a, b, s)?, epsilon, delta, seed),
        (Encoding::Gaussian(a), Encoding::Gaussian(b)) => {
            mc_overlap(&GaussianOverlap::new(a, b, s)?, epsilon, delta, seed)
        }
        _ => Err(Error::Unsupported("mixed encoding kinds".into())),
    }
}

/// W^(u) of a single-mode POVM element, with a fast path for operators
/// diagonal in the number basis.
#[derive(Debug, Clone)]
pub struct PovmPqd {
    u: f64,
    diagonal: Option<Vec<f64>>,
    op: FockOperator,
    range: (f64, f64),
}

impl PovmPqd {
    pub fn new(op: &FockOperator, u: f64) -> Result<Self> {
        if op.modes != 1 {
            return Err(Error::InvalidArgument("POVM elements must be single-mode".into()));
        }
        if u >= 1.0 {
            return Err(Error::SingularOrdering(u));
        }
        let d = op.cutoff;
        let off: f64 = (0..d).flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| op.matrix[(i, j)].norm()).sum();
        let diagonal = (off == 0.0).then(|| (0..d).map(|n| op.matrix[(n, n)].re).collect::<Vec<_>>());
        let mut p = Self { u, diagonal, op: op.clone(), range: (0.0, 0.0) };
        let radius = 3.0 * ((d as f64 + 4.0) * (1.0 - u)).sqrt();
        let radial = p.diagonal.is_some();
        let (lo, hi) = extrema_2d(|z| p.eval(z), radius, radial);
        let pad = 1e-9 * hi.abs().max(lo.abs()).max(1e-300);
        p.range = (lo.min(0.0) - pad, hi.max(0.0) + pad);
        Ok(p)
    }

    pub fn eval(&self, alpha: Complex64) -> f64 {
        match &self.diagonal {
            Some(w) => {
                let last = w.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1);
                let diag = point_operator_diagonal(self.u, alpha, last).expect("ordering checked");
                diag.iter().zip(w).map(|(a, b)| a * b).sum()
            }
            None => spqd_from_fock_operator(&self.op, &OrderingVector::new(vec![self.u]).expect("checked"), &[alpha])
                .map(|v| v.value)
                .unwrap_or(f64::NAN),
        }
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }
}

/// Tr[(⊗ⱼ Πⱼ) ρ] for a Gaussian ρ sampled at ordering t. Modes flagged in
/// `conjugate` evaluate their POVM at α* (used for transposed factors).
pub struct PovmOverlap {
    rho: GaussianDensity,
    povms: Vec<PovmPqd>,
    conjugate: Vec<bool>,
    scale: f64,
    range: f64,
}

impl PovmOverlap {
    pub fn new(rho: &GaussianState, povms: &[FockOperator], conjugate: Vec<bool>, t: f64, scale: f64) -> Result<Self> {
        if povms.len() != rho.modes() || conjugate.len() != rho.modes() {
            return Err(Error::DimensionMismatch(format!("{} POVM elements for {} modes", povms.len(), rho.modes())));
        }
        let dens = GaussianDensity::with_orderings(rho, &vec![t; rho.modes()])
            .map_err(|e| Error::OrderingInfeasible(format!("ordering {t}: {e}")))?;
        let povms: Vec<PovmPqd> = povms.iter().map(|p| PovmPqd::new(p, -t)).collect::<Result<_>>()?;
        let range = estimator_range(rho.modes(), 1.0, scale, interval_product(povms.iter().map(|p| p.range())));
        Ok(Self { rho: dens, povms, conjugate, scale, range })
    }
}

impl OverlapProblem for PovmOverlap {
    fn modes(&self) -> usize {
        self.povms.len()
    }
    fn neg_volume(&self) -> f64 {
        1.0
    }
    fn range_bound(&self) -> f64 {
        self.range
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>> {
        Ok(self.rho.sample(rng))
    }
    fn sign(&self, _mu: &[Complex64]) -> Result<f64> {
        Ok(1.0)
    }
    fn observable(&self, mu: &[Complex64]) -> Result<f64> {
        Ok(self
            .povms
            .iter()
            .zip(&self.conjugate)
            .zip(mu)
            .map(|((p, &c), &z)| p.eval(if c { z.conj() } else { z }))
            .product())
    }
}

/// Ratio a/(bc) with the error bound (3+ε)ε/(ε'²(ε'-ε)²) valid when each
/// of a, b, c is known to within ε and b, c ≥ ε'.
pub fn combine_ratio(a: f64, b: f64, c: f64, epsilon: f64, epsilon_prime: f64) -> Result<(f64, f64)> {
    if !(epsilon >= 0.0 && epsilon < epsilon_prime && epsilon_prime < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 ≤ ε < ε' < 1, got ε = {epsilon}, ε' = {epsilon_prime}")));
    }
    let floor = epsilon_prime - epsilon;
    if b <= floor || c <= floor {
        return Err(Error::GuardViolation(format!("denominator estimates {b:.4e}, {c:.4e} not above ε' - ε = {floor:.4e}")));
    }
    let bound = (3.0 + epsilon) * epsilon / (epsilon_prime.powi(2) * floor.powi(2));
    Ok((a / (b * c), bound))
}

/// Ordering choices for Algorithm 2; `None` picks the largest non-negative
/// ordering allowed by the relevant covariance, less a small margin.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Alg2Orderings {
    pub s: Option<f64>,
    pub s_prime: Option<f64>,
    pub t: Option<f64>,
}

/// Margin kept below λ_min when choosing orderings automatically.
pub const ORDERING_MARGIN: f64 = 1e-3;

/// Largest ordering ≤ 1 keeping a Gaussian's distribution non-negative.
pub fn auto_ordering(g: &GaussianState) -> f64 {
    s_max_nonneg(g).min(1.0) - ORDERING_MARGIN
}

fn resolve_ordering(choice: Option<f64>, g: &GaussianState) -> Result<f64> {
    let s = choice.unwrap_or_else(|| auto_ordering(g));
    if !(s > -1.0) || s >= s_max_nonneg(g) {
        return Err(Error::OrderingInfeasible(format!(
            "ordering {s} must lie in (-1, λ_min = {:.6})",
            s_max_nonneg(g)
        )));
    }
    Ok(s)
}

/// Full output of Algorithm 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Algorithm2Report {
    /// Kernel estimate; `epsilon` holds the a-posteriori error bound.
    pub kernel: EstimateReport,
    pub numerator: EstimateReport,
    pub denominator_x: EstimateReport,
    pub denominator_x2: EstimateReport,
    pub orderings: (f64, f64, f64),
    pub overlap_weight: f64,
    /// Bound from `combine_ratio` when its preconditions hold.
    pub ratio_bound: Option<f64>,
}

const PILOT_SAMPLES: u64 = 1000;

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // SplitMix64 step so that sub-runs use unrelated generators.
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Unnormalized overlap Tr[Tr_k((Π⊗I)ρ) Tr_k((Π'⊗I)ρ')] of two heralded
/// Gaussian states, with the first k modes measured.
#[allow(clippy::too_many_arguments)]
pub fn overlap_numerator(
    gx: &GaussianState,
    gx2: &GaussianState,
    povm_x: &[FockOperator],
    povm_x2: &[FockOperator],
    t: Option<f64>,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<(EstimateReport, f64, f64)> {
    let k = povm_x.len();
    if povm_x2.len() != k || gx.modes() != gx2.modes() || k >= gx.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} and {} POVM elements on {}- and {}-mode states",
            k,
            povm_x2.len(),
            gx.modes(),
            gx2.modes()
        )));
    }
    let ov = partial_overlap(gx, gx2, gx.modes() - k)?;
    let sigma = ov.state.expect("k ≥ 1 leaves modes");
    let t = resolve_ordering(t, &sigma)?;
    let ops: Vec<FockOperator> = povm_x.iter().chain(povm_x2).cloned().collect();
    let conj: Vec<bool> = (0..2 * k).map(|i| i < k).collect();
    let prob = PovmOverlap::new(&sigma, &ops, conj, t, ov.weight)?;
    Ok((mc_overlap(&prob, epsilon, delta, seed)?, t, ov.weight))
}

/// Algorithm 2: kernel of post-selected Gaussian encodings.
///
/// The first k = `povm_x.len()` modes of each state are measured with the
/// given single-mode POVM elements; the kernel of the normalized remaining
/// states is a/(bc). Sub-estimate accuracies are sized from a pilot run of
/// the denominators.
#[allow(clippy::too_many_arguments)]
pub fn algorithm2_kernel(
    gx: &GaussianState,
    gx2: &GaussianState,
    povm_x: &[FockOperator],
    povm_x2: &[FockOperator],
    orderings: Alg2Orderings,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Algorithm2Report> {
    let start = Instant::now();
    let k = povm_x.len();
    if povm_x2.len() != k {
        return Err(Error::DimensionMismatch("both encodings need the same number of measured modes".into()));
    }
    if gx.modes() != gx2.modes() || k >= gx.modes() {
        return Err(Error::DimensionMismatch(format!("{k} measured modes on {}-mode states", gx.modes())));
    }
    if k == 0 {
        let s = match orderings.s {
            Some(s) => s,
            None => auto_ordering(gx).min(auto_ordering(gx2)).max(0.0),
        };
        let r = algorithm1_kernel(&Encoding::Gaussian(gx.clone()), &Encoding::Gaussian(gx2.clone()), s, epsilon, delta, seed)?;
        return Ok(Algorithm2Report {
            kernel: r.clone(),
            numerator: r.clone(),
            denominator_x: unit_report(seed),
            denominator_x2: unit_report(seed),
            orderings: (s, s, s),
            overlap_weight: 1.0,
            ratio_bound: None,
        });
    }
    let measured: Vec<usize> = (0..k).collect();
    let red_x = partial_trace(gx, &measured)?;
    let red_x2 = partial_trace(gx2, &measured)?;
    let s = resolve_ordering(orderings.s, &red_x)?;
    let s2 = resolve_ordering(orderings.s_prime, &red_x2)?;
    let prob_b = PovmOverlap::new(&red_x, povm_x, vec![false; k], s, 1.0)?;
    let prob_c = PovmOverlap::new(&red_x2, povm_x2, vec![false; k], s2, 1.0)?;

    let pilot_b = mc_overlap_fixed(&prob_b, PILOT_SAMPLES, derive_seed(seed, 1))?;
    let pilot_c = mc_overlap_fixed(&prob_c, PILOT_SAMPLES, derive_seed(seed, 2))?;
    let b_lo = pilot_b.value - 3.0 * pilot_b.std_error;
    let c_lo = pilot_c.value - 3.0 * pilot_c.std_error;
    if b_lo <= 0.0 || c_lo <= 0.0 {
        return Err(Error::GuardViolation(format!(
            "pilot denominators {:.3e} ± {:.1e}, {:.3e} ± {:.1e} are not resolved from zero",
            pilot_b.value, pilot_b.std_error, pilot_c.value, pilot_c.std_error
        )));
    }
    let eps_b = (epsilon * b_lo / 3.3).min(0.5);
    let eps_c = (epsilon * c_lo / 3.3).min(0.5);
    let eps_a = (epsilon * b_lo * c_lo / 3.0).min(0.5);
    let delta_sub = delta / 3.0;

    let b = mc_overlap(&prob_b, eps_b, delta_sub, derive_seed(seed, 3))?;
    let c = mc_overlap(&prob_c, eps_c, delta_sub, derive_seed(seed, 4))?;
    if b.value <= 2.0 * eps_b || c.value <= 2.0 * eps_c {
        return Err(Error::GuardViolation(format!(
            "denominator estimates {:.4e}, {:.4e} fall below twice their tolerances",
            b.value, c.value
        )));
    }
    let (a, t, weight) = overlap_numerator(gx, gx2, povm_x, povm_x2, orderings.t, eps_a, delta_sub, derive_seed(seed, 5))?;

    let value = a.value / (b.value * c.value);
    let bound = eps_a / (b.value * c.value) + eps_b / b.value + eps_c * (1.0 + eps_b / b.value) / c.value;
    let eps_max = eps_a.max(eps_b).max(eps_c);
    let ratio_bound = combine_ratio(a.value, b.value, c.value, eps_max, b.value.min(c.value).min(0.999))
        .ok()
        .map(|(_, bnd)| bnd);
    let kernel = EstimateReport {
        value,
        n_samples: a.n_samples + b.n_samples + c.n_samples + 2 * PILOT_SAMPLES,
        epsilon: bound,
        delta,
        range_bound: a.range_bound,
        seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        std_error: value
            * ((a.std_error / a.value).powi(2) + (b.std_error / b.value).powi(2) + (c.std_error / c.value).powi(2)).sqrt(),
    };
    Ok(Algorithm2Report {
        kernel,
        numerator: a,
        denominator_x: b,
        denominator_x2: c,
        orderings: (s, s2, t),
        overlap_weight: weight,
        ratio_bound,
    })
}

fn unit_report(seed: u64) -> EstimateReport {
    EstimateReport { value: 1.0, n_samples: 0, epsilon: 0.0, delta: 0.0, range_bound: 0.0, seed, wall_seconds: 0.0, std_error: 0.0 }
}

/// Photon-number pattern pair (p, p') for the measured modes.
pub type PatternPair = (Vec<usize>, Vec<usize>);

/// Sum of per-pattern sub-kernel estimates over a finite set of likely
/// patterns. The error bound is the sum of the sub-estimate tolerances plus
/// `tail_bound`, the probability mass of the omitted patterns.
pub fn pattern_sum_kernel<F>(
    patterns: &[PatternPair],
    mut subkernel: F,
    tail_bound: f64,
    epsilon_budget: Option<f64>,
) -> Result<EstimateReport>
where
    F: FnMut(&[usize], &[usize]) -> Result<EstimateReport>,
{
    if !(0.0..=1.0).contains(&tail_bound) {
        return Err(Error::InvalidArgument(format!("tail bound {tail_bound} outside [0, 1]")));
    }
    let start = Instant::now();
    let mut total = EstimateReport {
        value: 0.0,
        n_samples: 0,
        epsilon: tail_bound,
        delta: 0.0,
        range_bound: 0.0,
        seed: 0,
        wall_seconds: 0.0,
        std_error: 0.0,
    };
    let mut var = 0.0;
    for (i, (p, q)) in patterns.iter().enumerate() {
        let r = subkernel(p, q)?;
        if i == 0 {
            total.seed = r.seed;
        }
        total.value += r.value;
        total.n_samples += r.n_samples;
        total.epsilon += r.epsilon;
        total.delta += r.delta;
        total.range_bound = total.range_bound.max(r.range_bound);
        var += r.std_error * r.std_error;
    }
    total.std_error = var.sqrt();
    if let Some(budget) = epsilon_budget {
        if total.epsilon - tail_bound > budget {
            return Err(Error::BudgetExceeded(format!(
                "per-pattern tolerances sum to {:.4e} > {budget:.4e}",
                total.epsilon - tail_bound
            )));
        }
    }
    total.wall_seconds = start.elapsed().as_secs_f64();
    Ok(total)
}

/// Number-basis projector |n⟩⟨n| at a cutoff large enough for its PQD.
pub fn number_povm(n: usize) -> FockOperator {
    FockOperator::number_projector(n, n + 8).expect("cutoff exceeds n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{prepare, GaussianSpec, TransferMatrix};
    use crate::sources::{InputStateSpec, ModeState};
    use approx::assert_relative_eq;

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_samples(1.0, 0.02, 0.05).unwrap(), 4612);
        let base = 1250.0 * 40f64.ln();
        assert_eq!(hoeffding_samples(2.0, 0.02, 0.05).unwrap(), (4.0 * base).ceil() as u64);
        assert_eq!(hoeffding_samples(1.0, 0.01, 0.05).unwrap(), (4.0 * base).ceil() as u64);
        assert!(matches!(hoeffding_samples(1e12, 1e-6, 0.05), Err(Error::SampleOverflow)));
        assert!(hoeffding_samples(1.0, 0.0, 0.05).is_err());
        assert!(hoeffding_samples(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn sharded_mean_is_independent_of_thread_count() {
        let f = |rng: &mut dyn RngCore| Ok((rng.next_u32() as f64) / u32::MAX as f64);
        let a = sharded_mean(20_000, 7, f).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sharded_mean(20_000, 7, f).unwrap());
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }

    #[test]
    fn vacuum_purity() {
        let v = GaussianState::vacuum(1);
        let r = mc_overlap(&GaussianOverlap::new(&v, &v, 0.0).unwrap(), 0.05, 0.05, 1).unwrap();
        assert!((r.value - 1.0).abs() < 0.05);
        let lv = LonEncoding::new(vec![InputStateSpec::new(ModeState::Vacuum, 1.0)], TransferMatrix::identity(1)).unwrap();
        let r = mc_overlap(&LonOverlap::new(&lv, &lv, 0.0).unwrap(), 0.05, 0.05, 1).unwrap();
        assert!((r.value - 1.0).abs() < 0.05);
    }

    #[test]
    fn lossy_photon_purity() {
        let e = LonEncoding::new(vec![InputStateSpec::new(ModeState::SinglePhoton, 0.5)], TransferMatrix::identity(1)).unwrap();
        let r = mc_overlap(&LonOverlap::new(&e, &e, 0.0).unwrap(), 0.02, 0.05, 3).unwrap();
        assert!((r.value - 0.5).abs() < 0.02, "{}", r.value);
        // With negativity in the sampled distribution.
        let e = LonEncoding::new(vec![InputStateSpec::new(ModeState::SinglePhoton, 0.9)], TransferMatrix::identity(1)).unwrap();
        let p = LonOverlap::new(&e, &e, 0.4).unwrap();
        assert!(p.neg_volume() > 1.0);
        let r = mc_overlap(&p, 0.02, 0.05, 4).unwrap();
        assert!((r.value - 0.82).abs() < 0.02, "{}", r.value);
    }

    #[test]
    fn coherent_kernel_via_gaussian_path() {
        let (a, b) = (Complex64::new(0.3, 0.2), Complex64::new(-0.2, 0.5));
        let ga = prepare(&GaussianSpec::Coherent(vec![a])).unwrap();
        let gb = prepare(&GaussianSpec::Coherent(vec![b])).unwrap();
        let r = algorithm1_kernel(&Encoding::Gaussian(ga), &Encoding::Gaussian(gb), 0.5, 0.02, 0.05, 5).unwrap();
        assert!((r.value - (-(a - b).norm_sqr()).exp()).abs() < 0.02);
    }

    #[test]
    fn infeasible_ordering_is_reported() {
        let sq = prepare(&GaussianSpec::Squeezed { r: vec![0.8], phases: vec![0.0] }).unwrap();
        let v = GaussianState::vacuum(1);
        let r = algorithm1_kernel(&Encoding::Gaussian(sq), &Encoding::Gaussian(v), 0.5, 0.05, 0.05, 1);
        assert!(matches!(r, Err(Error::OrderingInfeasible(_))));
    }

    #[test]
    fn determinism() {
        let e = LonEncoding::new(vec![InputStateSpec::new(ModeState::SinglePhoton, 0.7); 2], TransferMatrix::haar(2, 9)).unwrap();
        let f = LonEncoding::new(vec![InputStateSpec::new(ModeState::SinglePhoton, 0.7); 2], TransferMatrix::haar(2, 10)).unwrap();
        let a = algorithm1_kernel(&Encoding::Lon(e.clone()), &Encoding::Lon(f.clone()), 0.1, 0.05, 0.05, 42).unwrap();
        let b = algorithm1_kernel(&Encoding::Lon(e), &Encoding::Lon(f), 0.1, 0.05, 0.05, 42).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn combine_ratio_examples() {
        let (v, b) = combine_ratio(1.0, 1.0, 1.0, 0.01, 0.5).unwrap();
        assert_eq!(v, 1.0);
        assert_relative_eq!(b, 3.01 * 0.01 / (0.25 * 0.49 * 0.49), epsilon = 1e-12);
        assert_relative_eq!(b, 0.5014, epsilon = 1e-4);
        assert_eq!(combine_ratio(0.3, 0.6, 0.7, 0.0, 0.5).unwrap().1, 0.0);
        assert!(matches!(combine_ratio(1.0, 0.49, 1.0, 0.01, 0.5), Err(Error::GuardViolation(_))));
    }

    #[test]
    fn povm_pqd_matches_photon_formula() {
        use crate::phase_space::spqd_lossy_single_photon;
        let p = PovmPqd::new(&number_povm(1), -0.4).unwrap();
        let z = Complex64::new(0.3, 0.5);
        assert_relative_eq!(p.eval(z), spqd_lossy_single_photon(1.0, -0.4, z).unwrap(), epsilon = 1e-14);
        let (lo, hi) = p.range();
        assert!(lo < 0.0 && hi > 0.0);
    }

    #[test]
    fn pattern_sum_examples() {
        let empty = pattern_sum_kernel(&[], |_, _| unreachable!(), 0.01, None).unwrap();
        assert_eq!(empty.value, 0.0);
        assert_eq!(empty.epsilon, 0.01);
        let one = pattern_sum_kernel(&[(vec![0], vec![0])], |_, _| Ok(unit_report(3)), 0.0, Some(0.1)).unwrap();
        assert_eq!(one.value, 1.0);
        let mut r = unit_report(3);
        r.epsilon = 0.2;
        assert!(matches!(
            pattern_sum_kernel(&[(vec![0], vec![0])], |_, _| Ok(r.clone()), 0.0, Some(0.1)),
            Err(Error::BudgetExceeded(_))
        ));
    }
}
