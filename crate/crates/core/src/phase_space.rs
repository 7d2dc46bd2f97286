// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! s-ordered quasi-probability distributions.
//!
//! Phase-space points are complex amplitudes α, one per mode. Densities are
//! taken with respect to d²α = d(Re α) d(Im α), so the vacuum Wigner function
//! is (2/π) e^{-2|α|²}. Gaussian states use real coordinates
//! r = (2 Re α, 2 Im α) with the vacuum covariance equal to the identity.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::numeric::{extrema_2d, ln_factorial, min_eigenvalue, polar_integral};
use crate::oracle::FockOperator;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Diagonal ordering parameters, one per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingVector(Vec<f64>);

impl OrderingVector {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("ordering vector is empty".into()));
        }
        for &v in &s {
            if !v.is_finite() {
                return Err(Error::NonFinite("ordering parameter"));
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::OrderingOutOfRange(v));
            }
        }
        Ok(Self(s))
    }

    pub fn uniform(s: f64, modes: usize) -> Result<Self> {
        Self::new(vec![s; modes])
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

fn check_ordering(s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::NonFinite("ordering parameter"));
    }
    if s >= 1.0 {
        return Err(Error::SingularOrdering(s));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!("transmissivity {eta} outside [0, 1]")));
    }
    Ok(())
}

/// Truncated matrix of the point operator Δ^(s)(α).
#[derive(Debug, Clone)]
pub struct PointOperator {
    pub s: f64,
    pub center: Complex64,
    pub cutoff: usize,
    pub matrix: DMatrix<Complex64>,
}

/// Fock matrix of Δ^(s)(α) from the closed-form normally ordered expansion.
///
/// For m ≥ n the element ⟨m|πΔ|n⟩ is
/// κ e^{-κ|α|²} c^n (κα)^{m-n} √(n!/m!) L_n^{(m-n)}(4|α|²/(1-s²))
/// with κ = 2/(1-s) and c = (s+1)/(s-1).
pub fn single_mode_point_operator(s: f64, alpha: Complex64, cutoff: usize) -> Result<PointOperator> {
    check_ordering(s)?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite("phase-space point"));
    }
    if cutoff < 2 {
        return Err(Error::InvalidArgument("cutoff must be at least 2".into()));
    }
    let kappa = 2.0 / (1.0 - s);
    let x = alpha.norm_sqr();
    let pref = kappa * (-kappa * x).exp() / PI;
    let mut mat = DMatrix::from_element(cutoff, cutoff, C0);
    if s < -0.9 {
        // Direct sum: c is small, so the alternating terms barely cancel.
        let c = (s + 1.0) / (s - 1.0);
        let kx = kappa * kappa * x;
        for n in 0..cutoff {
            for m in n..cutoff {
                let mut sum = 0.0;
                for j in 0..=n {
                    let lnterm = ln_factorial(m) - ln_factorial(n - j) - ln_factorial(m - n + j)
                        - ln_factorial(j);
                    let cpow = if n == j { 1.0 } else { c.powi((n - j) as i32) };
                    let xpow = if j == 0 { 1.0 } else { kx.powi(j as i32) };
                    sum += lnterm.exp() * xpow * cpow;
                }
                let shift = (kappa * alpha).powu((m - n) as u32)
                    * (0.5 * (ln_factorial(n) - ln_factorial(m))).exp();
                let v = shift * (pref * sum);
                mat[(m, n)] = v;
                mat[(n, m)] = v.conj();
            }
        }
    } else {
        let c = (s + 1.0) / (s - 1.0);
        let y = 4.0 * x / ((1.0 - s) * (1.0 + s));
        for k in 0..cutoff {
            // L_n^{(k)}(y) for n = 0.. by the three-term recurrence.
            let kf = k as f64;
            let (mut l_prev, mut l_cur) = (0.0, 1.0);
            let mut shift = Complex64::new(pref, 0.0);
            for i in 1..=k {
                shift *= kappa * alpha / (i as f64).sqrt();
            }
            let mut cn = 1.0;
            for n in 0..cutoff - k {
                let m = n + k;
                let v = shift * (cn * l_cur);
                mat[(m, n)] = v;
                mat[(n, m)] = v.conj();
                let nf = n as f64;
                let l_next = ((2.0 * nf + 1.0 + kf - y) * l_cur - (nf + kf) * l_prev) / (nf + 1.0);
                l_prev = l_cur;
                l_cur = l_next;
                cn *= c;
                // √(n!/m!) at fixed m - n = k picks up √((n+1)/(m+1)).
                shift *= ((n + 1) as f64 / (m + 1) as f64).sqrt();
            }
        }
    }
    Ok(PointOperator { s, center: alpha, cutoff, matrix: mat })
}

/// Diagonal elements ⟨n|Δ^(s)(α)|n⟩ for n < len, by the Laguerre recurrence.
pub fn point_operator_diagonal(s: f64, alpha: Complex64, len: usize) -> Result<Vec<f64>> {
    check_ordering(s)?;
    let kappa = 2.0 / (1.0 - s);
    let x = alpha.norm_sqr();
    let pref = kappa * (-kappa * x).exp() / PI;
    let mut out = Vec::with_capacity(len);
    if s < -0.9 {
        // c is small: expand c^n L_n(y) = Σⱼ C(n, j) (-κ²x)^j... directly.
        let c = (s + 1.0) / (s - 1.0);
        let kx = kappa * kappa * x;
        for n in 0..len {
            let mut sum = 0.0;
            for j in 0..=n {
                let ln = ln_factorial(n) - ln_factorial(n - j) - 2.0 * ln_factorial(j);
                let cpow = if n == j { 1.0 } else { c.powi((n - j) as i32) };
                sum += ln.exp() * kx.powi(j as i32) * cpow;
            }
            out.push(pref * sum);
        }
        return Ok(out);
    }
    let c = (s + 1.0) / (s - 1.0);
    let y = 4.0 * x / ((1.0 - s) * (1.0 + s));
    let (mut l_prev, mut l_cur) = (0.0, 1.0);
    let mut cn = 1.0;
    for n in 0..len {
        out.push(pref * cn * l_cur);
        let nf = n as f64;
        let l_next = ((2.0 * nf + 1.0 - y) * l_cur - nf * l_prev) / (nf + 1.0);
        l_prev = l_cur;
        l_cur = l_next;
        cn *= c;
    }
    Ok(out)
}

/// Truncated displacement-operator matrix ⟨m|D(α)|n⟩, m < rows, n < cols.
pub fn displacement_matrix(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::from_element(rows, cols, C0);
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    let minus = -alpha.conj();
    // First column: coherent state. First row: ⟨0|D(α)|n⟩ = e^{-|α|²/2}(-α*)ⁿ/√n!.
    for m in 0..rows {
        d[(m, 0)] = amp;
        amp *= alpha / ((m + 1) as f64).sqrt();
    }
    let mut amp = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cols {
        d[(0, n)] = amp;
        amp *= minus / ((n + 1) as f64).sqrt();
    }
    for m in 0..rows - 1 {
        for n in 1..cols {
            d[(m + 1, n)] = (d[(m, n - 1)] * (n as f64).sqrt() + alpha * d[(m, n)]) / ((m + 1) as f64).sqrt();
        }
    }
    d
}

/// Δ^(s)(α) assembled from its eigen-decomposition
/// (2/(π(1+t))) Σₙ ((t-1)/(t+1))ⁿ D|n⟩⟨n|D†, t = -s, truncated to `inner`
/// displaced number states. Used as an independent check of the closed form.
pub fn point_operator_spectral(s: f64, alpha: Complex64, cutoff: usize, inner: usize) -> Result<PointOperator> {
    check_ordering(s)?;
    let t = -s;
    let ratio = (t - 1.0) / (t + 1.0);
    let d = displacement_matrix(alpha, cutoff, inner);
    let weights = DVector::from_fn(inner, |n, _| Complex64::new(2.0 / (PI * (1.0 + t)) * ratio.powi(n as i32), 0.0));
    let matrix = &d * DMatrix::from_diagonal(&weights) * d.adjoint();
    Ok(PointOperator { s, center: alpha, cutoff, matrix })
}

/// Result of evaluating a PQD through the Fock oracle.
#[derive(Debug, Clone, Copy)]
pub struct PqdValue {
    pub value: f64,
    /// Set when the operator's population at the truncation edge plus its
    /// recorded trace deficit exceeds 1e-8.
    pub truncated: bool,
}

/// Tr[op ⊗ⱼ Δ^(sⱼ)(αⱼ)] on the truncated space.
pub fn spqd_from_fock_operator(op: &FockOperator, s: &OrderingVector, alpha: &[Complex64]) -> Result<PqdValue> {
    if s.modes() != op.modes || alpha.len() != op.modes {
        return Err(Error::DimensionMismatch(format!(
            "operator has {} modes, ordering {} and point {}",
            op.modes,
            s.modes(),
            alpha.len()
        )));
    }
    let d = op.cutoff;
    let deltas: Vec<DMatrix<Complex64>> = s
        .as_slice()
        .iter()
        .zip(alpha)
        .map(|(&sj, &aj)| single_mode_point_operator(sj, aj, d).map(|p| p.matrix))
        .collect::<Result<_>>()?;
    let dim = op.dim();
    let occ: Vec<Vec<usize>> = (0..dim).map(|i| op.occupations(i)).collect();
    let mut acc = C0;
    for a in 0..dim {
        for b in 0..dim {
            let rho = op.matrix[(a, b)];
            if rho == C0 {
                continue;
            }
            let mut w = Complex64::new(1.0, 0.0);
            for (j, dj) in deltas.iter().enumerate() {
                w *= dj[(occ[b][j], occ[a][j])];
            }
            acc += rho * w;
        }
    }
    let tail = op.edge_mass() + op.trace_deficit;
    Ok(PqdValue { value: acc.re, truncated: tail > 1e-8 })
}

/// W^(s) of the single photon sent through a loss channel of transmissivity η.
pub fn spqd_lossy_single_photon(eta: f64, s: f64, alpha: Complex64) -> Result<f64> {
    check_ordering(s)?;
    check_eta(eta)?;
    let x = alpha.norm_sqr();
    let u = 1.0 - s;
    Ok((2.0 * u * (u - 2.0 * eta) + 8.0 * eta * x) * (-2.0 * x / u).exp() / (PI * u.powi(3)))
}

/// Negative volume ∫|W^(s)| d²α of the lossy single photon.
pub fn negvol_lossy_single_photon(eta: f64, s: f64) -> Result<f64> {
    check_ordering(s)?;
    check_eta(eta)?;
    if s <= 1.0 - 2.0 * eta {
        return Ok(1.0);
    }
    Ok(4.0 * eta / (1.0 - s) * ((1.0 - s - 2.0 * eta) / (2.0 * eta)).exp() - 1.0)
}

/// Stationary values of the lossy single-photon distribution at ordering -s.
#[derive(Debug, Clone, Copy)]
pub struct SinglePhotonExtrema {
    /// W^(-s)(0).
    pub at_origin: f64,
    /// W^(-s) on the ring |α|² = `ring_radius_sq`, when that ring exists.
    pub at_ring: Option<f64>,
    pub ring_radius_sq: f64,
    /// True when the ring collapses onto the origin (|α₁|² ≤ 0).
    pub degenerate: bool,
}

impl SinglePhotonExtrema {
    pub fn max(&self) -> f64 {
        self.at_ring.map_or(self.at_origin, |r| r.max(self.at_origin)).max(0.0)
    }

    pub fn min(&self) -> f64 {
        self.at_ring.map_or(self.at_origin, |r| r.min(self.at_origin)).min(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.max().max(-self.min())
    }
}

/// Extrema of W^(-s) for the lossy single photon: the value at the origin and
/// the value on the ring |α₁|² = (1+s)(4η-1-s)/(4η).
pub fn extrema_lossy_single_photon(eta: f64, s: f64) -> Result<SinglePhotonExtrema> {
    check_ordering(s)?;
    check_eta(eta)?;
    if s <= -1.0 {
        return Err(Error::SingularOrdering(-s));
    }
    let p = 1.0 + s;
    let at_origin = 2.0 * (p - 2.0 * eta) / (PI * p * p);
    let ring = if eta > 0.0 { p * (4.0 * eta - p) / (4.0 * eta) } else { 0.0 };
    if ring <= 0.0 {
        return Ok(SinglePhotonExtrema { at_origin, at_ring: None, ring_radius_sq: 0.0, degenerate: true });
    }
    let at_ring = 4.0 * eta / (PI * p * p) * ((p - 4.0 * eta) / (2.0 * eta)).exp();
    Ok(SinglePhotonExtrema { at_origin, at_ring: Some(at_ring), ring_radius_sq: ring, degenerate: false })
}

/// W^(s) of the even cat state ∝ |γ⟩ + |-γ⟩ after loss η.
pub fn spqd_lossy_cat(gamma: Complex64, eta: f64, s: f64, alpha: Complex64) -> Result<f64> {
    check_ordering(s)?;
    check_eta(eta)?;
    let kappa = 2.0 / (1.0 - s);
    let g = gamma * eta.sqrt();
    let overlap = (-2.0 * gamma.norm_sqr()).exp();
    let lobes = (-kappa * (alpha - g).norm_sqr()).exp() + (-kappa * (alpha + g).norm_sqr()).exp();
    let fringe = 2.0 * overlap * (-kappa * (alpha + g) * (alpha.conj() - g.conj())).exp().re;
    Ok((lobes + fringe) / (PI * (1.0 - s) * (1.0 + overlap)))
}

/// 4^m times the normal density N(r; r̄, Σ - sI) with r = (2 Re α, 2 Im α, ...).
pub fn spqd_gaussian(g: &GaussianState, s: &OrderingVector, alpha: &[Complex64]) -> Result<f64> {
    let dens = GaussianDensity::new(g, s)?;
    if alpha.len() != dens.modes() {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {} modes", alpha.len(), dens.modes())));
    }
    Ok(dens.eval(alpha))
}

/// Precomputed s-ordered density of a Gaussian state.
#[derive(Debug, Clone)]
pub struct GaussianDensity {
    mean: DVector<f64>,
    /// Cholesky factor L of Σ - sI.
    chol: DMatrix<f64>,
    log_norm: f64,
}

impl GaussianDensity {
    pub fn new(g: &GaussianState, s: &OrderingVector) -> Result<Self> {
        if s.modes() != g.modes() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} modes, ordering {}",
                g.modes(),
                s.modes()
            )));
        }
        Self::with_orderings(g, s.as_slice())
    }

    /// Same as `new` but accepts any ordering below 1, including values
    /// under -1.
    pub fn with_orderings(g: &GaussianState, s: &[f64]) -> Result<Self> {
        let shifted = ordered_covariance(g, s)?;
        let n = shifted.nrows();
        let chol = shifted.cholesky().ok_or(Error::PositiveDefiniteViolation { min_eigenvalue: 0.0 })?.l();
        let logdet: f64 = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let log_norm = (n / 2) as f64 * 4f64.ln() - 0.5 * logdet - 0.5 * n as f64 * (2.0 * PI).ln();
        Ok(Self { mean: g.mean().clone(), chol, log_norm })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    /// Density value at α (with respect to d²α per mode).
    pub fn eval(&self, alpha: &[Complex64]) -> f64 {
        let d = DVector::from_fn(self.mean.len(), |i, _| {
            let a = alpha[i / 2];
            2.0 * if i % 2 == 0 { a.re } else { a.im } - self.mean[i]
        });
        let z = self.chol.solve_lower_triangular(&d).expect("triangular solve");
        (self.log_norm - 0.5 * z.norm_squared()).exp()
    }

    /// Largest density value.
    pub fn peak(&self) -> f64 {
        self.log_norm.exp()
    }

    /// Draw α from the normalized density.
    pub fn sample(&self, rng: &mut dyn rand::RngCore) -> Vec<Complex64> {
        use rand::Rng;
        let n = self.mean.len();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let r = &self.mean + &self.chol * z;
        (0..n / 2).map(|j| Complex64::new(r[2 * j], r[2 * j + 1]) / 2.0).collect()
    }
}

/// Σ - diag(s₁, s₁, s₂, s₂, ...), checked positive definite.
pub(crate) fn ordered_covariance(g: &GaussianState, s: &[f64]) -> Result<DMatrix<f64>> {
    for &v in s {
        check_ordering(v)?;
    }
    let mut c = g.cov().clone();
    for (j, &v) in s.iter().enumerate() {
        c[(2 * j, 2 * j)] -= v;
        c[(2 * j + 1, 2 * j + 1)] -= v;
    }
    let lmin = min_eigenvalue(&c);
    if lmin <= 1e-12 {
        return Err(Error::PositiveDefiniteViolation { min_eigenvalue: lmin });
    }
    Ok(c)
}

/// Normal density with covariance `cov` evaluated at displacement `d`.
pub(crate) fn gaussian_density(cov: &DMatrix<f64>, d: &DVector<f64>) -> f64 {
    let n = cov.nrows();
    let chol = cov.clone().cholesky().expect("positive definite covariance");
    let z = chol.l().solve_lower_triangular(d).expect("triangular solve");
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    (-0.5 * z.norm_squared() - 0.5 * logdet - 0.5 * n as f64 * (2.0 * PI).ln()).exp()
}

type Evaluator = dyn Fn(&[Complex64]) -> f64 + Send + Sync;

/// An evaluable quasi-probability density with its negativity metadata.
#[derive(Clone)]
pub struct PqdFunction {
    modes: usize,
    eval: Arc<Evaluator>,
    neg_volume: f64,
    range: (f64, f64),
    support_radius: f64,
    envelope_sigma: f64,
    radial: bool,
}

impl std::fmt::Debug for PqdFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PqdFunction")
            .field("modes", &self.modes)
            .field("neg_volume", &self.neg_volume)
            .field("range", &self.range)
            .finish()
    }
}

impl PqdFunction {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn eval(&self, alpha: &[Complex64]) -> f64 {
        (self.eval)(alpha)
    }

    pub fn neg_volume(&self) -> f64 {
        self.neg_volume
    }

    /// (min, max) of the density.
    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn max_abs(&self) -> f64 {
        self.range.1.max(-self.range.0)
    }

    /// Radius beyond which the density is dominated by a centred Gaussian.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Standard deviation of the Gaussian envelope along each of Re α, Im α.
    pub fn envelope_sigma(&self) -> f64 {
        self.envelope_sigma
    }

    pub fn is_radial(&self) -> bool {
        self.radial
    }

    pub fn vacuum(s: f64) -> Result<Self> {
        Self::lossy_single_photon(0.0, s)
    }

    pub fn lossy_single_photon(eta: f64, s: f64) -> Result<Self> {
        spqd_lossy_single_photon(eta, s, C0)?;
        let neg = negvol_lossy_single_photon(eta, s)?;
        // Stationary values of W^(s) itself are those of W^(-(-s)).
        let ext = if s > -1.0 {
            let e = extrema_lossy_single_photon(eta, -s)?;
            (e.min(), e.max())
        } else {
            let f = |z: Complex64| spqd_lossy_single_photon(eta, s, z).unwrap_or(0.0);
            let (lo, hi) = extrema_2d(f, 6.0, true);
            (lo.min(0.0), hi)
        };
        Ok(Self {
            modes: 1,
            eval: Arc::new(move |a: &[Complex64]| spqd_lossy_single_photon(eta, s, a[0]).unwrap_or(f64::NAN)),
            neg_volume: neg,
            range: ext,
            support_radius: 0.0,
            envelope_sigma: ((1.0 - s) / 4.0).sqrt() * 1.5,
            radial: true,
        })
    }

    /// Lossy cat distribution; negative volume and range come from quadrature.
    pub fn lossy_cat(gamma: Complex64, eta: f64, s: f64) -> Result<Self> {
        spqd_lossy_cat(gamma, eta, s, C0)?;
        let sigma = ((1.0 - s) / 4.0).sqrt();
        let support = gamma.norm() * eta.sqrt();
        let f = move |z: Complex64| spqd_lossy_cat(gamma, eta, s, z).unwrap_or(f64::NAN);
        let mut p = Self {
            modes: 1,
            eval: Arc::new(move |a: &[Complex64]| f(a[0])),
            neg_volume: 1.0,
            range: (0.0, 0.0),
            support_radius: support,
            envelope_sigma: sigma,
            radial: gamma.norm() == 0.0,
        };
        p.neg_volume = negvol_numeric(&p, sigma, 1e-7)?;
        let (lo, hi) = extrema_2d(f, support + 6.0 * sigma, p.radial);
        p.range = (lo.min(0.0), hi);
        Ok(p)
    }

    /// Gaussian state at ordering s; non-negative by construction.
    pub fn gaussian(g: &GaussianState, s: &OrderingVector) -> Result<Self> {
        let dens = GaussianDensity::new(g, s)?;
        let shifted = ordered_covariance(g, s.as_slice())?;
        let lmax = nalgebra::SymmetricEigen::new(shifted).eigenvalues.max();
        let m = g.modes();
        let mean = g.mean();
        let support = (0..m)
            .map(|j| 0.5 * (mean[2 * j].powi(2) + mean[2 * j + 1].powi(2)).sqrt())
            .fold(0.0, f64::max);
        let peak = dens.peak();
        Ok(Self {
            modes: m,
            eval: Arc::new(move |a: &[Complex64]| dens.eval(a)),
            neg_volume: 1.0,
            range: (0.0, peak),
            support_radius: support,
            envelope_sigma: 0.5 * lmax.sqrt(),
            radial: false,
        })
    }

    /// Wrap an arbitrary evaluator with caller-supplied metadata.
    pub fn from_fn<F>(modes: usize, neg_volume: f64, range: (f64, f64), support_radius: f64, envelope_sigma: f64, f: F) -> Self
    where
        F: Fn(&[Complex64]) -> f64 + Send + Sync + 'static,
    {
        Self { modes, eval: Arc::new(f), neg_volume, range, support_radius, envelope_sigma, radial: false }
    }
}

/// ∫ p(α) d²α by adaptive polar quadrature (single-mode distributions).
pub fn integrate_numeric(p: &PqdFunction, envelope_sigma: f64, tol: f64) -> Result<f64> {
    single_mode_quadrature(p, envelope_sigma, tol, false)
}

/// ∫ |p(α)| d²α by adaptive polar quadrature (single-mode distributions).
pub fn negvol_numeric(p: &PqdFunction, envelope_sigma: f64, tol: f64) -> Result<f64> {
    single_mode_quadrature(p, envelope_sigma, tol, true)
}

fn single_mode_quadrature(p: &PqdFunction, envelope_sigma: f64, tol: f64, abs: bool) -> Result<f64> {
    if p.modes != 1 {
        return Err(Error::Unsupported("numeric quadrature is single-mode only".into()));
    }
    if !(envelope_sigma > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidArgument("envelope width and tolerance must be positive".into()));
    }
    let radius = p.support_radius + 9.0 * envelope_sigma;
    let f = |z: Complex64| {
        let v = p.eval(&[z]);
        if abs { v.abs() } else { v }
    };
    polar_integral(f, radius, tol, p.radial)
}

/// Range of the single-mode distribution W^(-t) over all states:
/// (2(t-1)/(π(1+t)²), 2/(π(1+t))).
pub fn single_mode_pqd_interval(t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("ordering {t} < 0 gives an unbounded range")));
    }
    let hi = 2.0 / (PI * (1.0 + t));
    Ok((hi * (t - 1.0) / (t + 1.0), hi))
}

/// Upper bound (2/(t_min+1)) Πⱼ 2/(tⱼ+1) on the range of π^m W^(-t)_Π over
/// all POVM elements Π.
pub fn povm_range_bound(t: &OrderingVector) -> Result<f64> {
    if t.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("POVM range bound needs t ≥ 0".into()));
    }
    Ok(2.0 / (t.min() + 1.0) * t.as_slice().iter().map(|v| 2.0 / (v + 1.0)).product::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{coherent_vector, FockOperator};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn husimi_point_operator_is_vacuum_projector() {
        let p = single_mode_point_operator(-1.0, C0, 8).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == 0 && j == 0 { 1.0 / PI } else { 0.0 };
                assert!((p.matrix[(i, j)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn husimi_point_operator_is_coherent_projector() {
        let a = c(0.4, -0.7);
        let p = single_mode_point_operator(-1.0, a, 12).unwrap();
        let v = coherent_vector(a, 12);
        let want = &v * v.adjoint() / Complex64::new(PI, 0.0);
        assert!((p.matrix - want).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn wigner_point_operator_at_origin_is_parity() {
        let p = single_mode_point_operator(0.0, C0, 16).unwrap();
        for n in 0..16 {
            let want = 2.0 / PI * if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(p.matrix[(n, n)].re, want, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_matches_spectral_construction() {
        for &s in &[-0.95, -0.6, 0.0, 0.4] {
            for &a in &[c(0.3, 0.1), c(-0.8, 0.5), c(1.2, -0.4)] {
                let closed = single_mode_point_operator(s, a, 14).unwrap();
                // The spectral sum carries weights |c|ⁿ that grow for s > 0, so
                // compare relative to the largest entry.
                let spec = point_operator_spectral(s, a, 14, 140).unwrap();
                let scale = closed.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let err = (closed.matrix - spec.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(err < 1e-9 * scale, "s={s} α={a} err={err}");
            }
        }
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn closed_form_matches_high_precision_values() {
        // 40-digit evaluation of the Laguerre closed form at s = 0.4, α = -0.8 + 0.5i.
        let p = single_mode_point_operator(0.4, c(-0.8, 0.5), 14).unwrap();
        let want = [
            ((13, 13), c(-7.44151883204513859, 0.0)),
            ((13, 0), c(-1.1360950553851982011, 1.6887758903285053599)),
            ((12, 11), c(943.34641952860262308, -589.59151220537663943)),
            ((5, 3), c(0.11051245784885478923, -0.22669222122842008046)),
        ];
        let scale = p.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for ((m, n), w) in want {
            assert!((p.matrix[(m, n)] - w).norm() < 1e-14 * scale, "({m},{n})");
        }
    }

    #[test]
    fn diagonal_fast_path_matches_full_matrix() {
        for &s in &[-0.97, -0.5, 0.0, 0.6] {
            let a = c(0.7, -0.4);
            let full = single_mode_point_operator(s, a, 12).unwrap();
            let diag = point_operator_diagonal(s, a, 12).unwrap();
            for (n, d) in diag.iter().enumerate() {
                assert!((full.matrix[(n, n)].re - d).abs() < 1e-13, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn point_operator_is_hermitian() {
        let p = single_mode_point_operator(0.3, c(0.5, 0.9), 20).unwrap();
        assert!((&p.matrix - p.matrix.adjoint()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn point_operator_trace_converges_for_negative_orderings() {
        let a = c(0.3, 0.1);
        let t24 = single_mode_point_operator(-0.5, a, 24).unwrap().matrix.trace().re;
        let t48 = single_mode_point_operator(-0.5, a, 48).unwrap().matrix.trace().re;
        assert!((t48 - 1.0 / PI).abs() <= (t24 - 1.0 / PI).abs());
        assert!((t48 - 1.0 / PI).abs() < 1e-6);
    }

    #[test]
    fn point_operator_trace_is_not_absolutely_convergent_for_positive_orderings() {
        // The eigenvalues ((t-1)/(t+1))ⁿ grow in magnitude for t < 0, so
        // truncated traces oscillate instead of settling at 1/π.
        let a = c(0.3, 0.1);
        let t24 = single_mode_point_operator(0.5, a, 24).unwrap().matrix.trace().re;
        let t48 = single_mode_point_operator(0.5, a, 48).unwrap().matrix.trace().re;
        assert!((t24 - 1.0 / PI).abs() > 1e-3);
        assert!((t48 - 1.0 / PI).abs() > 1e-3);
    }

    #[test]
    fn point_operator_rejects_singular_ordering() {
        assert!(matches!(single_mode_point_operator(1.0, C0, 4), Err(Error::SingularOrdering(_))));
        assert!(single_mode_point_operator(0.0, c(f64::NAN, 0.0), 4).is_err());
    }

    #[test]
    fn point_operator_eigenvalues_lie_in_single_mode_interval() {
        for &t in &[0.0, 0.3, 0.8, 1.0] {
            let p = single_mode_point_operator(-t, c(0.2, -0.3), 30).unwrap();
            let h = nalgebra::DMatrix::from_fn(60, 60, |i, j| {
                let z = p.matrix[(i % 30, j % 30)];
                match (i < 30, j < 30) {
                    (true, true) | (false, false) => z.re,
                    (true, false) => -z.im,
                    (false, true) => z.im,
                }
            });
            let eig = nalgebra::SymmetricEigen::new(h).eigenvalues;
            let (lo, hi) = single_mode_pqd_interval(t).unwrap();
            for e in eig.iter() {
                assert!(*e >= lo - 1e-9 && *e <= hi + 1e-9, "t={t} eigenvalue {e}");
            }
        }
    }

    #[test]
    fn fock_operator_pqd_examples() {
        let vac = FockOperator::number_projector(0, 10).unwrap();
        let one = FockOperator::number_projector(1, 10).unwrap();
        let s0 = OrderingVector::uniform(0.0, 1).unwrap();
        let q = OrderingVector::uniform(-1.0, 1).unwrap();
        assert_relative_eq!(spqd_from_fock_operator(&vac, &s0, &[C0]).unwrap().value, 2.0 / PI, epsilon = 1e-14);
        assert_relative_eq!(spqd_from_fock_operator(&one, &s0, &[C0]).unwrap().value, -2.0 / PI, epsilon = 1e-14);
        assert!(spqd_from_fock_operator(&one, &q, &[C0]).unwrap().value.abs() < 1e-15);
        assert!(spqd_from_fock_operator(&one, &s0, &[C0, C0]).is_err());
    }

    #[test]
    fn truncation_flag() {
        let v = coherent_vector(c(2.0, 0.0), 6);
        let op = FockOperator::pure(1, 6, &v).unwrap();
        let s0 = OrderingVector::uniform(0.0, 1).unwrap();
        assert!(spqd_from_fock_operator(&op, &s0, &[C0]).unwrap().truncated);
        let v = coherent_vector(c(0.1, 0.0), 12);
        let op = FockOperator::pure(1, 12, &v).unwrap();
        assert!(!spqd_from_fock_operator(&op, &s0, &[C0]).unwrap().truncated);
    }

    #[test]
    fn single_photon_examples() {
        let a = c(0.3, -0.4);
        assert_relative_eq!(
            spqd_lossy_single_photon(0.0, 0.0, a).unwrap(),
            2.0 / PI * (-2.0 * a.norm_sqr()).exp(),
            epsilon = 1e-15
        );
        let ring = c(0.5f64.sqrt(), 0.0);
        assert_relative_eq!(
            spqd_lossy_single_photon(0.5, 0.0, ring).unwrap(),
            2.0 / (std::f64::consts::E * PI),
            epsilon = 1e-15
        );
        assert_relative_eq!(spqd_lossy_single_photon(1.0, 0.0, C0).unwrap(), -2.0 / PI, epsilon = 1e-15);
        assert!(spqd_lossy_single_photon(0.5, 1.0, C0).is_err());
    }

    #[test]
    fn single_photon_negvol_examples() {
        for &eta in &[0.1, 0.4, 0.7, 1.0] {
            assert_relative_eq!(negvol_lossy_single_photon(eta, 1.0 - 2.0 * eta).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(negvol_lossy_single_photon(0.5, 0.0).unwrap(), 1.0);
        let p = PqdFunction::lossy_single_photon(0.6, 0.5).unwrap();
        let q = negvol_numeric(&p, p.envelope_sigma(), 1e-9).unwrap();
        assert_relative_eq!(q, negvol_lossy_single_photon(0.6, 0.5).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn single_photon_extrema_examples() {
        let e = extrema_lossy_single_photon(0.5, 0.0).unwrap();
        assert_relative_eq!(e.max(), 2.0 / (std::f64::consts::E * PI), epsilon = 1e-15);
        assert_relative_eq!(e.ring_radius_sq, 0.5, epsilon = 1e-15);
        let v = extrema_lossy_single_photon(0.0, 0.0).unwrap();
        assert!(v.degenerate);
        assert_relative_eq!(v.at_origin, 2.0 / PI, epsilon = 1e-15);
        let f = extrema_lossy_single_photon(0.85, 0.3).unwrap();
        let factor = PI * negvol_lossy_single_photon(0.85, 0.3).unwrap() * f.max_abs();
        assert!(factor <= 1.0, "{factor}");
    }

    #[test]
    fn extrema_match_numeric_search() {
        for &(eta, s) in &[(0.5, 0.0), (0.85, 0.3), (0.3, -0.2), (0.9, 0.6)] {
            let e = extrema_lossy_single_photon(eta, s).unwrap();
            let f = |z: Complex64| spqd_lossy_single_photon(eta, -s, z).unwrap();
            let (lo, hi) = extrema_2d(f, 6.0, true);
            assert_relative_eq!(e.max(), hi.max(0.0), epsilon = 1e-9);
            assert_relative_eq!(e.min(), lo.min(0.0), epsilon = 1e-9);
        }
    }

    #[test]
    fn cat_reduces_to_vacuum() {
        let a = c(0.2, 0.7);
        for &s in &[-0.5, 0.0, 0.4] {
            assert_relative_eq!(
                spqd_lossy_cat(C0, 0.7, s, a).unwrap(),
                2.0 / (PI * (1.0 - s)) * (-2.0 * a.norm_sqr() / (1.0 - s)).exp(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn cat_matches_fock_oracle() {
        use crate::oracle::fock_density;
        use crate::sources::{InputStateSpec, ModeState};
        let op = fock_density(&[InputStateSpec::new(ModeState::Cat(c(1.0, 0.0)), 1.0)], 20).unwrap();
        assert!(op.trace_deficit < 1e-10);
        let s0 = OrderingVector::uniform(0.0, 1).unwrap();
        let v = spqd_from_fock_operator(&op, &s0, &[C0]).unwrap().value;
        assert_relative_eq!(v, spqd_lossy_cat(c(1.0, 0.0), 1.0, 0.0, C0).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn povm_bound_examples() {
        for m in 1..=8 {
            assert_eq!(povm_range_bound(&OrderingVector::uniform(0.0, m).unwrap()).unwrap(), 2f64.powi(m as i32 + 1));
            assert_eq!(povm_range_bound(&OrderingVector::uniform(1.0, m).unwrap()).unwrap(), 1.0);
        }
        assert_relative_eq!(povm_range_bound(&OrderingVector::new(vec![0.5]).unwrap()).unwrap(), 16.0 / 9.0, epsilon = 1e-15);
        assert!(povm_range_bound(&OrderingVector::new(vec![-0.1]).unwrap()).is_err());
    }

    #[test]
    fn ordering_vector_validation() {
        assert!(OrderingVector::new(vec![]).is_err());
        assert!(OrderingVector::new(vec![1.2]).is_err());
        assert!(OrderingVector::new(vec![f64::NAN]).is_err());
        assert_eq!(OrderingVector::new(vec![0.2, -0.4]).unwrap().min(), -0.4);
    }
}
