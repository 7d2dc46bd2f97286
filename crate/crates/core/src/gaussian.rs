// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Covariance-matrix calculus for multimode Gaussian states.
//!
//! Quadratures are ordered (x₁, p₁, x₂, p₂, ...) with x = a + a† and
//! p = -i(a - a†), so the vacuum covariance is the identity and a coherent
//! state |γ⟩ has mean (2 Re γ, 2 Im γ).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::{max_asymmetry, min_eigenvalue, operator_norm, unitarity_defect};
use crate::phase_space::gaussian_density;

const SYM_TOL: f64 = 1e-10;
const PHYS_TOL: f64 = 1e-8;

/// Mean vector and covariance matrix of an m-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Symplectic form ⊕ [[0, 1], [-1, 0]].
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        o[(2 * j, 2 * j + 1)] = 1.0;
        o[(2 * j + 1, 2 * j)] = -1.0;
    }
    o
}

/// Validate and build a Gaussian state.
pub fn make_gaussian(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<GaussianState> {
    let n = cov.nrows();
    if n == 0 || !n.is_multiple_of(2) || cov.ncols() != n || mean.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "mean of length {} and covariance {}x{}",
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Gaussian moments"));
    }
    let asym = max_asymmetry(&cov);
    if asym > SYM_TOL {
        return Err(Error::SymmetryViolation(asym));
    }
    let cov = (&cov + cov.transpose()) * 0.5;
    // Σ + iΩ as a real symmetric matrix of twice the size.
    let omega = symplectic_form(n / 2);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&cov);
    h.view_mut((n, n), (n, n)).copy_from(&cov);
    h.view_mut((0, n), (n, n)).copy_from(&omega.transpose());
    h.view_mut((n, 0), (n, n)).copy_from(&omega);
    let lmin = min_eigenvalue(&h);
    if lmin < -PHYS_TOL {
        return Err(Error::PhysicalityViolation(lmin));
    }
    Ok(GaussianState { mean, cov })
}

impl GaussianState {
    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn vacuum(modes: usize) -> Self {
        Self { mean: DVector::zeros(2 * modes), cov: DMatrix::identity(2 * modes, 2 * modes) }
    }

    /// Tensor product, with `other`'s modes appended.
    pub fn direct_sum(&self, other: &GaussianState) -> GaussianState {
        let (n1, n2) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(n1 + n2);
        mean.rows_mut(0, n1).copy_from(&self.mean);
        mean.rows_mut(n1, n2).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(n1 + n2, n1 + n2);
        cov.view_mut((0, 0), (n1, n1)).copy_from(&self.cov);
        cov.view_mut((n1, n1), (n2, n2)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Purity Tr ρ² = 1/√det Σ.
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }
}

/// Standard Gaussian families.
#[derive(Debug, Clone, PartialEq)]
pub enum GaussianSpec {
    Vacuum(usize),
    Coherent(Vec<Complex64>),
    /// Mean photon number per mode.
    Thermal(Vec<f64>),
    /// Squeezing magnitudes and phases; a phase of zero gives
    /// Σ = diag(e^{2r}, e^{-2r}).
    Squeezed { r: Vec<f64>, phases: Vec<f64> },
    /// √(1-λ²) Σ λⁿ |n, n⟩.
    TwoModeSqueezed(f64),
}

fn rotation(theta: f64) -> nalgebra::Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    nalgebra::Matrix2::new(c, -s, s, c)
}

pub fn prepare(spec: &GaussianSpec) -> Result<GaussianState> {
    match spec {
        GaussianSpec::Vacuum(m) => {
            if *m == 0 {
                return Err(Error::InvalidArgument("vacuum needs at least one mode".into()));
            }
            Ok(GaussianState::vacuum(*m))
        }
        GaussianSpec::Coherent(g) => {
            if g.is_empty() {
                return Err(Error::InvalidArgument("no amplitudes".into()));
            }
            let mean = DVector::from_fn(2 * g.len(), |i, _| if i % 2 == 0 { 2.0 * g[i / 2].re } else { 2.0 * g[i / 2].im });
            make_gaussian(mean, DMatrix::identity(2 * g.len(), 2 * g.len()))
        }
        GaussianSpec::Thermal(nbar) => {
            if nbar.is_empty() || nbar.iter().any(|&n| !(n >= 0.0) || !n.is_finite()) {
                return Err(Error::InvalidArgument("mean photon numbers must be finite and ≥ 0".into()));
            }
            let m = nbar.len();
            let cov = DMatrix::from_fn(2 * m, 2 * m, |i, j| if i == j { 2.0 * nbar[i / 2] + 1.0 } else { 0.0 });
            make_gaussian(DVector::zeros(2 * m), cov)
        }
        GaussianSpec::Squeezed { r, phases } => {
            if r.is_empty() || r.len() != phases.len() {
                return Err(Error::DimensionMismatch("squeezing and phase lists differ".into()));
            }
            let m = r.len();
            let mut cov = DMatrix::zeros(2 * m, 2 * m);
            for j in 0..m {
                let rot = rotation(phases[j] / 2.0);
                let d = nalgebra::Matrix2::new((2.0 * r[j]).exp(), 0.0, 0.0, (-2.0 * r[j]).exp());
                cov.view_mut((2 * j, 2 * j), (2, 2)).copy_from(&(rot * d * rot.transpose()));
            }
            make_gaussian(DVector::zeros(2 * m), cov)
        }
        GaussianSpec::TwoModeSqueezed(lambda) => {
            if !(0.0..1.0).contains(lambda) {
                return Err(Error::InvalidArgument(format!("λ = {lambda} must lie in [0, 1)")));
            }
            let l2 = lambda * lambda;
            let c = (1.0 + l2) / (1.0 - l2);
            let s = 2.0 * lambda / (1.0 - l2);
            let cov = DMatrix::from_row_slice(4, 4, &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ]);
            make_gaussian(DVector::zeros(4), cov)
        }
    }
}

/// Transfer matrix V of a linear optical network, ‖V‖ ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    v: DMatrix<Complex64>,
    unitary: bool,
}

impl TransferMatrix {
    pub fn new(v: DMatrix<Complex64>) -> Result<Self> {
        if v.nrows() != v.ncols() || v.nrows() == 0 {
            return Err(Error::DimensionMismatch("transfer matrix must be square".into()));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("transfer matrix"));
        }
        let norm = operator_norm(&v);
        if norm > 1.0 + 1e-10 {
            return Err(Error::NormViolation(norm));
        }
        let unitary = unitarity_defect(&v) <= 1e-10;
        Ok(Self { v, unitary })
    }

    pub fn identity(m: usize) -> Self {
        Self { v: DMatrix::identity(m, m), unitary: true }
    }

    /// Haar-random unitary from the QR decomposition of a seeded complex
    /// Gaussian matrix, with the phases of R's diagonal divided out.
    pub fn haar(m: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_with(m, &mut rng)
    }

    pub fn haar_with<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let z = DMatrix::from_fn(m, m, |_, _| {
            Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let qr = z.qr();
        let (mut q, r) = (qr.q(), qr.r());
        for j in 0..m {
            let d = r[(j, j)];
            let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
            for i in 0..m {
                q[(i, j)] *= ph;
            }
        }
        Self { v: q, unitary: true }
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.v)
    }

    pub fn adjoint(&self) -> Self {
        Self { v: self.v.adjoint(), unitary: self.unitary }
    }

    /// Matrix product self · other.
    pub fn compose(&self, other: &TransferMatrix) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("transfer matrices differ in size".into()));
        }
        Self::new(&self.v * &other.v)
    }

    /// Real 2m×2m orthogonal symplectic matrix O with r ↦ O r matching the
    /// amplitude map γ ↦ γV.
    pub fn symplectic(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut o = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            for k in 0..m {
                let z = self.v[(k, j)];
                o[(2 * j, 2 * k)] = z.re;
                o[(2 * j, 2 * k + 1)] = -z.im;
                o[(2 * j + 1, 2 * k)] = z.im;
                o[(2 * j + 1, 2 * k + 1)] = z.re;
            }
        }
        o
    }
}

/// Per-mode transmissivities.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector(Vec<f64>);

impl LossVector {
    pub fn new(eta: Vec<f64>) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::InvalidArgument("loss vector is empty".into()));
        }
        if let Some(&bad) = eta.iter().find(|&&e| !(0.0..=1.0).contains(&e)) {
            return Err(Error::InvalidArgument(format!("transmissivity {bad} outside [0, 1]")));
        }
        Ok(Self(eta))
    }

    pub fn uniform(eta: f64, modes: usize) -> Result<Self> {
        Self::new(vec![eta; modes])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Passive linear optics: coherent amplitudes map as γ ↦ γV.
pub fn apply_lon(g: &GaussianState, v: &TransferMatrix) -> Result<GaussianState> {
    if !v.is_unitary() {
        return Err(Error::NonUnitary(v.unitarity_defect()));
    }
    if v.dim() != g.modes() {
        return Err(Error::DimensionMismatch(format!("{}-mode network on {}-mode state", v.dim(), g.modes())));
    }
    let o = v.symplectic();
    let cov = &o * &g.cov * o.transpose();
    Ok(GaussianState { mean: &o * &g.mean, cov: (&cov + cov.transpose()) * 0.5 })
}

/// Pure-loss channel on every mode: Σ ↦ √η Σ √η + (I - η), r̄ ↦ √η r̄.
pub fn apply_loss(g: &GaussianState, eta: &LossVector) -> Result<GaussianState> {
    if eta.len() != g.modes() {
        return Err(Error::DimensionMismatch(format!("{} loss entries for {} modes", eta.len(), g.modes())));
    }
    let n = 2 * g.modes();
    let scale: Vec<f64> = (0..n).map(|i| eta.0[i / 2].sqrt()).collect();
    let cov = DMatrix::from_fn(n, n, |i, j| {
        scale[i] * g.cov[(i, j)] * scale[j] + if i == j { 1.0 - eta.0[i / 2] } else { 0.0 }
    });
    let mean = DVector::from_fn(n, |i, _| scale[i] * g.mean[i]);
    Ok(GaussianState { mean, cov })
}

fn quadrature_rows(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect()
}

fn select(g: &GaussianState, rows: &[usize]) -> GaussianState {
    GaussianState {
        mean: DVector::from_fn(rows.len(), |i, _| g.mean[rows[i]]),
        cov: DMatrix::from_fn(rows.len(), rows.len(), |i, j| g.cov[(rows[i], rows[j])]),
    }
}

/// Reduced state on the listed modes (in the listed order).
pub fn partial_trace(g: &GaussianState, keep: &[usize]) -> Result<GaussianState> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one mode".into()));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= g.modes()) {
        return Err(Error::InvalidArgument(format!("mode {bad} out of range")));
    }
    Ok(select(g, &quadrature_rows(keep)))
}

/// Result of contracting two states over shared modes.
#[derive(Debug, Clone)]
pub struct PartialOverlap {
    /// Normalized Gaussian on the 2k unmeasured modes (first k from the
    /// transposed first argument, then k from the second). `None` when k = 0.
    pub state: Option<GaussianState>,
    /// Trace of the unnormalized contraction.
    pub weight: f64,
}

/// Contract the last `m` modes of `g1` and `g2`.
///
/// The first argument enters through its transpose (p ↦ -p on every mode),
/// so operators acting on its surviving k modes must be evaluated at the
/// complex-conjugated phase-space point. Balanced beam splitters pair the
/// overlap modes and the difference-x and sum-p quadratures are conditioned
/// on zero.
pub fn partial_overlap(g1: &GaussianState, g2: &GaussianState, m: usize) -> Result<PartialOverlap> {
    let n = g1.modes();
    if g2.modes() != n {
        return Err(Error::DimensionMismatch("partial overlap needs equal mode counts".into()));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("cannot overlap {m} of {n} modes")));
    }
    let k = n - m;
    let mut t1 = g1.clone();
    for i in 0..2 * n {
        if i % 2 == 1 {
            t1.mean[i] = -t1.mean[i];
        }
        for j in 0..2 * n {
            if (i % 2) != (j % 2) {
                t1.cov[(i, j)] = -t1.cov[(i, j)];
            }
        }
    }
    let joint = t1.direct_sum(g2);
    // Beam splitters: a₊ = (a + b)/√2 replaces a, a₋ = (a - b)/√2 replaces b.
    let dim = 4 * n;
    let mut s = DMatrix::<f64>::identity(dim, dim);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..m {
        let a = k + i;
        let b = n + k + i;
        for q in 0..2 {
            let (ra, rb) = (2 * a + q, 2 * b + q);
            s[(ra, ra)] = h;
            s[(ra, rb)] = h;
            s[(rb, ra)] = h;
            s[(rb, rb)] = -h;
        }
    }
    let mean = &s * &joint.mean;
    let cov = &s * &joint.cov * s.transpose();
    let measured: Vec<usize> = (0..m).flat_map(|i| [2 * (n + k + i), 2 * (k + i) + 1]).collect();
    let kept: Vec<usize> = quadrature_rows(&(0..k).chain(n..n + k).collect::<Vec<_>>());
    let c = DMatrix::from_fn(2 * m, 2 * m, |i, j| cov[(measured[i], measured[j])]);
    let mu_c = DVector::from_fn(2 * m, |i, _| mean[measured[i]]);
    if min_eigenvalue(&c) < 1e-10 {
        return Err(Error::SingularConditioning);
    }
    let weight = (2.0 * PI).powi(m as i32) * gaussian_density(&c, &(-&mu_c));
    if k == 0 {
        return Ok(PartialOverlap { state: None, weight });
    }
    let a = DMatrix::from_fn(kept.len(), kept.len(), |i, j| cov[(kept[i], kept[j])]);
    let b = DMatrix::from_fn(kept.len(), 2 * m, |i, j| cov[(kept[i], measured[j])]);
    let mu_a = DVector::from_fn(kept.len(), |i, _| mean[kept[i]]);
    let c_inv = c.clone().try_inverse().ok_or(Error::SingularConditioning)?;
    let cond = &a - &b * &c_inv * b.transpose();
    let cond = (&cond + cond.transpose()) * 0.5;
    let cond_mean = &mu_a - &b * &c_inv * &mu_c;
    Ok(PartialOverlap { state: Some(GaussianState { mean: cond_mean, cov: cond }), weight })
}

/// λ_min(Σ): the largest s with Σ - sI ≻ 0 (as a supremum).
pub fn s_max_nonneg(g: &GaussianState) -> f64 {
    min_eigenvalue(&g.cov)
}

/// τ = max(0, (1 - λ_min(Σ))/2).
pub fn nonclassical_depth(g: &GaussianState) -> f64 {
    let tau = 0.5 * (1.0 - s_max_nonneg(g));
    if tau < 1e-12 {
        0.0
    } else {
        tau
    }
}

/// Tr[ρ₁ρ₂] = 2^m exp(-½ dᵀ(Σ₁+Σ₂)⁻¹d)/√det(Σ₁+Σ₂).
pub fn exact_gaussian_kernel(g1: &GaussianState, g2: &GaussianState) -> Result<f64> {
    if g1.modes() != g2.modes() {
        return Err(Error::DimensionMismatch("kernel arguments differ in mode count".into()));
    }
    let sum = &g1.cov + &g2.cov;
    let d = &g1.mean - &g2.mean;
    let chol = sum.clone().cholesky().ok_or(Error::SingularConditioning)?;
    let quad = d.dot(&chol.solve(&d));
    let det: f64 = chol.l().diagonal().iter().map(|v| v * v).product();
    Ok(2f64.powi(g1.modes() as i32) * (-0.5 * quad).exp() / det.sqrt())
}

/// Random physical state: passive · squeezing · passive acting on a thermal
/// state, displaced by a random mean. Squeezing magnitudes are drawn so that
/// ‖r‖ ≤ 1.5.
pub fn random_gaussian<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> GaussianState {
    let nbar: Vec<f64> = (0..modes).map(|_| rng.random::<f64>() * 1.5).collect();
    let mut g = prepare(&GaussianSpec::Thermal(nbar)).expect("valid thermal");
    let mut r: Vec<f64> = (0..modes).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1.5 * rng.random::<f64>();
    if norm > 0.0 {
        r.iter_mut().for_each(|v| *v *= target / norm);
    }
    let u1 = TransferMatrix::haar_with(modes, rng);
    let u2 = TransferMatrix::haar_with(modes, rng);
    g = apply_lon(&g, &u1).expect("unitary");
    let mut sq = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        sq[(2 * j, 2 * j)] = r[j].exp();
        sq[(2 * j + 1, 2 * j + 1)] = (-r[j]).exp();
    }
    let cov = &sq * &g.cov * &sq;
    g = GaussianState { mean: g.mean, cov: (&cov + cov.transpose()) * 0.5 };
    g = apply_lon(&g, &u2).expect("unitary");
    g.mean = DVector::from_fn(2 * modes, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, FockOperator};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn make_gaussian_examples() {
        let r: f64 = 0.7;
        assert!(make_gaussian(DVector::zeros(2), DMatrix::identity(2, 2)).is_ok());
        assert!(make_gaussian(DVector::zeros(2), DMatrix::from_diagonal(&DVector::from_vec(vec![(2.0 * r).exp(), (-2.0 * r).exp()]))).is_ok());
        assert!(matches!(
            make_gaussian(DVector::zeros(2), DMatrix::identity(2, 2) * 0.5),
            Err(Error::PhysicalityViolation(_))
        ));
        let mut asym = DMatrix::identity(2, 2);
        asym[(0, 1)] = 0.1;
        assert!(matches!(make_gaussian(DVector::zeros(2), asym), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn prepare_examples() {
        let v = prepare(&GaussianSpec::Vacuum(2)).unwrap();
        assert_eq!(v.cov(), &DMatrix::<f64>::identity(4, 4));
        let r: f64 = 0.4;
        let sq = prepare(&GaussianSpec::Squeezed { r: vec![r], phases: vec![0.0] }).unwrap();
        assert_relative_eq!(sq.cov()[(0, 0)], (2.0 * r).exp(), epsilon = 1e-15);
        assert_relative_eq!(nonclassical_depth(&sq), (1.0 - (-2.0 * r).exp()) / 2.0, epsilon = 1e-14);
        let th = prepare(&GaussianSpec::Thermal(vec![0.5])).unwrap();
        assert_eq!(th.cov(), &(DMatrix::<f64>::identity(2, 2) * 2.0));
        assert_eq!(nonclassical_depth(&th), 0.0);
        assert_relative_eq!(s_max_nonneg(&th), 2.0);
        assert!(prepare(&GaussianSpec::TwoModeSqueezed(1.0)).is_err());
    }

    #[test]
    fn lon_examples() {
        let v = TransferMatrix::haar(3, 4);
        let vac = GaussianState::vacuum(3);
        let out = apply_lon(&vac, &v).unwrap();
        assert!((out.cov() - vac.cov()).amax() < 1e-14);
        let th = prepare(&GaussianSpec::Thermal(vec![0.7; 3])).unwrap();
        assert!((apply_lon(&th, &v).unwrap().cov() - th.cov()).amax() < 1e-13);
        let g = vec![c(0.3, -0.1), c(0.2, 0.5), c(-0.4, 0.0)];
        let coh = apply_lon(&prepare(&GaussianSpec::Coherent(g.clone())).unwrap(), &v).unwrap();
        let vm = v.matrix();
        for j in 0..3 {
            let out: Complex64 = (0..3).map(|k| g[k] * vm[(k, j)]).sum();
            assert_relative_eq!(coh.mean()[2 * j], 2.0 * out.re, epsilon = 1e-14);
            assert_relative_eq!(coh.mean()[2 * j + 1], 2.0 * out.im, epsilon = 1e-14);
        }
        let sub = TransferMatrix::new(DMatrix::identity(3, 3) * Complex64::new(0.5, 0.0)).unwrap();
        assert!(matches!(apply_lon(&vac, &sub), Err(Error::NonUnitary(_))));
        assert!(matches!(
            TransferMatrix::new(DMatrix::identity(2, 2) * Complex64::new(1.5, 0.0)),
            Err(Error::NormViolation(_))
        ));
    }

    #[test]
    fn loss_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_gaussian(2, &mut rng);
        assert_eq!(apply_loss(&g, &LossVector::uniform(1.0, 2).unwrap()).unwrap(), g);
        let gone = apply_loss(&g, &LossVector::uniform(0.0, 2).unwrap()).unwrap();
        assert_eq!(gone, GaussianState::vacuum(2));
        let sq = prepare(&GaussianSpec::Squeezed { r: vec![0.6], phases: vec![0.3] }).unwrap();
        let tau = nonclassical_depth(&sq);
        let lossy = apply_loss(&sq, &LossVector::uniform(0.35, 1).unwrap()).unwrap();
        assert_relative_eq!(nonclassical_depth(&lossy), 0.35 * tau, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_thermal_depth() {
        // Squeezing factor 1/ζ on a thermal state of purity μ.
        let (zeta, mu): (f64, f64) = (1.8, 0.7);
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![zeta * zeta / mu, 1.0 / (zeta * zeta * mu)]));
        let g = make_gaussian(DVector::zeros(2), cov).unwrap();
        assert_relative_eq!(nonclassical_depth(&g), 0.5 * (1.0 - 1.0 / (zeta * zeta * mu)), epsilon = 1e-14);
    }

    #[test]
    fn partial_trace_examples() {
        let v = partial_trace(&GaussianState::vacuum(3), &[1]).unwrap();
        assert_eq!(v, GaussianState::vacuum(1));
        let lambda: f64 = 0.45;
        let tms = prepare(&GaussianSpec::TwoModeSqueezed(lambda)).unwrap();
        let arm = partial_trace(&tms, &[0]).unwrap();
        let want = (1.0 + lambda * lambda) / (1.0 - lambda * lambda);
        assert!((arm.cov() - DMatrix::identity(2, 2) * want).amax() < 1e-14);
        assert!(partial_trace(&tms, &[]).is_err());
    }

    #[test]
    fn full_overlap_with_itself_is_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let g = random_gaussian(2, &mut rng);
            let ov = partial_overlap(&g, &g, 2).unwrap();
            assert!(ov.state.is_none());
            assert_relative_eq!(ov.weight, g.purity(), max_relative = 1e-10);
        }
    }

    #[test]
    fn full_overlap_is_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let g1 = random_gaussian(2, &mut rng);
            let g2 = random_gaussian(2, &mut rng);
            let ov = partial_overlap(&g1, &g2, 2).unwrap();
            assert_relative_eq!(ov.weight, exact_gaussian_kernel(&g1, &g2).unwrap(), max_relative = 1e-10);
        }
    }

    #[test]
    fn vacuum_partial_overlap_is_classical() {
        let ov = partial_overlap(&GaussianState::vacuum(2), &GaussianState::vacuum(2), 1).unwrap();
        assert_relative_eq!(ov.weight, 1.0, epsilon = 1e-14);
        assert_eq!(nonclassical_depth(ov.state.as_ref().unwrap()), 0.0);
    }

    #[test]
    fn tms_self_overlap_is_weaker_tms() {
        let lambda: f64 = 0.3;
        let tms = prepare(&GaussianSpec::TwoModeSqueezed(lambda)).unwrap();
        let ov = partial_overlap(&tms, &tms, 1).unwrap();
        let l2 = lambda * lambda;
        assert_relative_eq!(ov.weight, (1.0 - l2) / (1.0 + l2), epsilon = 1e-12);
        let st = ov.state.unwrap();
        let want = prepare(&GaussianSpec::TwoModeSqueezed(l2)).unwrap();
        // Tr_B[ψ ψ] is the partial transpose of TMS(λ²) on the first arm; the
        // stored state carries that arm transposed back.
        assert!((st.cov() - want.cov()).amax() < 1e-12, "{}", st.cov());
    }

    #[test]
    fn kernel_examples() {
        let vac = GaussianState::vacuum(2);
        assert_relative_eq!(exact_gaussian_kernel(&vac, &vac).unwrap(), 1.0, epsilon = 1e-15);
        let (a, b) = (c(0.4, -0.2), c(-0.1, 0.6));
        let ga = prepare(&GaussianSpec::Coherent(vec![a])).unwrap();
        let gb = prepare(&GaussianSpec::Coherent(vec![b])).unwrap();
        assert_relative_eq!(exact_gaussian_kernel(&ga, &gb).unwrap(), (-(a - b).norm_sqr()).exp(), epsilon = 1e-14);
    }

    #[test]
    fn squeezed_kernel_matches_fock_oracle() {
        let d = 40;
        let (r, phi) = (0.5, 0.7);
        let sq = prepare(&GaussianSpec::Squeezed { r: vec![r], phases: vec![phi] }).unwrap();
        let sq2 = prepare(&GaussianSpec::Squeezed { r: vec![0.3], phases: vec![-0.4] }).unwrap();
        let f1 = FockOperator::pure(1, d, &oracle::squeezed_vacuum_vector(r, phi, d)).unwrap();
        let f2 = FockOperator::pure(1, d, &oracle::squeezed_vacuum_vector(0.3, -0.4, d)).unwrap();
        let fv = FockOperator::number_projector(0, d).unwrap();
        assert_relative_eq!(
            exact_gaussian_kernel(&sq, &GaussianState::vacuum(1)).unwrap(),
            oracle::exact_kernel(&f1, &fv).unwrap(),
            epsilon = 1e-8
        );
        assert_relative_eq!(exact_gaussian_kernel(&sq, &sq2).unwrap(), oracle::exact_kernel(&f1, &f2).unwrap(), epsilon = 1e-8);
    }
}
