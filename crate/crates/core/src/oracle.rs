// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space brute force.
//!
//! Operators live on `cutoff^modes` dimensional spaces with mode 0 the most
//! significant tensor factor. Everything here is exponential in the mode
//! count and is meant for verification at small sizes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{LossVector, TransferMatrix};
use crate::numeric::{binomial, kron, ln_factorial};
use crate::permanent::ryser;
use crate::phase_space::{spqd_from_fock_operator, OrderingVector, PqdValue};
use crate::sources::{InputStateSpec, LonEncoding, ModeState};

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// A truncated Fock-basis operator together with the probability mass that
/// was lost to truncation while building it.
#[derive(Debug, Clone)]
pub struct FockOperator {
    pub modes: usize,
    pub cutoff: usize,
    pub matrix: DMatrix<Complex64>,
    pub trace_deficit: f64,
}

impl FockOperator {
    pub fn new(modes: usize, cutoff: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = cutoff.checked_pow(modes as u32).ok_or_else(|| {
            Error::InvalidArgument(format!("cutoff {cutoff}^{modes} overflows"))
        })?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} for {modes} modes at cutoff {cutoff}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { modes, cutoff, matrix, trace_deficit: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Projector |ψ⟩⟨ψ| for a single- or multi-mode state vector.
    pub fn pure(modes: usize, cutoff: usize, psi: &DVector<Complex64>) -> Result<Self> {
        Self::new(modes, cutoff, psi * psi.adjoint())
    }

    /// |n⟩⟨n| on one mode.
    pub fn number_projector(n: usize, cutoff: usize) -> Result<Self> {
        if n >= cutoff {
            return Err(Error::Truncation(format!("photon number {n} needs cutoff > {n}")));
        }
        let mut m = DMatrix::from_element(cutoff, cutoff, C0);
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self::new(1, cutoff, m)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &FockOperator) -> Result<FockOperator> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch("tensor factors need equal cutoffs".into()));
        }
        let mut out = FockOperator::new(
            self.modes + other.modes,
            self.cutoff,
            kron(&self.matrix, &other.matrix),
        )?;
        out.trace_deficit = self.trace_deficit + other.trace_deficit;
        Ok(out)
    }

    /// Occupation numbers of basis index `idx`.
    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        occupations(idx, self.modes, self.cutoff)
    }

    /// Population of basis states with some mode at the highest retained level.
    pub fn edge_mass(&self) -> f64 {
        (0..self.dim())
            .filter(|&i| self.occupations(i).iter().any(|&n| n + 1 == self.cutoff))
            .map(|i| self.matrix[(i, i)].re.abs())
            .sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn occupations(mut idx: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    let mut occ = vec![0; modes];
    for j in (0..modes).rev() {
        occ[j] = idx % cutoff;
        idx /= cutoff;
    }
    occ
}

fn index_of(occ: &[usize], cutoff: usize) -> usize {
    occ.iter().fold(0, |acc, &n| acc * cutoff + n)
}

/// Truncated coherent-state vector e^{-|γ|²/2} Σ γⁿ/√n! |n⟩.
pub fn coherent_vector(gamma: Complex64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(cutoff, C0);
    let mut amp = Complex64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        v[n] = amp;
        amp *= gamma / ((n + 1) as f64).sqrt();
    }
    v
}

/// Squeezed vacuum whose covariance is R(φ/2) diag(e^{2r}, e^{-2r}) R(φ/2)ᵀ.
pub fn squeezed_vacuum_vector(r: f64, phi: f64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(cutoff, C0);
    let t = Complex64::from_polar(r.tanh(), phi);
    let norm = 1.0 / r.cosh().sqrt();
    let mut k = 0;
    while 2 * k < cutoff {
        let mag = (0.5 * ln_factorial(2 * k) - k as f64 * 2f64.ln() - ln_factorial(k)).exp();
        v[2 * k] = t.powu(k as u32) * (norm * mag);
        k += 1;
    }
    v
}

/// Two-mode squeezed vacuum √(1-λ²) Σ λⁿ |n,n⟩.
pub fn tms_vector(lambda: f64, cutoff: usize) -> Result<DVector<Complex64>> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must lie in [0, 1)")));
    }
    let mut v = DVector::from_element(cutoff * cutoff, C0);
    let c = (1.0 - lambda * lambda).sqrt();
    for n in 0..cutoff {
        v[n * cutoff + n] = Complex64::new(c * lambda.powi(n as i32), 0.0);
    }
    Ok(v)
}

pub fn thermal_matrix(nbar: f64, cutoff: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(cutoff, cutoff, C0);
    let q = nbar / (1.0 + nbar);
    for n in 0..cutoff {
        m[(n, n)] = Complex64::new(q.powi(n as i32) / (1.0 + nbar), 0.0);
    }
    m
}

fn single_mode_density(spec: &InputStateSpec, cutoff: usize) -> Result<DMatrix<Complex64>> {
    let eta = spec.eta;
    let diag = |p: Vec<f64>| {
        let mut m = DMatrix::from_element(cutoff, cutoff, C0);
        for (n, v) in p.into_iter().enumerate().take(cutoff) {
            m[(n, n)] = Complex64::new(v, 0.0);
        }
        m
    };
    Ok(match spec.state {
        ModeState::Vacuum => diag(vec![1.0]),
        ModeState::SinglePhoton => diag(vec![1.0 - eta, eta]),
        ModeState::Fock(n) => diag(
            (0..=n)
                .map(|k| binomial(n, k) * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32))
                .collect(),
        ),
        ModeState::Thermal(nbar) => thermal_matrix(eta * nbar, cutoff),
        ModeState::Coherent(g) => {
            let v = coherent_vector(g * eta.sqrt(), cutoff);
            &v * v.adjoint()
        }
        ModeState::Cat(g) => {
            let a = coherent_vector(g * eta.sqrt(), cutoff);
            let b = coherent_vector(-g * eta.sqrt(), cutoff);
            let coh = (-2.0 * (1.0 - eta) * g.norm_sqr()).exp();
            let norm = 2.0 * (1.0 + (-2.0 * g.norm_sqr()).exp());
            (&a * a.adjoint() + &b * b.adjoint() + (&a * b.adjoint() + &b * a.adjoint()) * Complex64::new(coh, 0.0))
                / Complex64::new(norm, 0.0)
        }
    })
}

/// Exact density matrix of a product of lossy single-mode inputs.
pub fn fock_density(specs: &[InputStateSpec], cutoff: usize) -> Result<FockOperator> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("no modes".into()));
    }
    let mut out: Option<FockOperator> = None;
    for spec in specs {
        spec.validate()?;
        let m = single_mode_density(spec, cutoff)?;
        let deficit = 1.0 - m.trace().re;
        if deficit > 1e-6 {
            return Err(Error::Truncation(format!(
                "cutoff {cutoff} loses {deficit:.2e} of the {:?} input",
                spec.state
            )));
        }
        let mut op = FockOperator::new(1, cutoff, m)?;
        op.trace_deficit = deficit.max(0.0);
        out = Some(match out {
            None => op,
            Some(acc) => acc.tensor(&op)?,
        });
    }
    Ok(out.expect("non-empty"))
}

/// Fock representation of the passive unitary with a_k† ↦ Σⱼ V_kj a_j†,
/// so that a coherent input γ leaves as γV. Only total-photon sectors
/// N < cutoff are filled; the rest of the truncated space maps to zero.
pub fn lon_fock_unitary(v: &TransferMatrix, cutoff: usize) -> Result<FockOperator> {
    if !v.is_unitary() {
        return Err(Error::NonUnitary(v.unitarity_defect()));
    }
    let m = v.dim();
    let dim = cutoff.pow(m as u32);
    let mut u = DMatrix::from_element(dim, dim, C0);
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); cutoff];
    for idx in 0..dim {
        let total: usize = occupations(idx, m, cutoff).iter().sum();
        if total < cutoff {
            sectors[total].push(idx);
        }
    }
    let vm = v.matrix();
    for (n, states) in sectors.iter().enumerate() {
        if n == 0 {
            u[(0, 0)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let expanded: Vec<(Vec<usize>, f64)> = states
            .iter()
            .map(|&idx| {
                let occ = occupations(idx, m, cutoff);
                let rows: Vec<usize> =
                    occ.iter().enumerate().flat_map(|(k, &c)| std::iter::repeat_n(k, c)).collect();
                let lnf: f64 = occ.iter().map(|&c| ln_factorial(c)).sum();
                (rows, lnf)
            })
            .collect();
        for (ci, &col) in states.iter().enumerate() {
            for (ri, &row) in states.iter().enumerate() {
                let (ins, lin) = &expanded[ci];
                let (outs, lout) = &expanded[ri];
                let sub = DMatrix::from_fn(n, n, |i, j| vm[(ins[i], outs[j])]);
                u[(row, col)] = ryser(&sub) * (-0.5 * (lin + lout)).exp();
            }
        }
    }
    FockOperator::new(m, cutoff, u)
}

/// U ρ U†, recording any population pushed outside the filled sectors.
pub fn apply_unitary(rho: &FockOperator, u: &FockOperator) -> Result<FockOperator> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch("operator and unitary dimensions differ".into()));
    }
    let before = rho.trace();
    let mut out = FockOperator::new(rho.modes, rho.cutoff, &u.matrix * &rho.matrix * u.matrix.adjoint())?;
    out.trace_deficit = rho.trace_deficit + (before - out.trace()).max(0.0);
    Ok(out)
}

/// Per-mode pure-loss channel via its Kraus decomposition.
pub fn apply_loss_kraus(rho: &FockOperator, eta: &LossVector) -> Result<FockOperator> {
    if eta.len() != rho.modes {
        return Err(Error::DimensionMismatch(format!(
            "{} loss entries for {} modes",
            eta.len(),
            rho.modes
        )));
    }
    let d = rho.cutoff;
    let mut cur = rho.matrix.clone();
    for (j, &e) in eta.as_slice().iter().enumerate() {
        if e == 1.0 {
            continue;
        }
        // k[l][n] = ⟨n-l|K_l|n⟩
        let k: Vec<Vec<f64>> = (0..d)
            .map(|l| {
                (0..d)
                    .map(|n| {
                        if n < l {
                            0.0
                        } else {
                            (binomial(n, l) * e.powi((n - l) as i32) * (1.0 - e).powi(l as i32)).sqrt()
                        }
                    })
                    .collect()
            })
            .collect();
        let stride = d.pow((rho.modes - 1 - j) as u32);
        let mut next = DMatrix::from_element(cur.nrows(), cur.ncols(), C0);
        for a in 0..cur.nrows() {
            let na = (a / stride) % d;
            for b in 0..cur.ncols() {
                let nb = (b / stride) % d;
                let mut acc = C0;
                for l in 0..d - na.max(nb) {
                    acc += cur[(a + l * stride, b + l * stride)] * (k[l][na + l] * k[l][nb + l]);
                }
                next[(a, b)] = acc;
            }
        }
        cur = next;
    }
    let mut out = FockOperator::new(rho.modes, d, cur)?;
    out.trace_deficit = rho.trace_deficit;
    Ok(out)
}

/// Project mode `mode` onto |n⟩ and trace it out. The trace of the result
/// is the outcome probability.
pub fn herald(rho: &FockOperator, mode: usize, n: usize) -> Result<FockOperator> {
    if mode >= rho.modes || rho.modes < 2 {
        return Err(Error::InvalidArgument(format!("cannot herald mode {mode} of {}", rho.modes)));
    }
    if n >= rho.cutoff {
        return Err(Error::Truncation(format!("herald outcome {n} beyond cutoff {}", rho.cutoff)));
    }
    let d = rho.cutoff;
    let rest = rho.modes - 1;
    let dim = d.pow(rest as u32);
    let lift = |idx: usize| {
        let mut occ = occupations(idx, rest, d);
        occ.insert(mode, n);
        index_of(&occ, d)
    };
    let map: Vec<usize> = (0..dim).map(lift).collect();
    let m = DMatrix::from_fn(dim, dim, |i, j| rho.matrix[(map[i], map[j])]);
    let mut out = FockOperator::new(rest, d, m)?;
    out.trace_deficit = rho.trace_deficit;
    Ok(out)
}

pub fn partial_trace(rho: &FockOperator, keep: &[usize]) -> Result<FockOperator> {
    if keep.is_empty() || keep.iter().any(|&k| k >= rho.modes) {
        return Err(Error::InvalidArgument("invalid mode subset".into()));
    }
    let d = rho.cutoff;
    let kd = d.pow(keep.len() as u32);
    let mut out = DMatrix::from_element(kd, kd, C0);
    for a in 0..rho.dim() {
        let oa = occupations(a, rho.modes, d);
        for b in 0..rho.dim() {
            let ob = occupations(b, rho.modes, d);
            if (0..rho.modes).any(|j| !keep.contains(&j) && oa[j] != ob[j]) {
                continue;
            }
            let ka: Vec<usize> = keep.iter().map(|&j| oa[j]).collect();
            let kb: Vec<usize> = keep.iter().map(|&j| ob[j]).collect();
            out[(index_of(&ka, d), index_of(&kb, d))] += rho.matrix[(a, b)];
        }
    }
    let mut op = FockOperator::new(keep.len(), d, out)?;
    op.trace_deficit = rho.trace_deficit;
    Ok(op)
}

/// Heralded single-arm state of a two-mode squeezed vacuum after detecting
/// `herald_n` photons on the other arm, with the outcome probability.
pub fn tms_heralded_state(lambda: f64, herald_n: usize, cutoff: usize) -> Result<(FockOperator, f64)> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must lie in [0, 1)")));
    }
    let state = FockOperator::number_projector(herald_n, cutoff)?;
    let prob = (1.0 - lambda * lambda) * lambda.powi(2 * herald_n as i32);
    Ok((state, prob))
}

/// Tr[ρ₁ρ₂] / (Tr ρ₁ Tr ρ₂).
pub fn exact_kernel(rho1: &FockOperator, rho2: &FockOperator) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch("kernel arguments differ in dimension".into()));
    }
    let (t1, t2) = (rho1.trace(), rho2.trace());
    if t1.abs() < 1e-300 || t2.abs() < 1e-300 {
        return Err(Error::ZeroTrace);
    }
    let overlap: Complex64 = rho1
        .matrix
        .iter()
        .zip(rho2.matrix.transpose().iter())
        .map(|(a, b)| a * b)
        .sum();
    Ok(overlap.re / (t1 * t2))
}

/// Output state of a lossy LON encoding on the truncated space.
pub fn lon_output_state(e: &LonEncoding, cutoff: usize) -> Result<FockOperator> {
    let rho = fock_density(e.inputs(), cutoff)?;
    apply_unitary(&rho, &lon_fock_unitary(&e.output_network(), cutoff)?)
}

/// Exact kernel of two LON encodings with the same inputs.
pub fn lon_kernel(x: &LonEncoding, x2: &LonEncoding, cutoff: usize) -> Result<f64> {
    exact_kernel(&lon_output_state(x, cutoff)?, &lon_output_state(x2, cutoff)?)
}

/// Oracle entry point for phase-space checks.
pub fn pqd_check(rho: &FockOperator, s: &OrderingVector, alpha: &[Complex64]) -> Result<PqdValue> {
    spqd_from_fock_operator(rho, s, alpha)
}
