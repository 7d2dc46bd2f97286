// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Data-encoding states: product inputs with per-mode loss, sent through a
//! lossless linear optical network.
//!
//! The output distribution factorizes in the rotated frame β = αV:
//! W_out(α) = Πₖ W_k(βₖ). Samples are drawn per mode in β and mapped back
//! with α = βV†.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianSpec, GaussianState, TransferMatrix};
use crate::phase_space::{
    extrema_lossy_single_photon, negvol_lossy_single_photon, spqd_lossy_cat, spqd_lossy_single_photon, OrderingVector,
    PqdFunction,
};

/// Single-mode input before loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeState {
    Vacuum,
    SinglePhoton,
    /// Even cat ∝ |γ⟩ + |-γ⟩.
    Cat(Complex64),
    Coherent(Complex64),
    /// Thermal state with the given mean photon number.
    Thermal(f64),
    /// Number state |n⟩; only available through the Fock oracle.
    Fock(usize),
}

/// One input mode: a state followed by a loss channel of transmissivity η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputStateSpec {
    pub state: ModeState,
    pub eta: f64,
}

impl InputStateSpec {
    pub fn new(state: ModeState, eta: f64) -> Self {
        Self { state, eta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidArgument(format!("transmissivity {} outside [0, 1]", self.eta)));
        }
        let finite = match self.state {
            ModeState::Cat(g) | ModeState::Coherent(g) => g.re.is_finite() && g.im.is_finite(),
            ModeState::Thermal(n) => n.is_finite() && n >= 0.0,
            _ => true,
        };
        if !finite {
            return Err(Error::NonFinite("input state parameter"));
        }
        Ok(())
    }

    /// The lossy input as a Gaussian state, when it is one.
    pub fn gaussian(&self) -> Option<GaussianState> {
        let spec = match self.state {
            ModeState::Vacuum => GaussianSpec::Vacuum(1),
            ModeState::Coherent(g) => GaussianSpec::Coherent(vec![g * self.eta.sqrt()]),
            ModeState::Thermal(n) => GaussianSpec::Thermal(vec![self.eta * n]),
            _ => return None,
        };
        crate::gaussian::prepare(&spec).ok()
    }

    /// W^(s) of the lossy input.
    pub fn pqd(&self, s: f64) -> Result<PqdFunction> {
        self.validate()?;
        if let Some(g) = self.gaussian() {
            return PqdFunction::gaussian(&g, &OrderingVector::new(vec![s]).map_err(|_| Error::SingularOrdering(s))?);
        }
        match self.state {
            ModeState::SinglePhoton => PqdFunction::lossy_single_photon(self.eta, s),
            ModeState::Cat(g) => PqdFunction::lossy_cat(g, self.eta, s),
            ModeState::Fock(_) => Err(Error::Unsupported(
                "number-state inputs have no closed-form distribution; use the Fock oracle".into(),
            )),
            _ => unreachable!("Gaussian families handled above"),
        }
    }

    /// (N(W^(s)), max |W^(-s)|) for the range bound.
    fn range_factors(&self, s: f64) -> Result<(f64, f64)> {
        match self.state {
            ModeState::SinglePhoton => Ok((
                negvol_lossy_single_photon(self.eta, s)?,
                extrema_lossy_single_photon(self.eta, s)?.max_abs(),
            )),
            _ => Ok((self.pqd(s)?.neg_volume(), self.pqd(-s)?.max_abs())),
        }
    }
}

/// Product inputs, per-mode loss and a lossless network V.
#[derive(Debug, Clone)]
pub struct LonEncoding {
    inputs: Vec<InputStateSpec>,
    v: TransferMatrix,
}

impl LonEncoding {
    pub fn new(inputs: Vec<InputStateSpec>, v: TransferMatrix) -> Result<Self> {
        if inputs.len() != v.dim() {
            return Err(Error::DimensionMismatch(format!("{} inputs for a {}-mode network", inputs.len(), v.dim())));
        }
        if !v.is_unitary() {
            return Err(Error::NonUnitary(v.unitarity_defect()));
        }
        for i in &inputs {
            i.validate()?;
        }
        Ok(Self { inputs, v })
    }

    pub fn modes(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[InputStateSpec] {
        &self.inputs
    }

    pub fn transfer(&self) -> &TransferMatrix {
        &self.v
    }

    /// β = αV.
    pub fn to_input_frame(&self, alpha: &[Complex64]) -> Vec<Complex64> {
        let v = self.v.matrix();
        (0..self.modes()).map(|k| (0..self.modes()).map(|j| alpha[j] * v[(j, k)]).sum()).collect()
    }

    /// α = βV†.
    pub fn to_output_frame(&self, beta: &[Complex64]) -> Vec<Complex64> {
        let v = self.v.matrix();
        (0..self.modes()).map(|j| (0..self.modes()).map(|k| beta[k] * v[(j, k)].conj()).sum()).collect()
    }

    /// Per-mode distributions at ordering s.
    pub fn mode_pqds(&self, s: f64) -> Result<Vec<PqdFunction>> {
        self.inputs.iter().map(|i| i.pqd(s)).collect()
    }

    /// Transfer matrix of the output state under the γ ↦ γV convention of
    /// `gaussian::apply_lon` and `oracle::lon_fock_unitary`.
    pub fn output_network(&self) -> TransferMatrix {
        self.v.adjoint()
    }
}

/// Πₖ W^(s)_{ρ̃ₖ}((αV)ₖ).
pub fn spqd_output(e: &LonEncoding, s: f64, alpha: &[Complex64]) -> Result<f64> {
    if alpha.len() != e.modes() {
        return Err(Error::DimensionMismatch(format!("{} amplitudes for {} modes", alpha.len(), e.modes())));
    }
    let pqds = e.mode_pqds(s)?;
    Ok(eval_product(&pqds, &e.to_input_frame(alpha)))
}

pub(crate) fn eval_product(pqds: &[PqdFunction], beta: &[Complex64]) -> f64 {
    pqds.iter().zip(beta).map(|(p, b)| p.eval(std::slice::from_ref(b))).product()
}

/// 2 Πₖ π N(W^(s)_{ρ̃ₖ}) max|W^(-s)_{ρ̃ₖ}|; independent of the network.
pub fn lon_range_bound(e: &LonEncoding, s: f64) -> Result<f64> {
    let mut bound = 2.0;
    for i in e.inputs() {
        let (n, m) = i.range_factors(s)?;
        bound *= PI * n * m;
    }
    Ok(bound)
}

/// Per-mode factor π N(W^(s)) max|W^(-s)| of the range bound.
pub fn mode_range_factor(input: &InputStateSpec, s: f64) -> Result<f64> {
    let (n, m) = input.range_factors(s)?;
    Ok(PI * n * m)
}

/// Default ordering grid: 41 points on [-0.95, 0.95].
pub fn default_ordering_grid() -> Vec<f64> {
    (0..41).map(|i| -0.95 + 0.0475 * i as f64).collect()
}

/// Grid point minimizing the range bound; ties go to the larger s.
pub fn optimize_ordering(e: &LonEncoding, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &s in grid {
        if !(s > -1.0 && s < 1.0) {
            return Err(Error::InvalidArgument(format!("grid point {s} outside (-1, 1)")));
        }
        let Ok(b) = lon_range_bound(e, s) else { continue };
        best = match best {
            Some((bs, bb)) if b > bb || (b == bb && s < bs) => Some((bs, bb)),
            _ => Some((s, b)),
        };
    }
    best.ok_or(Error::AllGridFailed)
}

/// Rejection sampler for |W^(s)|/N of one lossy input.
#[derive(Debug, Clone)]
enum ModeSampler {
    /// Complex normal with the given mean and per-component variance.
    Normal { mean: Complex64, var: f64 },
    /// |a + b|α|²| e^{-κ|α|²} with a Gaussian + Gamma(2) radial envelope.
    Photon { a: f64, b: f64, kappa: f64, p_first: f64 },
    /// Lossy cat with a three-Gaussian envelope.
    Cat { gamma: Complex64, eta: f64, s: f64, g: Complex64, kappa: f64, weights: [f64; 3], pref: f64 },
}

const MIN_ACCEPTANCE: f64 = 1e-4;

impl ModeSampler {
    fn new(input: &InputStateSpec, s: f64) -> Result<Self> {
        input.validate()?;
        if s >= 1.0 {
            return Err(Error::SingularOrdering(s));
        }
        let kappa = 2.0 / (1.0 - s);
        let eta = input.eta;
        match input.state {
            ModeState::Vacuum | ModeState::Coherent(_) | ModeState::Thermal(_) => {
                let g = input.gaussian().expect("Gaussian family");
                let var = (g.cov()[(0, 0)] - s) / 4.0;
                Ok(ModeSampler::Normal { mean: Complex64::new(g.mean()[0], g.mean()[1]) / 2.0, var })
            }
            ModeState::SinglePhoton => {
                let u = 1.0 - s;
                let a = 2.0 * u * (u - 2.0 * eta);
                let b = 8.0 * eta;
                let (w1, w2) = (a.abs() / kappa, b / (kappa * kappa));
                let total = w1 + w2;
                let accept = negvol_lossy_single_photon(eta, s)? * u.powi(3) / total;
                if accept < MIN_ACCEPTANCE {
                    return Err(Error::RejectionStall(accept));
                }
                Ok(ModeSampler::Photon { a, b, kappa, p_first: w1 / total })
            }
            ModeState::Cat(gamma) => {
                let g = gamma * eta.sqrt();
                let overlap = (-2.0 * gamma.norm_sqr()).exp();
                let pref = 1.0 / (PI * (1.0 - s) * (1.0 + overlap));
                let cross = 2.0 * (-2.0 * gamma.norm_sqr() + kappa * g.norm_sqr()).exp();
                let weights = [1.0, 1.0, cross];
                let mass = pref * PI / kappa * weights.iter().sum::<f64>();
                let neg = input.pqd(s)?.neg_volume();
                if neg / mass < MIN_ACCEPTANCE {
                    return Err(Error::RejectionStall(neg / mass));
                }
                Ok(ModeSampler::Cat { gamma, eta, s, g, kappa, weights, pref })
            }
            ModeState::Fock(_) => Err(Error::Unsupported("number-state inputs cannot be sampled directly".into())),
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<Complex64> {
        let normal = |rng: &mut dyn RngCore, sd: f64| {
            Complex64::new(sd * rng.sample::<f64, _>(StandardNormal), sd * rng.sample::<f64, _>(StandardNormal))
        };
        match *self {
            ModeSampler::Normal { mean, var } => Ok(mean + normal(rng, var.sqrt())),
            ModeSampler::Photon { a, b, kappa, p_first } => {
                let gamma2 = Gamma::new(2.0, 1.0 / kappa).expect("valid shape");
                let exp1 = Exp::new(kappa).expect("positive rate");
                for _ in 0..MAX_ATTEMPTS {
                    let x = if rng.random::<f64>() < p_first {
                        exp1.sample(rng)
                    } else {
                        gamma2.sample(rng)
                    };
                    let accept = (a + b * x).abs() / (a.abs() + b * x);
                    if rng.random::<f64>() < accept {
                        let theta = rng.random::<f64>() * std::f64::consts::TAU;
                        return Ok(Complex64::from_polar(x.sqrt(), theta));
                    }
                }
                Err(Error::RejectionStall(1.0 / MAX_ATTEMPTS as f64))
            }
            ModeSampler::Cat { gamma, eta, s, g, kappa, weights, pref } => {
                let total: f64 = weights.iter().sum();
                let sd = (0.5 / kappa).sqrt();
                for _ in 0..MAX_ATTEMPTS {
                    let u = rng.random::<f64>() * total;
                    let centre = if u < weights[0] {
                        g
                    } else if u < weights[0] + weights[1] {
                        -g
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    let z = centre + normal(rng, sd);
                    let env = pref
                        * ((-kappa * (z - g).norm_sqr()).exp() * weights[0]
                            + (-kappa * (z + g).norm_sqr()).exp() * weights[1]
                            + (-kappa * z.norm_sqr()).exp() * weights[2]);
                    let w = spqd_lossy_cat(gamma, eta, s, z)?.abs();
                    if rng.random::<f64>() * env < w {
                        return Ok(z);
                    }
                }
                Err(Error::RejectionStall(1.0 / MAX_ATTEMPTS as f64))
            }
        }
    }

    fn sign(&self, input: &InputStateSpec, s: f64, beta: Complex64) -> Result<f64> {
        Ok(match self {
            ModeSampler::Normal { .. } => 1.0,
            ModeSampler::Photon { .. } => spqd_lossy_single_photon(input.eta, s, beta)?.signum(),
            ModeSampler::Cat { gamma, eta, .. } => spqd_lossy_cat(*gamma, *eta, s, beta)?.signum(),
        })
    }
}

const MAX_ATTEMPTS: usize = 10_000_000;

/// Draws α ~ |W^(s)_out|/N for an encoding.
#[derive(Debug, Clone)]
pub struct OutputSampler {
    encoding: LonEncoding,
    s: f64,
    modes: Vec<ModeSampler>,
}

impl OutputSampler {
    pub fn new(e: &LonEncoding, s: f64) -> Result<Self> {
        let modes = e.inputs().iter().map(|i| ModeSampler::new(i, s)).collect::<Result<_>>()?;
        Ok(Self { encoding: e.clone(), s, modes })
    }

    /// Sample in the input frame β.
    pub fn sample_input_frame(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>> {
        self.modes.iter().map(|m| m.sample(rng)).collect()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<Vec<Complex64>> {
        Ok(self.encoding.to_output_frame(&self.sample_input_frame(rng)?))
    }

    /// Sign of W^(s)_out at an input-frame point β.
    pub fn sign_input_frame(&self, beta: &[Complex64]) -> Result<f64> {
        let mut sign = 1.0;
        for ((m, i), b) in self.modes.iter().zip(self.encoding.inputs()).zip(beta) {
            sign *= m.sign(i, self.s, *b)?;
        }
        Ok(sign)
    }
}

/// One draw from |W^(s)_out|/N with a generator seeded from `seed`.
pub fn sample_output(e: &LonEncoding, s: f64, seed: u64) -> Result<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OutputSampler::new(e, s)?.sample(&mut rng)
}
