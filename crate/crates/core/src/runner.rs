// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Config-driven experiments.
//!
//! A run reads a TOML file with an `[experiment]` and an `[encoding]`
//! section, executes one scenario and writes one JSON object per estimate
//! (JSON lines). `emit_plot_data` flattens such a report into CSV.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::estimator::{algorithm1_kernel, algorithm2_kernel, number_povm, Alg2Orderings, Encoding, EstimateReport};
use crate::gaussian::{apply_loss, exact_gaussian_kernel, nonclassical_depth, prepare, GaussianSpec, GaussianState, LossVector, TransferMatrix};
use crate::kernelml::{kernel_matrix, predict, project_psd, ridge_fit, Dataset};
use crate::oracle::{self, FockOperator};
use crate::permanent::{lossy_photonic_kernel_eps, PatternSampler};
use crate::sources::{default_ordering_grid, optimize_ordering, InputStateSpec, LonEncoding, ModeState};

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "QKPSE_SEED";

/// Failure classes of a run, mapped to process exit codes.
#[derive(Debug)]
pub enum RunError {
    /// Bad configuration; nothing was computed (exit code 2).
    Validation(String),
    /// Failure during computation or I/O (exit code 1).
    Runtime(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(m) => write!(f, "invalid configuration: {m}"),
            RunError::Runtime(m) => write!(f, "run failed: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Validation(msg.into())
}

fn runtime(e: impl std::fmt::Display) -> RunError {
    RunError::Runtime(e.to_string())
}

/// Scenario names accepted in `[experiment] scenario`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Algorithm1Lon,
    Algorithm2Gaussian,
    GaussianExact,
    Gurvits,
    DepthScan,
    RidgeDemo,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Algorithm1Lon => "algorithm1_lon",
            Scenario::Algorithm2Gaussian => "algorithm2_gaussian",
            Scenario::GaussianExact => "gaussian_exact",
            Scenario::Gurvits => "gurvits",
            Scenario::DepthScan => "depth_scan",
            Scenario::RidgeDemo => "ridge_demo",
        }
    }
}

/// Either a fixed ordering parameter or the string "auto".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderingChoice {
    Value(f64),
    Named(String),
}

impl Default for OrderingChoice {
    fn default() -> Self {
        OrderingChoice::Named("auto".into())
    }
}

impl OrderingChoice {
    fn resolve(&self) -> Result<Option<f64>, RunError> {
        match self {
            OrderingChoice::Value(s) if *s >= 1.0 => Err(invalid(format!("ordering s = {s} must be < 1"))),
            OrderingChoice::Value(s) if !(*s > -1.0) => Err(invalid(format!("ordering s = {s} must be > -1"))),
            OrderingChoice::Value(s) => Ok(Some(*s)),
            OrderingChoice::Named(n) if n == "auto" => Ok(None),
            OrderingChoice::Named(n) => Err(invalid(format!("ordering must be a number or \"auto\", got {n:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub scenario: Scenario,
    #[serde(default = "default_tol")]
    pub epsilon: f64,
    #[serde(default = "default_tol")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub oracle: bool,
    /// Independent repetitions with seeds seed, seed + 1, ...
    #[serde(default = "default_one")]
    pub runs: u64,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSection {
    pub modes: Option<usize>,
    /// vacuum, single_photon, cat, coherent or thermal.
    pub input: Option<String>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_im: Option<f64>,
    pub gamma_prime: Option<f64>,
    pub gamma_prime_im: Option<f64>,
    pub nbar: Option<f64>,
    #[serde(default)]
    pub s: OrderingChoice,
    pub v_seed: Option<u64>,
    pub v_seed_prime: Option<u64>,
    pub cutoff: Option<usize>,
    pub lambda: Option<f64>,
    pub herald: Option<usize>,
    pub herald_prime: Option<usize>,
    /// coherent or squeezed (gaussian_exact).
    pub kind: Option<String>,
    pub r: Option<f64>,
    pub phi: Option<f64>,
    pub r_prime: Option<f64>,
    pub phi_prime: Option<f64>,
    pub eta_grid: Option<Vec<f64>>,
    /// direct or uniform_eta (gurvits).
    pub sampler: Option<String>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub ridge_lambda: Option<f64>,
    pub scale: Option<f64>,
}

fn default_tol() -> f64 {
    0.05
}
fn default_true() -> bool {
    true
}
fn default_one() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub encoding: EncodingSection,
}

/// One line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub scenario: String,
    pub params: BTreeMap<String, Value>,
    pub estimate: f64,
    pub oracle_value: Option<f64>,
    pub n_samples: u64,
    pub range_bound: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub wall_seconds: f64,
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, RunError> {
    toml::from_str(text).map_err(|e| invalid(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Seed from the environment override, if set and valid.
pub fn seed_override_from_env() -> Result<Option<u64>, RunError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn check_unit(name: &str, v: f64) -> Result<f64, RunError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} = {v} must lie in [0, 1]")));
    }
    Ok(v)
}

fn check_open_unit(name: &str, v: f64) -> Result<f64, RunError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(format!("{name} = {v} must lie in (0, 1)")));
    }
    Ok(v)
}

fn mode_state(enc: &EncodingSection) -> Result<ModeState, RunError> {
    let g = Complex64::new(enc.gamma.unwrap_or(1.0), enc.gamma_im.unwrap_or(0.0));
    Ok(match enc.input.as_deref().unwrap_or("single_photon") {
        "vacuum" => ModeState::Vacuum,
        "single_photon" => ModeState::SinglePhoton,
        "cat" => ModeState::Cat(g),
        "coherent" => ModeState::Coherent(g),
        "thermal" => {
            let n = enc.nbar.unwrap_or(0.5);
            if !(n >= 0.0) {
                return Err(invalid("nbar must be ≥ 0"));
            }
            ModeState::Thermal(n)
        }
        other => return Err(invalid(format!("unknown input state {other:?}"))),
    })
}

type Params = BTreeMap<String, Value>;

fn param(p: &mut Params, k: &str, v: impl Into<Value>) {
    p.insert(k.to_string(), v.into());
}

/// A validated scenario ready to execute.
enum Plan {
    Alg1 { x: LonEncoding, x2: LonEncoding, s: f64, cutoff: Option<usize>, params: Params },
    Alg2 { g: GaussianState, n: usize, n2: usize, lambda: f64, t: Option<f64>, cutoff: usize, params: Params },
    GaussExact { g1: GaussianState, g2: GaussianState, f1: Option<FockOperator>, f2: Option<FockOperator>, params: Params },
    Gurvits { vx: TransferMatrix, vx2: TransferMatrix, eta: LossVector, sampler: PatternSampler, params: Params },
    Depth { g: GaussianState, grid: Vec<f64>, params: Params },
    Ridge { n_train: usize, n_test: usize, lambda: f64, scale: f64, s: f64, params: Params },
}

fn plan(cfg: &ExperimentConfig) -> Result<Plan, RunError> {
    let ex = &cfg.experiment;
    check_open_unit("epsilon", ex.epsilon)?;
    check_open_unit("delta", ex.delta)?;
    if ex.runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    let enc = &cfg.encoding;
    let s_choice = enc.s.resolve()?;
    let mut params = Params::new();
    match ex.scenario {
        Scenario::Algorithm1Lon => {
            let m = enc.modes.unwrap_or(2);
            if m == 0 || m > 8 {
                return Err(invalid("modes must lie in 1..=8"));
            }
            let eta = check_unit("eta", enc.eta.unwrap_or(1.0))?;
            let state = mode_state(enc)?;
            let inputs = vec![InputStateSpec::new(state, eta); m];
            let (vs, vs2) = (enc.v_seed.unwrap_or(1), enc.v_seed_prime.unwrap_or(2));
            let x = LonEncoding::new(inputs.clone(), TransferMatrix::haar(m, vs)).map_err(|e| invalid(e.to_string()))?;
            let x2 = LonEncoding::new(inputs, TransferMatrix::haar(m, vs2)).map_err(|e| invalid(e.to_string()))?;
            let s = match s_choice {
                Some(s) => s,
                None => optimize_ordering(&x, &default_ordering_grid()).map_err(|e| invalid(e.to_string()))?.0,
            };
            let default_cutoff = if state == ModeState::SinglePhoton || state == ModeState::Vacuum { m + 1 } else { 12 };
            let cutoff = ex.oracle.then(|| enc.cutoff.unwrap_or(default_cutoff));
            param(&mut params, "modes", m);
            param(&mut params, "input", enc.input.clone().unwrap_or_else(|| "single_photon".into()));
            param(&mut params, "eta", eta);
            param(&mut params, "s", s);
            param(&mut params, "v_seed", vs);
            param(&mut params, "v_seed_prime", vs2);
            Ok(Plan::Alg1 { x, x2, s, cutoff, params })
        }
        Scenario::Algorithm2Gaussian => {
            let lambda = enc.lambda.unwrap_or(0.3);
            if !(0.0..1.0).contains(&lambda) {
                return Err(invalid(format!("lambda = {lambda} must lie in [0, 1)")));
            }
            let g = prepare(&GaussianSpec::TwoModeSqueezed(lambda)).map_err(|e| invalid(e.to_string()))?;
            let (n, n2) = (enc.herald.unwrap_or(1), enc.herald_prime.unwrap_or(1));
            param(&mut params, "lambda", lambda);
            param(&mut params, "herald", n);
            param(&mut params, "herald_prime", n2);
            param(&mut params, "t", s_choice.map_or(Value::from("auto"), Value::from));
            Ok(Plan::Alg2 { g, n, n2, lambda, t: s_choice, cutoff: enc.cutoff.unwrap_or(24), params })
        }
        Scenario::GaussianExact => {
            let cutoff = enc.cutoff.unwrap_or(40);
            let kind = enc.kind.clone().unwrap_or_else(|| "coherent".into());
            let (g1, g2, f1, f2) = match kind.as_str() {
                "coherent" => {
                    let a = Complex64::new(enc.gamma.unwrap_or(0.5), enc.gamma_im.unwrap_or(0.0));
                    let b = Complex64::new(enc.gamma_prime.unwrap_or(0.0), enc.gamma_prime_im.unwrap_or(0.0));
                    param(&mut params, "gamma", vec![a.re, a.im]);
                    param(&mut params, "gamma_prime", vec![b.re, b.im]);
                    (
                        prepare(&GaussianSpec::Coherent(vec![a])).map_err(|e| invalid(e.to_string()))?,
                        prepare(&GaussianSpec::Coherent(vec![b])).map_err(|e| invalid(e.to_string()))?,
                        oracle::coherent_vector(a, cutoff),
                        oracle::coherent_vector(b, cutoff),
                    )
                }
                "squeezed" => {
                    let (r, phi) = (enc.r.unwrap_or(0.5), enc.phi.unwrap_or(0.0));
                    let (r2, phi2) = (enc.r_prime.unwrap_or(0.0), enc.phi_prime.unwrap_or(0.0));
                    param(&mut params, "r", r);
                    param(&mut params, "phi", phi);
                    param(&mut params, "r_prime", r2);
                    param(&mut params, "phi_prime", phi2);
                    (
                        prepare(&GaussianSpec::Squeezed { r: vec![r], phases: vec![phi] }).map_err(|e| invalid(e.to_string()))?,
                        prepare(&GaussianSpec::Squeezed { r: vec![r2], phases: vec![phi2] }).map_err(|e| invalid(e.to_string()))?,
                        oracle::squeezed_vacuum_vector(r, phi, cutoff),
                        oracle::squeezed_vacuum_vector(r2, phi2, cutoff),
                    )
                }
                other => return Err(invalid(format!("unknown Gaussian kind {other:?}"))),
            };
            param(&mut params, "kind", kind);
            param(&mut params, "cutoff", cutoff);
            let (f1, f2) = if ex.oracle {
                (
                    Some(FockOperator::pure(1, cutoff, &f1).map_err(runtime)?),
                    Some(FockOperator::pure(1, cutoff, &f2).map_err(runtime)?),
                )
            } else {
                (None, None)
            };
            Ok(Plan::GaussExact { g1, g2, f1, f2, params })
        }
        Scenario::Gurvits => {
            let m = enc.modes.unwrap_or(2);
            if m == 0 || m > 12 {
                return Err(invalid("modes must lie in 1..=12"));
            }
            let eta = check_unit("eta", enc.eta.unwrap_or(1.0))?;
            let sampler = match enc.sampler.as_deref().unwrap_or("direct") {
                "direct" => PatternSampler::Direct,
                "uniform_eta" => PatternSampler::UniformEta,
                other => return Err(invalid(format!("unknown pattern sampler {other:?}"))),
            };
            let (vs, vs2) = (enc.v_seed.unwrap_or(1), enc.v_seed_prime.unwrap_or(2));
            param(&mut params, "modes", m);
            param(&mut params, "eta", eta);
            param(&mut params, "sampler", enc.sampler.clone().unwrap_or_else(|| "direct".into()));
            param(&mut params, "v_seed", vs);
            param(&mut params, "v_seed_prime", vs2);
            Ok(Plan::Gurvits {
                vx: TransferMatrix::haar(m, vs),
                vx2: TransferMatrix::haar(m, vs2),
                eta: LossVector::uniform(eta, m).map_err(|e| invalid(e.to_string()))?,
                sampler,
                params,
            })
        }
        Scenario::DepthScan => {
            let r = enc.r.unwrap_or(0.5);
            let g = prepare(&GaussianSpec::Squeezed { r: vec![r], phases: vec![enc.phi.unwrap_or(0.0)] }).map_err(|e| invalid(e.to_string()))?;
            let grid = enc.eta_grid.clone().unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect());
            for &e in &grid {
                check_unit("eta_grid entry", e)?;
            }
            param(&mut params, "r", r);
            Ok(Plan::Depth { g, grid, params })
        }
        Scenario::RidgeDemo => {
            let n_train = enc.n_train.unwrap_or(12);
            let n_test = enc.n_test.unwrap_or(25);
            if n_train == 0 || n_test == 0 {
                return Err(invalid("n_train and n_test must be positive"));
            }
            let lambda = enc.ridge_lambda.unwrap_or(1e-3);
            if !(lambda > 0.0) {
                return Err(invalid("ridge_lambda must be positive"));
            }
            let scale = enc.scale.unwrap_or(1.0);
            let s = s_choice.unwrap_or(0.0);
            param(&mut params, "n_train", n_train);
            param(&mut params, "n_test", n_test);
            param(&mut params, "ridge_lambda", lambda);
            param(&mut params, "scale", scale);
            param(&mut params, "s", s);
            Ok(Plan::Ridge { n_train, n_test, lambda, scale, s, params })
        }
    }
}

fn record(scenario: Scenario, params: &Params, r: &EstimateReport, oracle: Option<f64>) -> Record {
    Record {
        scenario: scenario.name().into(),
        params: params.clone(),
        estimate: r.value,
        oracle_value: oracle,
        n_samples: r.n_samples,
        range_bound: r.range_bound,
        epsilon: r.epsilon,
        delta: r.delta,
        seed: r.seed,
        wall_seconds: r.wall_seconds,
    }
}

/// Execute a parsed configuration.
pub fn run_config(cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<Vec<Record>, RunError> {
    let plan = plan(cfg)?;
    let ex = &cfg.experiment;
    let base = seed_override.unwrap_or(ex.seed);
    let seeds: Vec<u64> = (0..ex.runs).map(|i| base.wrapping_add(i)).collect();
    let sc = ex.scenario;
    let mut out = Vec::new();
    match plan {
        Plan::Alg1 { x, x2, s, cutoff, params } => {
            let oracle = cutoff.map(|c| oracle::lon_kernel(&x, &x2, c)).transpose().map_err(runtime)?;
            for &seed in &seeds {
                let r = algorithm1_kernel(&Encoding::Lon(x.clone()), &Encoding::Lon(x2.clone()), s, ex.epsilon, ex.delta, seed)
                    .map_err(runtime)?;
                out.push(record(sc, &params, &r, oracle));
            }
        }
        Plan::Alg2 { g, n, n2, lambda, t, cutoff, params } => {
            let oracle = if ex.oracle {
                let tms = FockOperator::pure(2, cutoff, &oracle::tms_vector(lambda, cutoff).map_err(runtime)?).map_err(runtime)?;
                let a = oracle::herald(&tms, 0, n).map_err(runtime)?;
                let b = oracle::herald(&tms, 0, n2).map_err(runtime)?;
                Some(oracle::exact_kernel(&a, &b).map_err(runtime)?)
            } else {
                None
            };
            let orderings = Alg2Orderings { s: None, s_prime: None, t };
            for &seed in &seeds {
                let r = algorithm2_kernel(&g, &g, &[number_povm(n)], &[number_povm(n2)], orderings, ex.epsilon, ex.delta, seed)
                    .map_err(runtime)?;
                let mut p = params.clone();
                param(&mut p, "orderings", vec![r.orderings.0, r.orderings.1, r.orderings.2]);
                param(&mut p, "numerator", r.numerator.value);
                param(&mut p, "denominator_x", r.denominator_x.value);
                param(&mut p, "denominator_x2", r.denominator_x2.value);
                out.push(record(sc, &p, &r.kernel, oracle));
            }
        }
        Plan::GaussExact { g1, g2, f1, f2, params } => {
            let start = Instant::now();
            let k = exact_gaussian_kernel(&g1, &g2).map_err(runtime)?;
            let oracle = match (f1, f2) {
                (Some(a), Some(b)) => Some(oracle::exact_kernel(&a, &b).map_err(runtime)?),
                _ => None,
            };
            let r = EstimateReport {
                value: k,
                n_samples: 0,
                epsilon: 0.0,
                delta: 0.0,
                range_bound: 0.0,
                seed: base,
                wall_seconds: start.elapsed().as_secs_f64(),
                std_error: 0.0,
            };
            out.push(record(sc, &params, &r, oracle));
        }
        Plan::Gurvits { vx, vx2, eta, sampler, params } => {
            let oracle = if ex.oracle {
                let m = vx.dim();
                let inputs: Vec<InputStateSpec> = eta.as_slice().iter().map(|&e| InputStateSpec::new(ModeState::SinglePhoton, e)).collect();
                let x = LonEncoding::new(inputs.clone(), vx.clone()).map_err(runtime)?;
                let x2 = LonEncoding::new(inputs, vx2.clone()).map_err(runtime)?;
                Some(oracle::lon_kernel(&x, &x2, m + 1).map_err(runtime)?)
            } else {
                None
            };
            for &seed in &seeds {
                let r = lossy_photonic_kernel_eps(&vx, &vx2, &eta, ex.epsilon, ex.delta, sampler, seed).map_err(runtime)?;
                out.push(record(sc, &params, &r, oracle));
            }
        }
        Plan::Depth { g, grid, params } => {
            let tau0 = nonclassical_depth(&g);
            for &eta in &grid {
                let start = Instant::now();
                let lossy = apply_loss(&g, &LossVector::uniform(eta, 1).map_err(runtime)?).map_err(runtime)?;
                let mut p = params.clone();
                param(&mut p, "eta", eta);
                param(&mut p, "tau0", tau0);
                let r = EstimateReport {
                    value: nonclassical_depth(&lossy),
                    n_samples: 0,
                    epsilon: 0.0,
                    delta: 0.0,
                    range_bound: 0.0,
                    seed: base,
                    wall_seconds: start.elapsed().as_secs_f64(),
                    std_error: 0.0,
                };
                out.push(record(sc, &p, &r, Some(eta * tau0)));
            }
        }
        Plan::Ridge { n_train, n_test, lambda, scale, s, params } => {
            for &seed in &seeds {
                out.push(ridge_demo(n_train, n_test, lambda, scale, s, ex.epsilon, ex.delta, seed, &params).map_err(runtime)?);
            }
        }
    }
    Ok(out)
}

fn target(x: f64) -> f64 {
    (2.0 * x).sin()
}

/// Coherent-state encoding x ↦ |scale·x⟩; kernels estimated by Algorithm 1
/// and compared with the exact kernel model on held-out points.
#[allow(clippy::too_many_arguments)]
fn ridge_demo(
    n_train: usize,
    n_test: usize,
    lambda: f64,
    scale: f64,
    s: f64,
    epsilon: f64,
    delta: f64,
    seed: u64,
    params: &Params,
) -> Result<Record, Error> {
    let start = Instant::now();
    let enc = |x: f64| prepare(&GaussianSpec::Coherent(vec![Complex64::new(scale * x, 0.0)]));
    let xs: Vec<f64> = (0..n_train).map(|i| -1.0 + 2.0 * i as f64 / (n_train.max(2) - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| target(x)).collect();
    let data = Dataset::new(xs.iter().map(|&x| enc(x)).collect::<Result<Vec<_>, _>>()?, ys.clone())?;
    let entry_seed = |i: usize, j: usize| seed.wrapping_mul(1_000_003).wrapping_add((i * 7919 + j) as u64);
    let k_est = {
        let idx: Vec<usize> = (0..n_train).collect();
        let d_idx = Dataset::new(idx, ys.clone())?;
        kernel_matrix(&d_idx, |&i, &j| {
            algorithm1_kernel(
                &Encoding::Gaussian(data.points[i].clone()),
                &Encoding::Gaussian(data.points[j].clone()),
                s,
                epsilon,
                delta,
                entry_seed(i, j),
            )
            .map(|r| r.value)
        })?
    };
    let k_exact = kernel_matrix(&data, exact_gaussian_kernel)?;
    let model_est = ridge_fit(&project_psd(&k_est), &ys, lambda)?;
    let model_exact = ridge_fit(&k_exact, &ys, lambda)?;
    let tests: Vec<f64> = (0..n_test).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / n_test as f64).collect();
    let mut mse = (0.0, 0.0);
    let mean_y = tests.iter().map(|&x| target(x)).sum::<f64>() / n_test as f64;
    let mut var = 0.0;
    for &x in &tests {
        let g = enc(x)?;
        let row: Vec<f64> = data.points.iter().map(|p| exact_gaussian_kernel(&g, p)).collect::<Result<_, _>>()?;
        let y = target(x);
        mse.0 += (predict(&model_est, &row)? - y).powi(2);
        mse.1 += (predict(&model_exact, &row)? - y).powi(2);
        var += (y - mean_y).powi(2);
    }
    let n = n_test as f64;
    let mut p = params.clone();
    param(&mut p, "baseline_variance", var / n);
    let r = EstimateReport {
        value: mse.0 / n,
        n_samples: 0,
        epsilon,
        delta,
        range_bound: 0.0,
        seed,
        wall_seconds: start.elapsed().as_secs_f64(),
        std_error: 0.0,
    };
    Ok(record(Scenario::RidgeDemo, &p, &r, Some(mse.1 / n)))
}

/// Serialize records as JSON lines.
pub fn write_report(records: &[Record], path: &Path) -> Result<(), RunError> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).map_err(runtime)?;
        buf.push(b'\n');
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(runtime)?;
    }
    fs::write(path, buf).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn read_report(path: &Path) -> Result<Vec<Record>, RunError> {
    let f = fs::File::open(path).map_err(|e| runtime(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(runtime)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| runtime(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Load, validate, execute and write a report. Returns the report path.
pub fn run(config_path: &Path, out: Option<&Path>, seed_override: Option<u64>) -> Result<PathBuf, RunError> {
    let cfg = load_config(config_path)?;
    let path = match (out, &cfg.experiment.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => PathBuf::from("report.jsonl"),
    };
    let records = run_config(&cfg, seed_override)?;
    write_report(&records, &path)?;
    Ok(path)
}

/// CSV columns written by `emit_plot_data`.
pub const PLOT_COLUMNS: [&str; 13] = [
    "scenario",
    "run",
    "seed",
    "estimate",
    "oracle_value",
    "abs_error",
    "epsilon",
    "delta",
    "within_epsilon",
    "n_samples",
    "range_bound",
    "wall_seconds",
    "params",
];

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Flatten a report into CSV with a header row. Returns the number of rows.
pub fn emit_plot_data(report: &Path, out: &Path) -> Result<usize, RunError> {
    let records = read_report(report)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(PLOT_COLUMNS).map_err(runtime)?;
    for (i, r) in records.iter().enumerate() {
        let err = r.oracle_value.map(|o| (r.estimate - o).abs());
        let params = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";");
        w.write_record([
            r.scenario.clone(),
            i.to_string(),
            r.seed.to_string(),
            fmt_float(r.estimate),
            r.oracle_value.map(fmt_float).unwrap_or_default(),
            err.map(fmt_float).unwrap_or_default(),
            fmt_float(r.epsilon),
            fmt_float(r.delta),
            err.map(|e| (e <= r.epsilon).to_string()).unwrap_or_default(),
            r.n_samples.to_string(),
            fmt_float(r.range_bound),
            fmt_float(r.wall_seconds),
            params,
        ])
        .map_err(runtime)?;
    }
    let bytes = w.into_inner().map_err(runtime)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(runtime)?;
    }
    let mut f = fs::File::create(out).map_err(|e| runtime(format!("cannot write {}: {e}", out.display())))?;
    f.write_all(&bytes).map_err(runtime)?;
    Ok(records.len())
}
