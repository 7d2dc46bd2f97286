// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

//! Small numerical helpers shared across modules: factorials, Gauss-Legendre
//! rules, polar quadrature and a few dense-matrix utilities.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const GL_ORDER: usize = 6;

/// Composite Gauss-Legendre rule for ∫₀ᴿ g(r) dr with `panels` equal panels.
fn radial_rule(radius: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(GL_ORDER);
    let h = radius / panels as f64;
    let mut out = Vec::with_capacity(panels * GL_ORDER);
    for p in 0..panels {
        let a = p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((a + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// ∫ f(α) d²α over the disc |α| ≤ radius, refining dyadically in both polar
/// directions until two successive levels agree to `tol` (relative).
pub(crate) fn polar_integral<F>(f: F, radius: f64, tol: f64, radial: bool) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    let mut panels = 16usize;
    let mut n_theta = 64usize;
    let max_levels = if radial { 14 } else { 7 };
    let eval_level = |panels: usize, n_theta: usize| -> f64 {
        let rule = radial_rule(radius, panels);
        if radial {
            return rule
                .iter()
                .map(|&(r, w)| w * r * f(Complex64::new(r, 0.0)))
                .sum::<f64>()
                * std::f64::consts::TAU;
        }
        let dtheta = std::f64::consts::TAU / n_theta as f64;
        let dirs: Vec<Complex64> = (0..n_theta)
            .map(|j| Complex64::from_polar(1.0, (j as f64 + 0.5) * dtheta))
            .collect();
        rule.iter()
            .map(|&(r, w)| w * r * dtheta * dirs.iter().map(|d| f(d * r)).sum::<f64>())
            .sum()
    };
    let mut prev = eval_level(panels, n_theta);
    for _ in 0..max_levels {
        panels *= 2;
        if !radial {
            n_theta *= 2;
        }
        let cur = eval_level(panels, n_theta);
        if !cur.is_finite() {
            return Err(Error::NonConvergence("non-finite integrand".into()));
        }
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergence(format!(
        "polar quadrature stalled at {prev:.10e} after {max_levels} refinements"
    )))
}

/// Grid search followed by zooming local grids for the extrema of a
/// real function on the disc |α| ≤ radius. Returns (min, max).
pub(crate) fn extrema_2d<F>(f: F, radius: f64, radial: bool) -> (f64, f64)
where
    F: Fn(Complex64) -> f64,
{
    let n = if radial { 4000 } else { 240 };
    let step = 2.0 * radius / n as f64;
    let points: Vec<Complex64> = if radial {
        (0..=n).map(|i| Complex64::new(i as f64 * step / 2.0, 0.0)).collect()
    } else {
        (0..=n)
            .flat_map(|i| {
                (0..=n).map(move |j| {
                    Complex64::new(-radius + i as f64 * step, -radius + j as f64 * step)
                })
            })
            .collect()
    };
    let best = |sign: f64| -> f64 {
        let (mut v, mut c) = points
            .iter()
            .map(|&z| (sign * f(z), z))
            .fold((f64::NEG_INFINITY, Complex64::new(0.0, 0.0)), |a, b| if b.0 > a.0 { b } else { a });
        let mut h = step;
        for _ in 0..40 {
            let centre = c;
            for i in -4..=4 {
                for j in -4..=4 {
                    if radial && j != 0 {
                        continue;
                    }
                    let z = centre + Complex64::new(i as f64 * h / 4.0, j as f64 * h / 4.0);
                    let fz = sign * f(z);
                    if fz > v {
                        v = fz;
                        c = z;
                    }
                }
            }
            h *= 0.5;
        }
        sign * v
    };
    (best(-1.0), best(1.0))
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Largest singular value of a complex matrix.
pub(crate) fn operator_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}

pub(crate) fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let p = m * m.adjoint() - DMatrix::<Complex64>::identity(n, n);
    p.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product of complex matrices (left factor most significant).
pub(crate) fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(6);
        let int = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert_relative_eq!(int(0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(int(10), 2.0 / 11.0, epsilon = 1e-14);
        assert!(int(7).abs() < 1e-14);
    }

    #[test]
    fn polar_integral_of_gaussian() {
        let f = |z: Complex64| (-z.norm_sqr()).exp() / std::f64::consts::PI;
        assert_relative_eq!(polar_integral(f, 8.0, 1e-10, true).unwrap(), 1.0, epsilon = 1e-10);
        let g = |z: Complex64| (-(z - 1.0).norm_sqr()).exp() / std::f64::consts::PI;
        assert_relative_eq!(polar_integral(g, 9.0, 1e-8, false).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_relative_eq!(ln_factorial(5), 120f64.ln(), epsilon = 1e-14);
    }
}
