// Copyright 2026 The qkpse Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qkpse::estimator::hoeffding_samples;
use qkpse::gaussian::{
    apply_loss, apply_lon, exact_gaussian_kernel, nonclassical_depth, random_gaussian, symplectic_form, GaussianState, LossVector,
    TransferMatrix,
};
use qkpse::permanent::ryser;
use qkpse::phase_space::{point_operator_diagonal, single_mode_point_operator, spqd_lossy_single_photon, spqd_lossy_cat};

fn gaussian(modes: usize, seed: u64) -> GaussianState {
    random_gaussian(modes, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn naive_permanent(a: &DMatrix<Complex64>) -> Complex64 {
    fn rec(a: &DMatrix<Complex64>, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == a.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..a.ncols() {
            if !used[j] {
                used[j] = true;
                acc += a[(row, j)] * rec(a, row + 1, used);
                used[j] = false;
            }
        }
        acc
    }
    rec(a, 0, &mut vec![false; a.ncols()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn loss_channels_compose(seed in any::<u64>(), modes in 1usize..4, e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let g = gaussian(modes, seed);
        let l = |e: f64| LossVector::uniform(e, modes).unwrap();
        let twice = apply_loss(&apply_loss(&g, &l(e1)).unwrap(), &l(e2)).unwrap();
        let once = apply_loss(&g, &l(e1 * e2)).unwrap();
        prop_assert!((twice.cov() - once.cov()).amax() < 1e-12);
        prop_assert!((twice.mean() - once.mean()).amax() < 1e-12);
    }

    #[test]
    fn networks_preserve_kernels(seed in any::<u64>(), modes in 1usize..4) {
        let (g1, g2) = (gaussian(modes, seed), gaussian(modes, seed ^ 0x5555));
        let v = TransferMatrix::haar(modes, seed.wrapping_add(1));
        let k = exact_gaussian_kernel(&g1, &g2).unwrap();
        let kv = exact_gaussian_kernel(&apply_lon(&g1, &v).unwrap(), &apply_lon(&g2, &v).unwrap()).unwrap();
        prop_assert!((k - kv).abs() < 1e-10 * k.max(1e-3));
        let s = v.symplectic();
        let om = symplectic_form(modes);
        prop_assert!((&s * &om * s.transpose() - &om).amax() < 1e-12);
        prop_assert!((&s * s.transpose() - DMatrix::identity(2 * modes, 2 * modes)).amax() < 1e-12);
    }

    #[test]
    fn gaussian_kernels_are_bounded(seed in any::<u64>(), modes in 1usize..4) {
        let (g1, g2) = (gaussian(modes, seed), gaussian(modes, !seed));
        let k = exact_gaussian_kernel(&g1, &g2).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&k));
        let p = exact_gaussian_kernel(&g1, &g1).unwrap();
        prop_assert!((p - g1.purity()).abs() < 1e-10);
        // Cauchy-Schwarz for the Hilbert-Schmidt inner product.
        let q = exact_gaussian_kernel(&g2, &g2).unwrap();
        prop_assert!(k * k <= p * q * (1.0 + 1e-10));
    }

    #[test]
    fn depth_shrinks_under_loss(seed in any::<u64>(), modes in 1usize..4, eta in 0.0f64..=1.0) {
        let g = gaussian(modes, seed);
        let lossy = apply_loss(&g, &LossVector::uniform(eta, modes).unwrap()).unwrap();
        prop_assert!(nonclassical_depth(&lossy) <= nonclassical_depth(&g) + 1e-12);
        prop_assert!((0.0..=0.5).contains(&nonclassical_depth(&g)));
    }

    #[test]
    fn photon_distribution_follows_loss_rescaling(eta in 0.05f64..=1.0, s in -0.9f64..0.9, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        // W^(s) of the lossy state is W^(s') of the lossless one at α/√η,
        // with s' = 1 - (1 - s)/η.
        let a = Complex64::new(re, im);
        let sp = 1.0 - (1.0 - s) / eta;
        let lhs = spqd_lossy_single_photon(eta, s, a).unwrap();
        let rhs = spqd_lossy_single_photon(1.0, sp, a / eta.sqrt()).unwrap() / eta;
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn cat_distribution_follows_loss_rescaling(eta in 0.2f64..=1.0, s in -0.9f64..0.0, g in 0.2f64..1.5, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let a = Complex64::new(re, im);
        let gamma = Complex64::new(g, 0.3 * g);
        let sp = 1.0 - (1.0 - s) / eta;
        prop_assume!(sp > -1e6);
        let lhs = spqd_lossy_cat(gamma, eta, s, a).unwrap();
        let rhs = spqd_lossy_cat(gamma, 1.0, sp, a / eta.sqrt()).unwrap() / eta;
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn point_operators_are_hermitian(s in -0.99f64..0.9, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let a = Complex64::new(re, im);
        let p = single_mode_point_operator(s, a, 12).unwrap();
        let scale = p.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!((&p.matrix - p.matrix.adjoint()).iter().all(|z| z.norm() < 1e-12 * scale));
        let diag = point_operator_diagonal(s, a, 12).unwrap();
        for (n, d) in diag.iter().enumerate() {
            prop_assert!((p.matrix[(n, n)].re - d).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn ryser_matches_definition(seed in any::<u64>(), n in 1usize..6) {
        let v = TransferMatrix::haar(n + 1, seed);
        let a = DMatrix::from_fn(n, n, |i, j| v.matrix()[(i, j)] * 1.7);
        let (r, d) = (ryser(&a), naive_permanent(&a));
        prop_assert!((r - d).norm() < 1e-12);
    }

    #[test]
    fn hoeffding_is_monotone(r in 0.1f64..10.0, e in 0.001f64..0.5, d in 0.001f64..0.5) {
        let n = hoeffding_samples(r, e, d).unwrap();
        prop_assert!(hoeffding_samples(r * 1.5, e, d).unwrap() >= n);
        prop_assert!(hoeffding_samples(r, e / 1.5, d).unwrap() >= n);
        prop_assert!(hoeffding_samples(r, e, d / 1.5).unwrap() >= n);
        let exact = r * r * (2.0 / d).ln() / (2.0 * e * e);
        prop_assert!(n as f64 >= exact && (n as f64) < exact + 1.0);
    }
}
