use kpiwave::functionals::{
    chi, chi_with, energy, f_psi, lebesgue_norm, momentum, norm_x, norm_z,
    sobolev_anisotropic_check, ChiConvention, SobolevProbe,
};
use kpiwave::initial::InitialSpec;
use kpiwave::profiles::kdv_line;
use kpiwave::rng::CounterRng;
use kpiwave::spectral::derivative;
use kpiwave::{Axis, Grid, RealField, SpectralRep};
use num_complex::Complex64;
use proptest::prelude::*;

/// Zero-x-mean field with modes `1 ≤ |mx| ≤ k`, `|my| ≤ k`, identical as a
/// function on every grid that resolves it.
fn band_limited(grid: Grid, k: i64, seed: u64) -> RealField {
    let mut rng = CounterRng::new(seed);
    let mut spec = SpectralRep::zeros(grid);
    for my in -k..=k {
        for mx in 1..=k {
            let c = Complex64::new(rng.normal(), rng.normal()) * 0.1;
            spec.set_coeff(mx, my, c);
            spec.set_coeff(-mx, -my, c.conj());
        }
    }
    spec.to_real()
}

fn bumps(seed: u64) -> RealField {
    let grid = Grid::new(64, 64, 40.0, 40.0).unwrap();
    InitialSpec::GaussianBumps {
        count: 3,
        amplitude: 1.0,
        width: 2.0,
        spread: 4.0,
        seed,
    }
    .sample(&grid)
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `∫ f g h` by plain quadrature.
fn triple(f: &RealField, g: &RealField, h: &RealField) -> f64 {
    f.mul(g).unwrap().mul(h).unwrap().integral()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadrature_is_exact_for_band_limited_fields(seed in any::<u64>(), lx in 5.0f64..40.0, ly in 5.0f64..40.0) {
        let coarse = band_limited(Grid::new(32, 32, lx, ly).unwrap(), 3, seed);
        let fine = band_limited(Grid::new(64, 64, lx, ly).unwrap(), 3, seed);
        prop_assert!(rel(momentum(&fine), momentum(&coarse)) < 1e-10);
        prop_assert!(rel(energy(&fine).unwrap(), energy(&coarse).unwrap()) < 1e-10);
        prop_assert!(rel(f_psi(&fine, None).unwrap(), f_psi(&coarse, None).unwrap()) < 1e-10);
    }

    #[test]
    fn energy_splits_into_quadratic_and_cubic_parts(seed in any::<u64>(), lambda in -3.0f64..3.0) {
        let u = band_limited(Grid::new(32, 32, 20.0, 20.0).unwrap(), 4, seed);
        let (ep, em) = (energy(&u).unwrap(), energy(&u.scale(-1.0)).unwrap());
        let (q, k) = (0.5 * (ep + em), 0.5 * (ep - em));
        let scale = q.abs() + k.abs();
        for l in [2.0, lambda] {
            let e = energy(&u.scale(l)).unwrap();
            prop_assert!((e - (l * l * q + l * l * l * k)).abs() <= 1e-12 * scale * l.abs().max(1.0).powi(3));
        }
    }

    #[test]
    fn momentum_is_quadratic(seed in any::<u64>(), lambda in -3.0f64..3.0) {
        let u = band_limited(Grid::new(32, 16, 20.0, 10.0).unwrap(), 3, seed);
        prop_assert!(rel(momentum(&u.scale(lambda)), lambda * lambda * momentum(&u)) < 1e-13);
    }

    #[test]
    fn f_psi_coupling_is_additive(seed in any::<u64>(), c in 0.5f64..2.0) {
        let grid = Grid::new(256, 32, 96.0, 20.0).unwrap();
        let u = band_limited(grid, 3, seed);
        let psi = kdv_line(&grid, c).unwrap();
        let a = derivative(&derivative(&u, Axis::Y, 1).unwrap(), Axis::X, -1).unwrap();
        let b = derivative(&derivative(&a, Axis::Y, 1).unwrap(), Axis::X, -1).unwrap();
        let coupling = -5.0 / 3.0 * triple(&psi, &u, &b) - 5.0 / 6.0 * triple(&psi, &a, &a);
        let diff = f_psi(&u, Some(&psi)).unwrap() - f_psi(&u, None).unwrap();
        prop_assert!((diff - coupling).abs() <= 1e-10 * coupling.abs().max(1e-3));
    }

    #[test]
    fn chi2_has_real_integral(seed in any::<u64>()) {
        let u = band_limited(Grid::new(32, 32, 20.0, 20.0).unwrap(), 4, seed);
        let scale = u.l2_norm();
        prop_assert!(chi(&u, 2).unwrap().integral().im.abs() <= 1e-12 * scale);
        prop_assert!(chi_with(&u, 2, ChiConvention::Normalized).unwrap().integral().im.abs() <= 1e-12 * scale);
    }

    #[test]
    fn normalized_chi_integrals(seed in any::<u64>()) {
        let u = band_limited(Grid::new(32, 32, 20.0, 20.0).unwrap(), 3, seed);
        let m = momentum(&u);
        let e = energy(&u).unwrap();
        let f = f_psi(&u, None).unwrap();
        let c3 = chi_with(&u, 3, ChiConvention::Normalized).unwrap().integral().re;
        let c5 = chi_with(&u, 5, ChiConvention::Normalized).unwrap().integral().re;
        let c7 = chi_with(&u, 7, ChiConvention::Normalized).unwrap().integral().re;
        prop_assert!(rel(c3, m) < 1e-10);
        prop_assert!(rel(c5, -12.0 * e) < 1e-9);
        prop_assert!(rel(c7, 24.0 * f) < 1e-8);
    }

    #[test]
    fn norms_are_translation_invariant(seed in any::<u64>(), sx in 0usize..32, sy in 0usize..32) {
        let u = band_limited(Grid::new(32, 32, 20.0, 20.0).unwrap(), 4, seed);
        let g = *u.grid();
        let data = (0..g.len()).map(|i| u.get((i % 32 + sx) % 32, (i / 32 + sy) % 32)).collect();
        let v = RealField::from_samples(g, data).unwrap();
        prop_assert!(rel(norm_z(&v).unwrap(), norm_z(&u).unwrap()) < 1e-12);
        prop_assert!(rel(norm_x(&v).unwrap(), norm_x(&u).unwrap()) < 1e-12);
        prop_assert!(rel(energy(&v).unwrap(), energy(&u).unwrap()) < 1e-10);
        prop_assert!(rel(lebesgue_norm(&v, 4.0).unwrap(), lebesgue_norm(&u, 4.0).unwrap()) < 1e-12);
    }

    #[test]
    fn anisotropic_sobolev_holds(seed in any::<u64>()) {
        let u = bumps(seed);
        for p in [3.0, 4.0, 6.0] {
            let probe = sobolev_anisotropic_check(&u, p).unwrap();
            let rhs = probe.rhs(SobolevProbe::interpolated_constant(p));
            prop_assert!(probe.lhs <= rhs, "p = {p}: {} > {rhs}", probe.lhs);
        }
    }
}

#[test]
fn sobolev_rejects_unlocalized_fields() {
    let u = band_limited(Grid::new(32, 32, 20.0, 20.0).unwrap(), 2, 3);
    assert!(sobolev_anisotropic_check(&u, 6.0).is_err());
}

#[test]
fn lebesgue_norm_of_a_plane_wave() {
    let g = Grid::new(64, 16, 2.0 * std::f64::consts::PI, 3.0).unwrap();
    let u = RealField::from_fn(g, |x, _| x.sin());
    // ∫ sin² = π·ly, ∫ sin⁴ = 3π·ly/4 over one period in x.
    let ly = 3.0;
    assert!(
        rel(
            lebesgue_norm(&u, 2.0).unwrap(),
            (std::f64::consts::PI * ly).sqrt()
        ) < 1e-13
    );
    assert!(
        rel(
            lebesgue_norm(&u, 4.0).unwrap(),
            (0.75 * std::f64::consts::PI * ly).powf(0.25)
        ) < 1e-13
    );
    assert!(rel(lebesgue_norm(&u, f64::INFINITY).unwrap(), u.max_abs()) < 1e-15);
}
