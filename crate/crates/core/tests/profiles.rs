use std::f64::consts::PI;

use kpiwave::profiles::{
    kdv_line, traveling_residual, zaitsev, zaitsev_delta, zaitsev_grid, zaitsev_speed,
};
use kpiwave::spectral::{derivative, mixed_derivative_symbol};
use kpiwave::{Axis, Grid};
use proptest::prelude::*;

/// Closed-form transverse wavenumber, used only as an oracle.
fn delta_closed_form(alpha: f64, beta: f64) -> f64 {
    3f64.sqrt() * alpha * alpha / (1.0 - beta * beta).sqrt()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[test]
fn zaitsev_residual_sweep() {
    let mut worst = (0.0, 0.0, 0.0);
    let mut failures = vec![];
    for alpha in linspace(0.5, 2.0, 5) {
        for beta in linspace(0.0, 0.8, 5) {
            let c = zaitsev_speed(alpha, beta).unwrap();
            let delta = if beta == 0.0 {
                // δ is free in the line-soliton limit; any period works.
                1.0
            } else {
                zaitsev_delta(alpha, beta).unwrap()
            };
            let grid = zaitsev_grid(alpha, beta, delta).unwrap();
            let r = traveling_residual(&zaitsev(&grid, alpha, beta, delta).unwrap(), c);
            println!("alpha {alpha:.3} beta {beta:.1}: residual {r:.3e}");
            if r > worst.2 {
                worst = (alpha, beta, r);
            }
            if r >= 1e-7 || r.is_nan() {
                failures.push((alpha, beta, r));
            }
        }
    }
    println!(
        "worst residual {:.3e} at ({}, {})",
        worst.2, worst.0, worst.1
    );
    assert!(failures.is_empty(), "residual >= 1e-7 at {failures:?}");
}

#[test]
fn zaitsev_line_limit_is_kdv_pointwise() {
    for alpha in [0.5, 1.0, 1.5] {
        let grid = Grid::new(512, 16, 80.0 / alpha, 2.0 * PI).unwrap();
        let z = zaitsev(&grid, alpha, 0.0, 1.0).unwrap();
        let k = kdv_line(&grid, 4.0 * alpha * alpha).unwrap();
        let err = z.sub(&k).unwrap().max_abs();
        assert!(err <= 1e-14 * k.max_abs(), "alpha {alpha}: {err:e}");
    }
}

#[test]
fn zaitsev_peak_value() {
    let grid = Grid::new(256, 16, 64.0, 2.0 * PI / 3.0).unwrap();
    let z = zaitsev(&grid, 1.0, 0.5, 3.0).unwrap();
    // x = y = 0 sits at index (nx/2, ny/2).
    assert!((z.get(128, 8) - 24.0).abs() < 1e-12);
}

#[test]
fn kdv_line_residual_discriminates_speed() {
    let grid = Grid::new(512, 16, 80.0, 8.0).unwrap();
    let psi = kdv_line(&grid, 1.0).unwrap();
    assert!(traveling_residual(&psi, 1.0) < 1e-8);
    assert!(traveling_residual(&psi, 2.0) > 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn delta_matches_closed_form(alpha in 0.5f64..2.0, beta in 0.05f64..0.8) {
        let d = zaitsev_delta(alpha, beta).unwrap();
        let oracle = delta_closed_form(alpha, beta);
        prop_assert!((d - oracle).abs() <= 1e-10 * oracle, "{d} vs {oracle}");
    }

    #[test]
    fn zaitsev_derivatives_are_finite(alpha in 0.5f64..2.0, beta in -0.8f64..0.8) {
        let delta = delta_closed_form(alpha, beta);
        let grid = zaitsev_grid(alpha, beta, delta).unwrap();
        let z = zaitsev(&grid, alpha, beta, delta).unwrap();
        let spec = z.to_spectral();
        for ax in 0..=4 {
            for by in 0..=(4 - ax) {
                let d = spec.clone().with_symbol(mixed_derivative_symbol(ax, by)).to_real();
                prop_assert!(d.is_finite(), "d_x^{ax} d_y^{by} not finite");
            }
        }
    }

    #[test]
    fn zaitsev_is_y_periodic(alpha in 0.5f64..2.0, beta in -0.8f64..0.8) {
        let delta = delta_closed_form(alpha, beta);
        // Two periods: rows k and k + ny/2 are exactly one period apart.
        let grid = Grid::new(256, 32, 80.0 / alpha, 4.0 * PI / delta).unwrap();
        let z = zaitsev(&grid, alpha, beta, delta).unwrap();
        let mut worst = 0.0f64;
        for k in 0..16 {
            for j in 0..256 {
                worst = worst.max((z.get(j, k) - z.get(j, k + 16)).abs());
            }
        }
        prop_assert!(worst < 1e-12, "{worst:e}");
    }

    #[test]
    fn kdv_line_is_y_independent(c in 0.5f64..4.0) {
        let grid = Grid::new(256, 16, 160.0 / c.sqrt(), 10.0).unwrap();
        let psi = kdv_line(&grid, c).unwrap();
        let dy = derivative(&psi, Axis::Y, 1).unwrap();
        prop_assert!(dy.max_abs() <= 1e-12 * psi.max_abs());
    }
}
