use kpiwave::dispersion::{
    admissible_q, check_window, convolve, decay_exponent_fit, kernel_g, strichartz_delta,
    strichartz_quotient,
};
use kpiwave::harness::Experiment;
use kpiwave::initial::InitialSpec;
use kpiwave::solver::propagate_linear;
use kpiwave::{Grid, RealField};
use proptest::prelude::*;

fn noise(grid: &Grid, seed: u64) -> RealField {
    InitialSpec::BandNoise {
        amplitude: 1.0,
        kmax: 2.0,
        seed,
    }
    .sample(grid)
    .unwrap()
}

fn roll(f: &RealField, sx: usize, sy: usize) -> RealField {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let data = (0..g.len())
        .map(|i| f.get((i % nx + sx) % nx, (i / nx + sy) % ny))
        .collect();
    RealField::from_samples(g, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Two independent routes to the free evolution: convolution with the
    /// kernel versus the Fourier multiplier.
    #[test]
    fn kernel_convolution_is_the_free_group(seed in any::<u64>(), t in prop_oneof![-3.0f64..-0.01, 0.01f64..3.0]) {
        let g = Grid::new(32, 32, 20.0, 20.0).unwrap();
        let phi = noise(&g, seed);
        let a = convolve(&kernel_g(&g, t).unwrap(), &phi).unwrap();
        let b = propagate_linear(&phi, t, 0.0).unwrap();
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-10 * phi.max_abs());
    }

    #[test]
    fn r2_quotient_is_one(seed in any::<u64>(), t_end in 0.1f64..5.0, nt in 2usize..40) {
        let g = Grid::new(32, 32, 20.0, 20.0).unwrap();
        let q = strichartz_quotient(&noise(&g, seed), f64::INFINITY, 2.0, 0.0, t_end, nt).unwrap();
        prop_assert!((q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn quotients_are_translation_invariant(seed in any::<u64>(), sx in 0usize..32, sy in 0usize..32, r in prop_oneof![Just(f64::INFINITY), 2.5f64..10.0]) {
        let g = Grid::new(32, 32, 20.0, 20.0).unwrap();
        let phi = noise(&g, seed);
        let q = admissible_q(r, 0.3).unwrap();
        let a = strichartz_quotient(&phi, q, r, 0.3, 1.0, 16).unwrap();
        let b = strichartz_quotient(&roll(&phi, sx, sy), q, r, 0.3, 1.0, 16).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn admissible_pairs_satisfy_the_relation(r in 2.0f64..1e3, eps in 0.0f64..0.5) {
        match admissible_q(r, eps) {
            Ok(q) => {
                let lhs = if q.is_infinite() { 0.0 } else { 2.0 / q };
                prop_assert!((lhs - (1.0 - eps / 3.0) * strichartz_delta(r)).abs() < 1e-14);
            }
            Err(_) => prop_assert!((1.0 - eps / 3.0) * strichartz_delta(r) >= 1.0),
        }
    }
}

#[test]
fn non_admissible_q_is_rejected() {
    let g = Grid::new(32, 32, 20.0, 20.0).unwrap();
    assert!(strichartz_quotient(&noise(&g, 1), 3.0, f64::INFINITY, 0.3, 1.0, 8).is_err());
    assert!(admissible_q(1.5, 0.0).is_err());
    assert!(admissible_q(4.0, 0.7).is_err());
}

#[test]
fn decay_flattens_with_smoothing() {
    let cfg = Experiment::DispersiveDecay.default_config().unwrap();
    let phi = cfg.initial.sample(&cfg.grid).unwrap();
    let ts: Vec<f64> = (0..8).map(|i| 0.5 * 8f64.powf(i as f64 / 7.0)).collect();
    let plain = decay_exponent_fit(&phi, 0.0, &ts).unwrap();
    let smoothed = decay_exponent_fit(&phi, 0.3, &ts).unwrap();
    assert!(smoothed > plain, "{smoothed} <= {plain}");
}

#[test]
fn window_violation_is_reported() {
    let g = Grid::new(128, 32, 40.0, 40.0).unwrap();
    let phi = InitialSpec::BandPulse {
        amplitude: 1.0,
        a: 2.5,
        b: 1.5,
    }
    .sample(&g)
    .unwrap();
    assert!(matches!(
        check_window(&phi, 4.0),
        Err(kpiwave::Error::Window(_))
    ));
    assert!(check_window(&phi, 0.1).is_ok());
}
