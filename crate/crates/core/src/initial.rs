//! Seeded initial-data families. Every family is projected onto the
//! zero-x-mean subspace after sampling.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::rng::CounterRng;
use crate::spectral::{project_zero_xmean, Grid, RealField, SpectralRep};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Zero,
    /// `A·√(2e)·(x̃/w)·exp(−(x̃² + ỹ²)/w²)` with `x̃ = x − x0`, `ỹ = y − y0`;
    /// peak value `A`.
    GaussianDerivative {
        amplitude: f64,
        width: f64,
        x0: f64,
        y0: f64,
    },
    /// Sum of `count` anisotropic Gaussian-derivative bumps with seeded
    /// amplitudes (normal, scaled by `amplitude`), widths in
    /// `[width/2, width]` per axis and centers in `[−spread, spread]²`.
    GaussianBumps {
        count: usize,
        amplitude: f64,
        width: f64,
        spread: f64,
        seed: u64,
    },
    /// Normal coefficients on `0 < |ξ| ≤ kmax`, `|η| ≤ kmax`, Hermitian
    /// symmetrized and scaled to unit L² norm times `amplitude`.
    BandNoise {
        amplitude: f64,
        kmax: f64,
        seed: u64,
    },
    /// Spectrum `A·exp(−(ξ/a)⁸ − (η/b)⁸)` on `ξ ≠ 0`, normalized to peak
    /// value `A` in physical space.
    BandPulse {
        amplitude: f64,
        a: f64,
        b: f64,
    },
}

impl InitialSpec {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::GaussianDerivative { .. } => "gaussian_derivative",
            Self::GaussianBumps { .. } => "gaussian_bumps",
            Self::BandNoise { .. } => "band_noise",
            Self::BandPulse { .. } => "band_pulse",
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<RealField> {
        match *self {
            Self::Zero => Ok(RealField::zeros(*grid)),
            Self::GaussianDerivative {
                amplitude,
                width,
                x0,
                y0,
            } => {
                positive("width", width)?;
                let k = amplitude * (2.0 * std::f64::consts::E).sqrt();
                let f = RealField::from_fn(*grid, move |x, y| {
                    let (sx, sy) = ((x - x0) / width, (y - y0) / width);
                    k * sx * (-(sx * sx + sy * sy)).exp()
                });
                Ok(project_zero_xmean(&f))
            }
            Self::GaussianBumps {
                count,
                amplitude,
                width,
                spread,
                seed,
            } => {
                positive("width", width)?;
                let mut rng = CounterRng::new(seed);
                let bumps: Vec<[f64; 5]> = (0..count)
                    .map(|_| {
                        [
                            amplitude * rng.normal(),
                            rng.uniform_in(0.5 * width, width),
                            rng.uniform_in(0.5 * width, width),
                            rng.uniform_in(-spread, spread),
                            rng.uniform_in(-spread, spread),
                        ]
                    })
                    .collect();
                let f = RealField::from_fn(*grid, move |x, y| {
                    bumps
                        .iter()
                        .map(|&[a, wx, wy, cx, cy]| {
                            let (sx, sy) = ((x - cx) / wx, (y - cy) / wy);
                            a * sx * (-(sx * sx + sy * sy)).exp()
                        })
                        .sum()
                });
                Ok(project_zero_xmean(&f))
            }
            Self::BandNoise {
                amplitude,
                kmax,
                seed,
            } => {
                positive("kmax", kmax)?;
                let mut rng = CounterRng::new(seed);
                let mut spec = SpectralRep::zeros(*grid);
                let (hx, hy) = ((grid.nx() / 2) as i64, (grid.ny() / 2) as i64);
                // Draw on the half-plane mx > 0 and mirror.
                for my in -hy + 1..hy {
                    for mx in 1..hx {
                        let w =
                            grid.wavevector(mx as usize, my.rem_euclid(grid.ny() as i64) as usize);
                        if w.xi.abs() > kmax || w.eta.abs() > kmax {
                            continue;
                        }
                        let c = Complex64::new(rng.normal(), rng.normal());
                        spec.set_coeff(mx, my, c);
                        spec.set_coeff(-mx, -my, c.conj());
                    }
                }
                let norm = spec.l2_norm();
                if norm == 0.0 {
                    return Err(invalid("kmax", format!("{kmax} leaves no resolved modes")));
                }
                Ok(spec.to_real().scale(amplitude / norm))
            }
            Self::BandPulse { amplitude, a, b } => {
                positive("a", a)?;
                positive("b", b)?;
                let spec = SpectralRep::from_symbol(*grid, move |w| {
                    if w.mx == 0 || w.is_nyquist() {
                        Complex64::default()
                    } else {
                        Complex64::new((-(w.xi / a).powi(8) - (w.eta / b).powi(8)).exp(), 0.0)
                    }
                });
                let f = spec.to_real();
                let peak = f.max_abs();
                Ok(f.scale(amplitude / peak))
            }
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} must be positive")))
    }
}
