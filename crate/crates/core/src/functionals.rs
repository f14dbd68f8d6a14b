//! Norms, conserved and almost-conserved functionals, inequality probes and
//! the χ_n conservation-law recursion.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::par;
use crate::spectral::{
    derivative_symbol, fractional_symbol, mixed_derivative_symbol, Axis, FracKind, Grid, RealField,
    SpectralRep, Wavevector,
};

/// Largest χ index supported by [`chi`].
pub const CHI_MAX: usize = 7;

/// Boundary-to-peak ratio below which a field counts as localized.
pub const LOCALIZED_TOL: f64 = 1e-8;

/// `(∫|f|^p)^{1/p}`; `p = ∞` gives the grid maximum.
pub fn lebesgue_norm(f: &RealField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(invalid("p", format!("{p} must lie in [1, ∞]")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    if p == 2.0 {
        return Ok(f.l2_norm());
    }
    Ok(f.integrate_by(|v| v.abs().powf(p)).powf(1.0 / p))
}

fn weighted_norm(spec: &SpectralRep, weight: impl Fn(Wavevector) -> f64 + Sync + Send) -> f64 {
    let grid = *spec.grid();
    let rows = par::map_rows(spec.coeffs(), grid.nx(), |k, row| {
        let vals: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let w = weight(grid.wavevector(j, k));
                w * w * c.norm_sqr()
            })
            .collect();
        par::pairwise_sum(&vals)
    });
    (grid.area() * par::pairwise_sum(&rows)).sqrt()
}

/// Norm of `H^s_{-1}`: weight `(1 + |ξ|⁻¹)(1 + (|ξ| + |η|)²)^{s/2}`.
pub fn norm_hs_minus1(f: &RealField, s: f64) -> Result<f64> {
    let spec = f.to_spectral();
    spec.require_zero_xmean()?;
    Ok(weighted_norm(&spec, |w| {
        if w.mx == 0 {
            return 0.0;
        }
        let a = w.xi.abs();
        (1.0 + 1.0 / a) * (1.0 + (a + w.eta.abs()).powi(2)).powf(0.5 * s)
    }))
}

/// `‖J_x^s f‖_{L²}`, the `H^{s,0}` norm.
pub fn hs0_norm(f: &RealField, s: f64) -> f64 {
    weighted_norm(&f.to_spectral(), fractional_symbol(FracKind::J, s))
}

/// Spectral derivatives shared by the functionals; `a = ∂x⁻¹u_y`,
/// `b = ∂x⁻²u_yy`.
pub(crate) struct Derivatives {
    pub u: RealField,
    pub ux: RealField,
    pub uxx: RealField,
    pub uy: RealField,
    pub a: RealField,
    pub b: RealField,
}

impl Derivatives {
    pub fn new(u: &RealField) -> Result<Self> {
        let spec = u.to_spectral();
        spec.require_zero_xmean()?;
        let d = |ax: i32, by: i32| {
            spec.clone()
                .with_symbol(mixed_derivative_symbol(ax, by))
                .to_real()
        };
        Ok(Self {
            u: u.clone(),
            ux: d(1, 0),
            uxx: d(2, 0),
            uy: d(0, 1),
            a: d(-1, 1),
            b: d(-2, 2),
        })
    }
}

/// `‖f‖ + ‖∂x⁻²f_yy‖ + ‖f_xx‖`.
pub fn norm_z(f: &RealField) -> Result<f64> {
    let d = Derivatives::new(f)?;
    Ok(d.u.l2_norm() + d.b.l2_norm() + d.uxx.l2_norm())
}

/// `‖f‖ + ‖∂x⁻¹f_y‖ + ‖f_xx‖ + ‖f_y‖`.
pub fn norm_x(f: &RealField) -> Result<f64> {
    let d = Derivatives::new(f)?;
    Ok(d.u.l2_norm() + d.a.l2_norm() + d.uxx.l2_norm() + d.uy.l2_norm())
}

/// `M(u) = ∫u²`.
pub fn momentum(u: &RealField) -> f64 {
    u.integrate_by(|v| v * v)
}

/// `E(u) = ½∫u_x² + ½∫(∂x⁻¹u_y)² − ⅙∫u³`.
pub fn energy(u: &RealField) -> Result<f64> {
    let d = Derivatives::new(u)?;
    Ok(energy_from(&d))
}

fn energy_from(d: &Derivatives) -> f64 {
    0.5 * momentum(&d.ux) + 0.5 * momentum(&d.a) - d.u.integrate_by(|v| v * v * v) / 6.0
}

fn integral3(a: &RealField, b: &RealField, c: &RealField) -> f64 {
    let g = a.grid();
    let vals: Vec<f64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .zip(c.samples())
        .map(|((x, y), z)| x * y * z)
        .collect();
    g.cell_area() * par::sum_rows_by(&vals, g.nx(), |v| *v)
}

/// The almost-conserved functional `F^ψ`; `psi = None` gives the KP-I
/// invariant `F`.
pub fn f_psi(u: &RealField, psi: Option<&RealField>) -> Result<f64> {
    let d = Derivatives::new(u)?;
    f_psi_from(&d, psi)
}

pub(crate) fn f_psi_from(d: &Derivatives, psi: Option<&RealField>) -> Result<f64> {
    let (u, a, b) = (&d.u, &d.a, &d.b);
    let bulk = 1.5 * momentum(&d.uxx) + 5.0 * momentum(&d.uy) + 5.0 / 6.0 * momentum(b)
        - 5.0 / 6.0 * integral3(u, u, b)
        - 5.0 / 6.0 * integral3(u, a, a)
        + 1.25 * integral3(u, u, &d.uxx)
        + 5.0 / 24.0 * u.integrate_by(|v| v.powi(4));
    let coupling = match psi {
        None => 0.0,
        Some(psi) => {
            if psi.grid() != u.grid() {
                return Err(Error::GridMismatch);
            }
            -5.0 / 3.0 * integral3(psi, u, b) - 5.0 / 6.0 * integral3(psi, a, a)
        }
    };
    Ok(bulk + coupling)
}

/// Ingredients of the anisotropic Sobolev inequality
/// `‖u‖_p ≤ C ‖u‖^{(6−p)/2p} ‖u_x‖^{(p−2)/p} ‖∂x⁻¹u_y‖^{(p−2)/2p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevProbe {
    pub p: f64,
    /// `∫|u|^p`.
    pub lhs: f64,
    /// `(‖u‖, ‖u_x‖, ‖∂x⁻¹u_y‖)`.
    pub factors: (f64, f64, f64),
}

impl SobolevProbe {
    /// `16^{(p−2)/4p}`: Hölder interpolation between `p = 2` (constant 1)
    /// and the `p = 6` bound `∫u⁶ ≤ 16‖u_x‖⁴‖∂x⁻¹u_y‖²`.
    pub fn interpolated_constant(p: f64) -> f64 {
        16f64.powf((p - 2.0) / (4.0 * p))
    }

    /// Right-hand side raised to the power p, comparable with `lhs`.
    pub fn rhs(&self, constant: f64) -> f64 {
        let p = self.p;
        let (l2, ux, a) = self.factors;
        constant.powf(p) * l2.powf((6.0 - p) / 2.0) * ux.powf(p - 2.0) * a.powf((p - 2.0) / 2.0)
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs(Self::interpolated_constant(self.p))
    }
}

/// Largest boundary sample relative to the field maximum.
pub fn boundary_ratio(f: &RealField) -> f64 {
    let g = f.grid();
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let (nx, ny) = (g.nx(), g.ny());
    let edge_x = (0..ny).map(|k| f.get(0, k).abs());
    let edge_y = (0..nx).map(|j| f.get(j, 0).abs());
    edge_x.chain(edge_y).fold(0.0, f64::max) / peak
}

pub fn sobolev_anisotropic_check(u: &RealField, p: f64) -> Result<SobolevProbe> {
    if !(2.0..=6.0).contains(&p) {
        return Err(invalid("p", format!("{p} outside [2, 6]")));
    }
    let ratio = boundary_ratio(u);
    if ratio >= LOCALIZED_TOL {
        return Err(invalid(
            "u",
            format!("field is not localized: boundary/peak = {ratio:.2e}"),
        ));
    }
    let d = Derivatives::new(u)?;
    Ok(SobolevProbe {
        p,
        lhs: u.integrate_by(|v| v.abs().powf(p)),
        factors: (d.u.l2_norm(), d.ux.l2_norm(), d.a.l2_norm()),
    })
}

/// Index convention for the χ_n recursion.
///
/// `Printed` uses the operator `∂x + i∂x⁻¹∂y` and seeds
/// `χ₂ = u + i∂x⁻¹u_y`. `Normalized` uses `D = √6∂x + i√2∂x⁻¹∂y` and
/// `χ₂ = Dχ₁`; with it `∫χ₃ = M`, `∫χ₅ = −12E` and `∫χ₇ = 24F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiConvention {
    #[default]
    Printed,
    Normalized,
}

impl ChiConvention {
    fn weights(self) -> (f64, f64) {
        match self {
            Self::Printed => (1.0, 1.0),
            Self::Normalized => (6f64.sqrt(), 2f64.sqrt()),
        }
    }
}

/// A complex χ_n density on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiField {
    grid: Grid,
    samples: Vec<Complex64>,
    n: usize,
}

impl ChiField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
    pub fn index(&self) -> usize {
        self.n
    }

    pub fn integral(&self) -> Complex64 {
        let re = par::sum_rows_by(&self.samples, self.grid.nx(), |c| c.re);
        let im = par::sum_rows_by(&self.samples, self.grid.nx(), |c| c.im);
        Complex64::new(re, im) * self.grid.cell_area()
    }
}

fn chi_operator(samples: &[Complex64], grid: Grid, mu: f64, kappa: f64) -> Vec<Complex64> {
    let spec = SpectralRep::from_complex_samples(grid, samples).expect("grid-sized");
    spec.with_symbol(move |w| {
        if w.mx == 0 || w.is_nyquist() {
            return Complex64::default();
        }
        Complex64::new(0.0, mu * w.xi + kappa * w.eta / w.xi)
    })
    .to_complex_samples()
}

/// `χ_1, …, χ_n` under the chosen convention.
pub fn chi_sequence(u: &RealField, n: usize, conv: ChiConvention) -> Result<Vec<ChiField>> {
    if n == 0 || n > CHI_MAX {
        return Err(invalid("n", format!("{n} outside 1..={CHI_MAX}")));
    }
    u.to_spectral().require_zero_xmean()?;
    let grid = *u.grid();
    let (mu, kappa) = conv.weights();
    let mut seq: Vec<Vec<Complex64>> = vec![u.samples().iter().map(|&v| v.into()).collect()];
    if n >= 2 {
        let chi2 = match conv {
            ChiConvention::Printed => {
                let a = chi_operator(&seq[0], grid, 0.0, 1.0);
                seq[0].iter().zip(&a).map(|(u, a)| u + a).collect()
            }
            ChiConvention::Normalized => chi_operator(&seq[0], grid, mu, kappa),
        };
        seq.push(chi2);
    }
    for m in 3..=n {
        // 1-based: χ_m = Σ_{k=1}^{m−2} χ_k χ_{m−1−k} + Dχ_{m−1}
        let mut next = chi_operator(&seq[m - 2], grid, mu, kappa);
        for k in 1..=m - 2 {
            let (a, b) = (&seq[k - 1], &seq[m - 2 - k]);
            next.iter_mut()
                .zip(a.iter().zip(b))
                .for_each(|(o, (x, y))| *o += x * y);
        }
        seq.push(next);
    }
    Ok(seq
        .into_iter()
        .enumerate()
        .map(|(i, samples)| ChiField {
            grid,
            samples,
            n: i + 1,
        })
        .collect())
}

pub fn chi_with(u: &RealField, n: usize, conv: ChiConvention) -> Result<ChiField> {
    Ok(chi_sequence(u, n, conv)?.pop().expect("n >= 1"))
}

/// χ_n under the printed convention.
pub fn chi(u: &RealField, n: usize) -> Result<ChiField> {
    chi_with(u, n, ChiConvention::Printed)
}

/// `‖J_x^s u‖_∞ / (‖u‖_∞ + ‖u_x‖_∞)`.
pub fn jx_linf_ratio(u: &RealField, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} outside (0, 1)")));
    }
    let spec = u.to_spectral();
    let ux = spec
        .clone()
        .with_symbol(derivative_symbol(Axis::X, 1))
        .to_real();
    let den = u.max_abs() + ux.max_abs();
    if den == 0.0 {
        return Err(invalid("u", "field is identically zero"));
    }
    let js = spec
        .with_real_symbol(fractional_symbol(FracKind::J, s))
        .to_real();
    Ok(js.max_abs() / den)
}

/// One time sample of every diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalReport {
    pub t: f64,
    pub m: f64,
    pub e: f64,
    pub fpsi: f64,
    pub z_norm: f64,
    pub x_norm: f64,
    pub hs0_norm: f64,
    pub linf_u: f64,
    pub linf_ux: f64,
    pub linf_uy: f64,
}

impl FunctionalReport {
    /// Evaluates every diagnostic of `v` at time `t`, with `H^{s,0}` index `s`.
    pub fn compute(t: f64, v: &RealField, psi: Option<&RealField>, s: f64) -> Result<Self> {
        let d = Derivatives::new(v)?;
        let report = Self {
            t,
            m: momentum(v),
            e: energy_from(&d),
            fpsi: f_psi_from(&d, psi)?,
            z_norm: d.u.l2_norm() + d.b.l2_norm() + d.uxx.l2_norm(),
            x_norm: d.u.l2_norm() + d.a.l2_norm() + d.uxx.l2_norm() + d.uy.l2_norm(),
            hs0_norm: hs0_norm(v, s),
            linf_u: v.max_abs(),
            linf_ux: d.ux.max_abs(),
            linf_uy: d.uy.max_abs(),
        };
        if report.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(0));
        }
        Ok(report)
    }

    /// Values in CSV column order.
    pub fn values(&self) -> [f64; 10] {
        [
            self.t,
            self.m,
            self.e,
            self.fpsi,
            self.z_norm,
            self.x_norm,
            self.hs0_norm,
            self.linf_u,
            self.linf_ux,
            self.linf_uy,
        ]
    }

    pub fn from_values(v: [f64; 10]) -> Self {
        Self {
            t: v[0],
            m: v[1],
            e: v[2],
            fpsi: v[3],
            z_norm: v[4],
            x_norm: v[5],
            hs0_norm: v[6],
            linf_u: v[7],
            linf_ux: v[8],
            linf_uy: v[9],
        }
    }
}
