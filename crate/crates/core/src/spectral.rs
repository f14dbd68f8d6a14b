//! Periodic grid, discrete Fourier pair and Fourier-multiplier operators.
//!
//! Fields live on an `nx × ny` periodic box `[-lx/2, lx/2) × [-ly/2, ly/2)`
//! sampled row-major with `y` as the slow index. Spectral coefficients are
//! stored in FFT order and normalized so that `coeff(ξ, η)` approximates
//! `(1/(lx·ly)) ∫ f e^{-i(xξ + yη)}`; with this convention Parseval reads
//! `‖f‖²_{L²} = lx·ly·Σ|coeff|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{invalid, Error, Result};
use crate::{fft, par};

/// Relative mass on the ξ = 0 plane above which a field is treated as having
/// nonzero x-mean.
pub const XMEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be a power of two and at least 8"
                )));
            }
        }
        for (name, l) in [("lx", lx), ("ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Same sample counts with new box lengths.
    pub fn with_lengths(&self, lx: f64, ly: f64) -> Result<Self> {
        Self::new(self.nx, self.ny, lx, ly)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Physical x coordinate of column `j`.
    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.lx + j as f64 * self.dx()
    }

    /// Physical y coordinate of row `k`.
    pub fn y(&self, k: usize) -> f64 {
        -0.5 * self.ly + k as f64 * self.dy()
    }

    /// Signed mode number of FFT column `j`, in `[-nx/2, nx/2)`.
    pub fn mode_x(&self, j: usize) -> i64 {
        signed_mode(j, self.nx)
    }

    pub fn mode_y(&self, k: usize) -> i64 {
        signed_mode(k, self.ny)
    }

    pub fn xi(&self, j: usize) -> f64 {
        2.0 * PI * self.mode_x(j) as f64 / self.lx
    }

    pub fn eta(&self, k: usize) -> f64 {
        2.0 * PI * self.mode_y(k) as f64 / self.ly
    }

    /// x-wavenumbers in ascending order.
    pub fn xi_sorted(&self) -> Vec<f64> {
        let h = (self.nx / 2) as i64;
        (-h..h).map(|m| 2.0 * PI * m as f64 / self.lx).collect()
    }

    pub fn eta_sorted(&self) -> Vec<f64> {
        let h = (self.ny / 2) as i64;
        (-h..h).map(|m| 2.0 * PI * m as f64 / self.ly).collect()
    }

    /// Largest |ξ| on the lattice (the Nyquist wavenumber).
    pub fn xi_max(&self) -> f64 {
        PI * self.nx as f64 / self.lx
    }

    pub fn wavevector(&self, j: usize, k: usize) -> Wavevector {
        Wavevector {
            xi: self.xi(j),
            eta: self.eta(k),
            mx: self.mode_x(j),
            my: self.mode_y(k),
            nyquist_x: j == self.nx / 2,
            nyquist_y: k == self.ny / 2,
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n == self.len() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: n,
            })
        }
    }
}

fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// One lattice point of the spectral grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    pub xi: f64,
    pub eta: f64,
    pub mx: i64,
    pub my: i64,
    pub nyquist_x: bool,
    pub nyquist_y: bool,
}

impl Wavevector {
    pub fn is_nyquist(&self) -> bool {
        self.nyquist_x || self.nyquist_y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// A real scalar field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    data: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Self {
        let mut data = vec![0.0; grid.len()];
        par::for_each_row(&mut data, grid.nx, |k, row| {
            let y = grid.y(k);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(j), y);
            }
        });
        Self { grid, data }
    }

    pub fn from_samples(grid: Grid, data: Vec<f64>) -> Result<Self> {
        grid.check_len(data.len())?;
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn samples(&self) -> &[f64] {
        &self.data
    }
    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[k * self.grid.nx + j]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Self {
        let mut out = self.clone();
        par::for_each_row(&mut out.data, self.grid.nx, |_, row| {
            row.iter_mut().for_each(|v| *v = f(*v))
        });
        out
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        par::zip_apply(&mut out.data, &other.data, |a, b| *a = f(*a, *b));
        Ok(out)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    /// Trapezoidal quadrature of `g(f)` over the periodic box.
    pub fn integrate_by(&self, g: impl Fn(f64) -> f64 + Sync + Send) -> f64 {
        self.grid.cell_area() * par::sum_rows_by(&self.data, self.grid.nx, |v| g(*v))
    }

    pub fn integral(&self) -> f64 {
        self.integrate_by(|v| v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_by(|v| v * v).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        par::max_rows_by(&self.data, self.grid.nx, |v| v.abs())
    }

    pub fn to_spectral(&self) -> SpectralRep {
        to_spectral(self)
    }
}

/// Complex Fourier coefficients on a [`Grid`], FFT-ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRep {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralRep {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.check_len(coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    /// Builds coefficients from a function of the wavevector.
    pub fn from_symbol(grid: Grid, f: impl Fn(Wavevector) -> Complex64 + Sync + Send) -> Self {
        let mut out = Self::zeros(grid);
        out.apply_assign(|w, _| f(w));
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    fn index(&self, mx: i64, my: i64) -> Option<usize> {
        let (nx, ny) = (self.grid.nx as i64, self.grid.ny as i64);
        if mx < -nx / 2 || mx >= nx / 2 || my < -ny / 2 || my >= ny / 2 {
            return None;
        }
        let j = mx.rem_euclid(nx) as usize;
        let k = my.rem_euclid(ny) as usize;
        Some(k * self.grid.nx + j)
    }

    /// Coefficient at signed mode numbers `(mx, my)`; zero outside the lattice.
    pub fn coeff(&self, mx: i64, my: i64) -> Complex64 {
        self.index(mx, my)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn set_coeff(&mut self, mx: i64, my: i64, value: Complex64) {
        if let Some(i) = self.index(mx, my) {
            self.coeffs[i] = value;
        }
    }

    fn apply_assign(&mut self, f: impl Fn(Wavevector, Complex64) -> Complex64 + Sync + Send) {
        let grid = self.grid;
        par::for_each_row(&mut self.coeffs, grid.nx, |k, row| {
            for (j, c) in row.iter_mut().enumerate() {
                *c = f(grid.wavevector(j, k), *c);
            }
        });
    }

    /// Multiplies every coefficient by `symbol(wavevector)`.
    pub fn apply(&mut self, symbol: impl Fn(Wavevector) -> Complex64 + Sync + Send) {
        self.apply_assign(|w, c| c * symbol(w));
    }

    /// Multiplies by a real symbol.
    pub fn apply_real(&mut self, symbol: impl Fn(Wavevector) -> f64 + Sync + Send) {
        self.apply_assign(|w, c| c * symbol(w));
    }

    /// Zeroes coefficients where `keep` is false.
    pub fn retain(&mut self, keep: impl Fn(Wavevector) -> bool + Sync + Send) {
        self.apply_assign(|w, c| if keep(w) { c } else { Complex64::default() });
    }

    pub fn with_symbol(mut self, symbol: impl Fn(Wavevector) -> Complex64 + Sync + Send) -> Self {
        self.apply(symbol);
        self
    }

    pub fn with_real_symbol(mut self, symbol: impl Fn(Wavevector) -> f64 + Sync + Send) -> Self {
        self.apply_real(symbol);
        self
    }

    pub fn zero_xmean(&mut self) {
        self.retain(|w| w.mx != 0);
    }

    /// `Σ|c|²` over the whole lattice.
    pub fn energy(&self) -> f64 {
        par::sum_rows_by(&self.coeffs, self.grid.nx, |c| c.norm_sqr())
    }

    /// L² norm of the represented field, via Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.area() * self.energy()).sqrt()
    }

    /// Fraction of the L² mass carried by the ξ = 0 plane.
    pub fn xmean_defect(&self) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let plane: f64 = (0..self.grid.ny)
            .map(|k| self.coeffs[k * self.grid.nx].norm_sqr())
            .sum();
        (plane / total).sqrt()
    }

    pub fn require_zero_xmean(&self) -> Result<()> {
        let defect = self.xmean_defect();
        if defect > XMEAN_TOL {
            Err(Error::NonzeroXMean { defect })
        } else {
            Ok(())
        }
    }

    /// Inverse transform without discarding the imaginary part.
    pub fn to_complex_samples(&self) -> Vec<Complex64> {
        let grid = self.grid;
        let mut data = self.coeffs.clone();
        par::for_each_row(&mut data, grid.nx, |k, row| {
            for (j, c) in row.iter_mut().enumerate() {
                if (j + k) % 2 == 1 {
                    *c = -*c;
                }
            }
        });
        fft::fft2(&mut data, grid.nx, grid.ny, FftDirection::Inverse);
        data
    }

    /// Forward transform of complex samples.
    pub fn from_complex_samples(grid: Grid, samples: &[Complex64]) -> Result<Self> {
        grid.check_len(samples.len())?;
        let mut data = samples.to_vec();
        fft::fft2(&mut data, grid.nx, grid.ny, FftDirection::Forward);
        let scale = 1.0 / grid.len() as f64;
        par::for_each_row(&mut data, grid.nx, |k, row| {
            for (j, c) in row.iter_mut().enumerate() {
                let s = if (j + k) % 2 == 1 { -scale } else { scale };
                *c *= s;
            }
        });
        Ok(Self { grid, coeffs: data })
    }

    pub fn to_real(&self) -> RealField {
        to_real(self)
    }

    /// Largest imaginary part produced by the inverse transform; nonzero
    /// only if Hermitian symmetry has been broken.
    pub fn hermitian_defect(&self) -> f64 {
        self.to_complex_samples()
            .iter()
            .fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        par::zip_apply(&mut self.coeffs, &other.coeffs, |a, b| *a += *b);
        Ok(())
    }
}

pub fn to_spectral(f: &RealField) -> SpectralRep {
    let samples: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    SpectralRep::from_complex_samples(f.grid, &samples).expect("shape checked by construction")
}

pub fn to_real(spec: &SpectralRep) -> RealField {
    let data = spec
        .to_complex_samples()
        .into_iter()
        .map(|c| c.re)
        .collect();
    RealField {
        grid: spec.grid,
        data,
    }
}

/// `(i·k)^order` with the convention that a zero wavenumber gives zero for
/// negative orders and that odd orders vanish on the Nyquist mode.
fn ik_power(k: f64, order: i32, nyquist: bool) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if (order < 0 && k == 0.0) || (order % 2 != 0 && nyquist) {
        return Complex64::default();
    }
    Complex64::new(0.0, k).powi(order)
}

/// Multiplier of `∂_axis^order` in spectral form; negative orders are only
/// meaningful along x.
pub fn derivative_symbol(axis: Axis, order: i32) -> impl Fn(Wavevector) -> Complex64 + Sync + Send {
    move |w| match axis {
        Axis::X => ik_power(w.xi, order, w.nyquist_x),
        Axis::Y => ik_power(w.eta, order, w.nyquist_y),
    }
}

/// `∂_x^{a} ∂_y^{b}` combined, `a` possibly negative.
pub fn mixed_derivative_symbol(ax: i32, by: i32) -> impl Fn(Wavevector) -> Complex64 + Sync + Send {
    move |w| ik_power(w.xi, ax, w.nyquist_x) * ik_power(w.eta, by, w.nyquist_y)
}

pub fn derivative(f: &RealField, axis: Axis, order: i32) -> Result<RealField> {
    let spec = f.to_spectral();
    if order < 0 {
        if axis == Axis::Y {
            return Err(invalid("order", "negative order is only defined along x"));
        }
        spec.require_zero_xmean()?;
    }
    Ok(spec.with_symbol(derivative_symbol(axis, order)).to_real())
}

pub fn project_zero_xmean(f: &RealField) -> RealField {
    let mut spec = f.to_spectral();
    spec.zero_xmean();
    spec.to_real()
}

/// Whether a mode survives 2/3-rule truncation.
pub fn in_dealias_band(grid: &Grid, w: &Wavevector) -> bool {
    3 * w.mx.unsigned_abs() as usize <= grid.nx && 3 * w.my.unsigned_abs() as usize <= grid.ny
}

pub fn dealias(spec: &SpectralRep) -> SpectralRep {
    let grid = spec.grid;
    let mut out = spec.clone();
    out.retain(|w| in_dealias_band(&grid, &w));
    out
}

/// Dyadic x-frequency shell: `|ξ| ≤ 1` for λ = 1, `λ/2 < |ξ| ≤ λ` otherwise.
pub fn in_dyadic_shell(xi: f64, lambda: u64) -> bool {
    let a = xi.abs();
    if lambda == 1 {
        a <= 1.0
    } else {
        a > lambda as f64 / 2.0 && a <= lambda as f64
    }
}

/// All dyadic levels needed to cover the grid's x-frequencies.
pub fn dyadic_levels(grid: &Grid) -> Vec<u64> {
    let mut out = vec![1u64];
    while (*out.last().unwrap() as f64) < grid.xi_max() {
        out.push(out.last().unwrap() * 2);
    }
    out
}

pub fn dyadic_project(f: &RealField, lambda: u64) -> Result<RealField> {
    if lambda == 0 || !lambda.is_power_of_two() {
        return Err(invalid("lambda", format!("{lambda} is not dyadic")));
    }
    let mut spec = f.to_spectral();
    spec.retain(|w| in_dyadic_shell(w.xi, lambda));
    Ok(spec.to_real())
}

/// Sharp frequency cutoff keeping `ε < |ξ| < 1/ε` and `ε < |η| < 1/ε`.
pub fn mollify(f: &RealField, eps: f64) -> Result<RealField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("epsilon", format!("{eps} outside (0, 1)")));
    }
    let band = |k: f64| {
        let a = k.abs();
        a > eps && a < 1.0 / eps
    };
    let mut spec = f.to_spectral();
    spec.retain(|w| band(w.xi) && band(w.eta));
    Ok(spec.to_real())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracKind {
    /// Bessel potential `(1 - ∂_x²)^{s/2}`.
    J,
    /// `|D_x|^s` with symbol `|ξ|^s`.
    D,
}

pub fn fractional_symbol(kind: FracKind, s: f64) -> impl Fn(Wavevector) -> f64 + Sync + Send {
    move |w| match kind {
        FracKind::J => (1.0 + w.xi * w.xi).powf(0.5 * s),
        FracKind::D => {
            if w.xi == 0.0 {
                if s == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                w.xi.abs().powf(s)
            }
        }
    }
}

pub fn fractional_x(f: &RealField, kind: FracKind, s: f64) -> Result<RealField> {
    let spec = f.to_spectral();
    if kind == FracKind::D && s < 0.0 {
        spec.require_zero_xmean()?;
    }
    Ok(spec.with_real_symbol(fractional_symbol(kind, s)).to_real())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box2pi(n: usize) -> Grid {
        Grid::new(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &RealField, b: &RealField) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn grid_wavenumbers() {
        let g = box2pi(8);
        let xi = g.xi_sorted();
        let expect: Vec<f64> = (-4..4).map(|m| m as f64).collect();
        for (a, b) in xi.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let g = Grid::new(8, 8, PI, 2.0 * PI).unwrap();
        assert!((g.xi(1) - 2.0).abs() < 1e-14);
        assert!((g.eta(1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_rejects_bad_shapes() {
        assert!(Grid::new(6, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(4, 8, 1.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid::new(8, 8, 1.0, -2.0).is_err());
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = box2pi(16);
        let spec = RealField::from_fn(g, |x, _| x.cos()).to_spectral();
        for k in 0..16 {
            for j in 0..16 {
                let w = g.wavevector(j, k);
                let c = spec.coeffs()[k * 16 + j];
                let expected = if w.my == 0 && w.mx.abs() == 1 {
                    0.5
                } else {
                    0.0
                };
                assert!((c.re - expected).abs() < 1e-14 && c.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = box2pi(8);
        let spec = RealField::from_fn(g, |_, _| 1.0).to_spectral();
        assert!((spec.coeff(0, 0).re - 1.0).abs() < 1e-15);
        assert!(spec.energy() - 1.0 < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let g = box2pi(32);
        let s = RealField::from_fn(g, |x, _| x.sin());
        let c = RealField::from_fn(g, |x, _| x.cos());
        assert!(max_diff(&derivative(&s, Axis::X, 1).unwrap(), &c) < 1e-13);
        assert!(max_diff(&derivative(&s, Axis::X, -1).unwrap(), &c.scale(-1.0)) < 1e-13);
        let f = RealField::from_fn(g, |x, y| (2.0 * x).cos() * y.cos());
        let expect = f.scale(-0.25);
        assert!(max_diff(&derivative(&f, Axis::X, -2).unwrap(), &expect) < 1e-13);
    }

    #[test]
    fn derivative_errors() {
        let g = box2pi(16);
        let f = RealField::from_fn(g, |x, _| x.sin());
        assert!(derivative(&f, Axis::Y, -1).is_err());
        let g2 = RealField::from_fn(g, |x, y| 1.0 + x.sin() + y.cos());
        assert!(matches!(
            derivative(&g2, Axis::X, -1),
            Err(Error::NonzeroXMean { .. })
        ));
    }

    #[test]
    fn zero_xmean_projection() {
        let g = box2pi(16);
        let f = RealField::from_fn(g, |x, _| 1.0 + x.sin());
        let s = RealField::from_fn(g, |x, _| x.sin());
        assert!(max_diff(&project_zero_xmean(&f), &s) < 1e-14);
        assert!(max_diff(&project_zero_xmean(&s), &s) < 1e-14);
        let cy = RealField::from_fn(g, |_, y| y.cos());
        assert!(project_zero_xmean(&cy).max_abs() < 1e-14);
    }

    #[test]
    fn dealias_examples() {
        let g = box2pi(16);
        let mut spec = SpectralRep::zeros(g);
        spec.set_coeff(7, 0, Complex64::new(1.0, 0.0));
        spec.set_coeff(0, 0, Complex64::new(2.0, 0.0));
        spec.set_coeff(3, -2, Complex64::new(0.5, 0.5));
        let out = dealias(&spec);
        assert_eq!(out.coeff(7, 0), Complex64::default());
        assert_eq!(out.coeff(0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(out.coeff(3, -2), Complex64::new(0.5, 0.5));
    }

    #[test]
    fn dyadic_examples() {
        let g = box2pi(32);
        let f = RealField::from_fn(g, |x, _| (3.0 * x).sin());
        for lambda in dyadic_levels(&g) {
            let p = dyadic_project(&f, lambda).unwrap();
            if lambda == 4 {
                assert!(max_diff(&p, &f) < 1e-13);
            } else {
                assert!(p.max_abs() < 1e-13);
            }
        }
        let s = RealField::from_fn(g, |x, _| x.sin());
        assert!(max_diff(&dyadic_project(&s, 1).unwrap(), &s) < 1e-13);
        assert!(dyadic_project(&s, 3).is_err());
        assert!(dyadic_project(&s, 0).is_err());
    }

    #[test]
    fn mollify_examples() {
        let g = box2pi(16);
        let f = RealField::from_fn(g, |x, y| x.sin() * y.sin());
        assert!(max_diff(&mollify(&f, 0.5).unwrap(), &f) < 1e-14);
        let cy = RealField::from_fn(g, |_, y| y.cos());
        assert!(mollify(&cy, 0.3).unwrap().max_abs() < 1e-14);
        assert!(mollify(&f, 0.0).is_err());
        assert!(mollify(&f, 1.0).is_err());
    }

    #[test]
    fn fractional_examples() {
        let g = box2pi(32);
        let s = RealField::from_fn(g, |x, _| x.sin());
        let j2 = fractional_x(&s, FracKind::J, 2.0).unwrap();
        assert!(max_diff(&j2, &s.scale(2.0)) < 1e-13);
        let s4 = RealField::from_fn(g, |x, _| (4.0 * x).sin());
        let d = fractional_x(&s4, FracKind::D, 0.5).unwrap();
        assert!(max_diff(&d, &s4.scale(2.0)) < 1e-13);
        let f = RealField::from_fn(g, |x, y| (x + 0.3 * y).cos().exp());
        assert!(max_diff(&fractional_x(&f, FracKind::J, 0.0).unwrap(), &f) < 1e-13);
        assert!(fractional_x(&f, FracKind::D, -0.5).is_err());
    }
}
