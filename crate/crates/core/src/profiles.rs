//! Background traveling waves: the KdV line soliton and the Zaitsev wave.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::spectral::{Grid, RealField, SpectralRep};

/// Exponential tail factor that a background must reach at the box edge.
pub const TAIL_TOL: f64 = 1e-10;

/// Which traveling wave, if any, the perturbation is posed around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundSpec {
    None,
    KdvLine { c: f64 },
    Zaitsev { alpha: f64, beta: f64, delta: f64 },
}

impl BackgroundSpec {
    pub fn kdv_line(c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(
                "c",
                format!("line soliton speed {c} must be positive"),
            ));
        }
        Ok(Self::KdvLine { c })
    }

    /// Zaitsev wave with its transverse wavenumber solved numerically.
    pub fn zaitsev(alpha: f64, beta: f64) -> Result<Self> {
        let delta = zaitsev_delta(alpha, beta)?;
        Self::zaitsev_with_delta(alpha, beta, delta)
    }

    pub fn zaitsev_with_delta(alpha: f64, beta: f64, delta: f64) -> Result<Self> {
        check_zaitsev_params(alpha, beta)?;
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid("delta", format!("{delta} must be positive")));
        }
        Ok(Self::Zaitsev { alpha, beta, delta })
    }

    /// Propagation speed `c` (zero when there is no background).
    pub fn speed(&self) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::KdvLine { c } => c,
            Self::Zaitsev { alpha, beta, .. } => {
                alpha * alpha * (4.0 - beta * beta) / (1.0 - beta * beta)
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Self::None)
    }

    /// Samples the profile on `grid`, centered at x = 0.
    pub fn profile(&self, grid: &Grid) -> Result<Option<RealField>> {
        match *self {
            Self::None => Ok(None),
            Self::KdvLine { c } => kdv_line(grid, c).map(Some),
            Self::Zaitsev { alpha, beta, delta } => zaitsev(grid, alpha, beta, delta).map(Some),
        }
    }

    /// Header parameters `(c, α, β, δ)`; unused entries are zero.
    pub fn parameters(&self) -> [f64; 4] {
        match *self {
            Self::None => [0.0; 4],
            Self::KdvLine { c } => [c, 0.0, 0.0, 0.0],
            Self::Zaitsev { alpha, beta, delta } => [self.speed(), alpha, beta, delta],
        }
    }

    /// Inverse of [`parameters`](Self::parameters).
    pub fn from_parameters(p: [f64; 4]) -> Result<Self> {
        let [c, alpha, beta, delta] = p;
        if alpha > 0.0 {
            Self::zaitsev_with_delta(alpha, beta, delta)
        } else if c > 0.0 {
            Self::kdv_line(c)
        } else {
            Ok(Self::None)
        }
    }
}

fn check_zaitsev_params(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid("alpha", format!("{alpha} must be positive")));
    }
    if !(beta.abs() < 1.0) {
        return Err(invalid(
            "beta",
            format!("|beta| = {} must satisfy |beta| < 1", beta.abs()),
        ));
    }
    Ok(())
}

/// `3c·cosh⁻²(√c·x/2)`, constant in y.
pub fn kdv_line(grid: &Grid, c: f64) -> Result<RealField> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(
            "c",
            format!("line soliton speed {c} must be positive"),
        ));
    }
    let tail = (-c.sqrt() * grid.lx() / 2.0).exp();
    if tail >= TAIL_TOL {
        return Err(invalid(
            "lx",
            format!("soliton tail e^(-sqrt(c) lx/2) = {tail:.2e} does not fit the box"),
        ));
    }
    let k = 0.5 * c.sqrt();
    Ok(RealField::from_fn(*grid, move |x, _| {
        let ch = (k * x).cosh();
        3.0 * c / (ch * ch)
    }))
}

pub fn zaitsev_speed(alpha: f64, beta: f64) -> Result<f64> {
    check_zaitsev_params(alpha, beta)?;
    Ok(alpha * alpha * (4.0 - beta * beta) / (1.0 - beta * beta))
}

/// `12α²(1 − β cosh(αx) cos(δy)) / (cosh(αx) − β cos(δy))²`.
pub fn zaitsev(grid: &Grid, alpha: f64, beta: f64, delta: f64) -> Result<RealField> {
    check_zaitsev_params(alpha, beta)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(invalid("delta", format!("{delta} must be positive")));
    }
    let periods = grid.ly() * delta / (2.0 * PI);
    if (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) || periods.round() < 1.0 {
        return Err(invalid(
            "ly",
            format!(
                "ly = {} is not a multiple of the y-period 2π/δ = {}",
                grid.ly(),
                2.0 * PI / delta
            ),
        ));
    }
    let tail = (-alpha * grid.lx() / 2.0).exp();
    if tail >= TAIL_TOL {
        return Err(invalid(
            "lx",
            format!("profile tail e^(-alpha lx/2) = {tail:.2e} does not fit the box"),
        ));
    }
    Ok(RealField::from_fn(*grid, move |x, y| {
        zaitsev_point(alpha, beta, delta, x, y)
    }))
}

fn zaitsev_point(alpha: f64, beta: f64, delta: f64, x: f64, y: f64) -> f64 {
    let ch = (alpha * x).cosh();
    let cy = (delta * y).cos();
    let den = ch - beta * cy;
    12.0 * alpha * alpha * (1.0 - beta * ch * cy) / (den * den)
}

/// A grid resolving one y-period of the Zaitsev wave to residual level.
///
/// The profile is analytic in a strip of half-width `s = arccos|β|/α` in x and
/// `arccosh(1/|β|)/δ` in y. The x mesh reaches `ξ_max = α·max(40, 38/arccos|β|)`,
/// past which the coefficients are at roundoff and only feed the ξ⁴-amplified
/// noise floor. The box is at least `64/α` wide so the periodic wrap of the tail
/// stays below roundoff after four derivatives.
pub fn zaitsev_grid(alpha: f64, beta: f64, delta: f64) -> Result<Grid> {
    check_zaitsev_params(alpha, beta)?;
    let b = beta.abs();
    let xi_per_alpha = (38.0 / b.acos()).max(40.0);
    let nx = ((64.0 * xi_per_alpha / PI).ceil() as usize)
        .next_power_of_two()
        .min(8192);
    let lx = PI * nx as f64 / (xi_per_alpha * alpha);
    let ny = if b == 0.0 {
        16.0
    } else {
        (60.0 / (1.0 / b).acosh()).ceil().max(16.0)
    } as usize;
    Grid::new(nx, ny.next_power_of_two().min(4096), lx, 2.0 * PI / delta)
}

/// Spectral coefficients of `(−cψ_x + ψ_xxx + ψψ_x)_x` and of `ψ_yy`.
///
/// Both parts are formed directly as multipliers on `ψ̂` and `(ψ²/2)^`, so no
/// inverse transform enters the residual and roundoff is amplified once.
fn stationary_parts(psi: &RealField, c: f64) -> (SpectralRep, SpectralRep) {
    let spec = psi.to_spectral();
    let half_sq = psi.map(|v| 0.5 * v * v).to_spectral();
    let psi_yy = spec.clone().with_real_symbol(|w| -w.eta * w.eta);
    let mut outer = spec.with_real_symbol(move |w| {
        let x2 = w.xi * w.xi;
        c * x2 + x2 * x2
    });
    outer
        .add_assign(&half_sq.with_real_symbol(|w| -w.xi * w.xi))
        .expect("same grid");
    (outer, psi_yy)
}

/// Real inner product `∫ f g` of two fields from their coefficients.
fn spectral_inner(a: &SpectralRep, b: &SpectralRep) -> f64 {
    let s: f64 = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(p, q)| (p * q.conj()).re)
        .sum();
    s * a.grid().area()
}

/// `‖(−cψ_x + ψ_xxx + ψψ_x)_x − ψ_yy‖ / ‖ψ‖`; zero for ψ ≡ 0.
pub fn traveling_residual(psi: &RealField, c: f64) -> f64 {
    let norm = psi.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    let (mut outer, psi_yy) = stationary_parts(psi, c);
    outer
        .add_assign(&psi_yy.with_real_symbol(|_| -1.0))
        .expect("same grid");
    outer.l2_norm() / norm
}

/// Transverse wavenumber δ of the Zaitsev wave for given (α, β).
///
/// The profile depends on δ only through `δy`, so on a grid spanning one
/// y-period the samples are δ-independent and `ψ_yy = δ²·ψ_YY`. The root of
/// the residual's projection onto `ψ_yy`,
/// `h(δ) = ⟨R(δ), ψ_yy⟩ / ‖ψ_yy‖²`, is bracketed and refined by the
/// Illinois variant of regula falsi.
pub fn zaitsev_delta(alpha: f64, beta: f64) -> Result<f64> {
    check_zaitsev_params(alpha, beta)?;
    if beta == 0.0 {
        return Err(invalid(
            "beta",
            "the line-soliton limit beta = 0 leaves delta undetermined",
        ));
    }
    let c = zaitsev_speed(alpha, beta)?;
    let grid = zaitsev_grid(alpha, beta, 1.0)?;
    let psi = zaitsev(&grid, alpha, beta, 1.0)?;
    let (outer, psi_yy_unit) = stationary_parts(&psi, c);
    let num = spectral_inner(&outer, &psi_yy_unit);
    let den = spectral_inner(&psi_yy_unit, &psi_yy_unit);
    if den == 0.0 {
        return Err(Error::NoBracket { lo: 0.0, hi: 0.0 });
    }
    // R(δ) = outer − δ²·ψ_YY, so h(δ) = (num/den)/δ² − 1.
    let h = |d: f64| num / (den * d * d) - 1.0;
    let (lo, hi) = (1e-3 * alpha * alpha, 1e3 * alpha * alpha);
    illinois(h, lo, hi, 1e-15)
}

/// Bracketed root of a scalar function by modified regula falsi.
pub(crate) fn illinois(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rtol: f64) -> Result<f64> {
    let (lo, hi) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    let mut side = 0i8;
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= rtol * c.abs() {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() <= rtol * a.abs().max(b.abs()) {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}
