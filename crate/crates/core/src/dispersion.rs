//! Free KP-I group: kernel, dispersive decay fits, Strichartz quotients and
//! the `L¹_T L^∞` smoothing probe.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::functionals::lebesgue_norm;
use crate::initial::InitialSpec;
use crate::par;
use crate::solver::{linear_phase, RunOutput};
use crate::spectral::{fractional_symbol, FracKind, Grid, RealField, SpectralRep};

/// Relative coefficient magnitude that defines a field's band limit.
pub const BAND_TOL: f64 = 1e-6;

/// One measurement row.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub probe: &'static str,
    pub eps: f64,
    pub q: f64,
    pub r: f64,
    pub t_end: f64,
    pub samples: usize,
    pub nx: usize,
    pub ny: usize,
    /// Headline value: the maximal quotient, fitted slope or empirical constant.
    pub value: f64,
    pub min: f64,
    pub max: f64,
}

impl ProbeReport {
    pub const CSV_HEADER: &'static str = "probe,eps,q,r,T,samples,nx,ny,value,min,max";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e}",
            self.probe,
            self.eps,
            self.q,
            self.r,
            self.t_end,
            self.samples,
            self.nx,
            self.ny,
            self.value,
            self.min,
            self.max
        )
    }
}

/// Discrete free kernel: spectrum `e^{itθ}/(lx·ly)` on the zero-x-mean
/// sector, so that `convolve(G(t), φ) = U(t)φ`.
pub fn kernel_g(grid: &Grid, t: f64) -> Result<RealField> {
    if t == 0.0 || !t.is_finite() {
        return Err(invalid(
            "t",
            "the kernel at t = 0 is the delta distribution",
        ));
    }
    let theta = linear_phase(grid, 0.0);
    let nx = grid.nx();
    let area = grid.area();
    let spec = SpectralRep::from_symbol(*grid, |w| {
        if w.mx == 0 {
            Complex64::default()
        } else {
            let j = w.mx.rem_euclid(nx as i64) as usize;
            let k = w.my.rem_euclid(grid.ny() as i64) as usize;
            Complex64::from_polar(1.0 / area, theta[k * nx + j] * t)
        }
    });
    Ok(spec.to_real())
}

/// Periodic convolution `∫ f(x − x′) g(x′) dx′`.
pub fn convolve(f: &RealField, g: &RealField) -> Result<RealField> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let area = f.grid().area();
    let mut a = f.to_spectral();
    let b = g.to_spectral();
    par::zip_apply(a.coeffs_mut(), b.coeffs(), |x, y| *x *= *y * area);
    Ok(a.to_real())
}

/// `U(t)` followed by `D_x^{−s}`, both as one multiplier on `spec`.
fn evolve_smoothed(spec: &SpectralRep, theta: &[f64], t: f64, s: f64) -> RealField {
    let weight = fractional_symbol(FracKind::D, -s);
    let grid = *spec.grid();
    let nx = grid.nx();
    let mut out = spec.clone();
    par::for_each_row(out.coeffs_mut(), nx, |k, row| {
        for (j, c) in row.iter_mut().enumerate() {
            let w = grid.wavevector(j, k);
            *c *= Complex64::from_polar(weight(w), theta[k * nx + j] * t);
        }
    });
    out.to_real()
}

/// `1 − 2/r`.
pub fn strichartz_delta(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else {
        1.0 - 2.0 / r
    }
}

/// The time exponent `q` with `2/q = (1 − ε/3)δ(r)`, or an error when the
/// triple is not admissible.
pub fn admissible_q(r: f64, eps: f64) -> Result<f64> {
    if !(r >= 2.0) {
        return Err(invalid("r", format!("{r} outside [2, ∞]")));
    }
    if !(0.0..=0.5).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1/2]")));
    }
    let two_over_q = (1.0 - eps / 3.0) * strichartz_delta(r);
    if two_over_q >= 1.0 {
        return Err(invalid(
            "q",
            format!("2/q = (1 - eps/3)(1 - 2/r) = {two_over_q} is not below 1"),
        ));
    }
    Ok(if two_over_q == 0.0 {
        f64::INFINITY
    } else {
        2.0 / two_over_q
    })
}

/// `‖D_x^{−εδ(r)/2} U(t)φ‖_{L^q_T L^r} / ‖φ‖_{L²}` over `nt` uniform samples
/// of `[0, T]`.
pub fn strichartz_quotient(
    phi: &RealField,
    q: f64,
    r: f64,
    eps: f64,
    t_end: f64,
    nt: usize,
) -> Result<f64> {
    let q_adm = admissible_q(r, eps)?;
    let consistent = if q_adm.is_infinite() {
        q.is_infinite()
    } else {
        (q - q_adm).abs() <= 1e-12 * q_adm
    };
    if !consistent {
        return Err(invalid(
            "q",
            format!("{q} violates 2/q = (1 - eps/3)(1 - 2/r); expected {q_adm}"),
        ));
    }
    if nt < 2 || !(t_end > 0.0) {
        return Err(invalid("nt", "need T > 0 and at least two time samples"));
    }
    let norm = phi.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let spec = phi.to_spectral();
    spec.require_zero_xmean()?;
    let theta = linear_phase(phi.grid(), 0.0);
    let s = eps * strichartz_delta(r) / 2.0;
    let ts: Vec<f64> = (0..nt)
        .map(|i| t_end * i as f64 / (nt - 1) as f64)
        .collect();
    let vals = ts
        .iter()
        .map(|&t| lebesgue_norm(&evolve_smoothed(&spec, &theta, t, s), r))
        .collect::<Result<Vec<f64>>>()?;
    let time_norm = if q.is_infinite() {
        vals.iter().copied().fold(0.0, f64::max)
    } else {
        let h = t_end / (nt - 1) as f64;
        let pw: Vec<f64> = vals.iter().map(|v| v.powf(q)).collect();
        let inner: f64 = pw.iter().sum::<f64>() - 0.5 * (pw[0] + pw[nt - 1]);
        (h * inner).powf(1.0 / q)
    };
    Ok(time_norm / norm)
}

/// Monte-Carlo Strichartz probe over band-limited noise. Sample `i` uses the
/// sub-stream `i` of `seed`, so results do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn strichartz_probe(
    grid: &Grid,
    r: f64,
    eps: f64,
    t_end: f64,
    nt: usize,
    samples: usize,
    kmax: f64,
    seed: u64,
) -> Result<ProbeReport> {
    if samples == 0 {
        return Err(invalid("samples", "need at least one sample"));
    }
    let q = admissible_q(r, eps)?;
    let quotients = par::map_indices(samples, |i| {
        let sub = crate::rng::substream_seed(seed, i as u64);
        let phi = InitialSpec::BandNoise {
            amplitude: 1.0,
            kmax,
            seed: sub,
        }
        .sample(grid)?;
        strichartz_quotient(&phi, q, r, eps, t_end, nt)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let max = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = quotients.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        probe: "strichartz",
        eps,
        q,
        r,
        t_end,
        samples,
        nx: grid.nx(),
        ny: grid.ny(),
        value: max,
        min,
        max,
    })
}

/// Largest `|ξ|` carrying a coefficient above `BAND_TOL` of the maximum.
pub fn band_limit_x(f: &RealField) -> f64 {
    let spec = f.to_spectral();
    let grid = *spec.grid();
    let peak = spec.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let mut out = 0.0f64;
    for k in 0..grid.ny() {
        for j in 0..grid.nx() {
            if spec.coeffs()[k * grid.nx() + j].norm() >= BAND_TOL * peak {
                out = out.max(grid.xi(j).abs());
            }
        }
    }
    out
}

/// Checks that `3ξ_b²·t_max < lx/2`, the pre-wraparound window for the
/// x-group velocity `3ξ²` over the band `|ξ| ≤ ξ_b`.
pub fn check_window(f: &RealField, t_max: f64) -> Result<()> {
    let xb = band_limit_x(f);
    let travel = 3.0 * xb * xb * t_max;
    let half = 0.5 * f.grid().lx();
    if travel >= half {
        return Err(Error::Window(format!(
            "3·xi_b²·t = {travel:.3} reaches lx/2 = {half:.3} (xi_b = {xb:.3}, t = {t_max})"
        )));
    }
    Ok(())
}

/// `‖D_x^{−ε}U(t)φ‖_∞` at each `t`.
pub fn decay_profile(phi: &RealField, eps: f64, t_samples: &[f64]) -> Result<Vec<f64>> {
    let spec = phi.to_spectral();
    spec.require_zero_xmean()?;
    let theta = linear_phase(phi.grid(), 0.0);
    Ok(t_samples
        .iter()
        .map(|&t| evolve_smoothed(&spec, &theta, t, eps).max_abs())
        .collect())
}

/// Least-squares slope of `log ‖D_x^{−ε}U(t)φ‖_∞` against `log t`.
pub fn decay_exponent_fit(phi: &RealField, eps: f64, t_samples: &[f64]) -> Result<f64> {
    if t_samples.len() < 2 || t_samples.iter().any(|&t| !(t > 0.0)) {
        return Err(invalid("t_samples", "need at least two positive times"));
    }
    let t_max = t_samples.iter().copied().fold(0.0, f64::max);
    check_window(phi, t_max)?;
    let sup = decay_profile(phi, eps, t_samples)?;
    let xs: Vec<f64> = t_samples.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = sup.iter().map(|v| v.ln()).collect();
    Ok(least_squares_slope(&xs, &ys))
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Both sides of `‖v‖_{L¹_T L^∞} ≤ C(1 + T)‖J^{1/2+ε}v‖_{L^∞_T L²} +
/// C‖J^{1/2+ε}F‖_{L¹_T L²}` with `C = 1` and `F = −(v²/2 + ψv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlosReport {
    pub eps: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the empirical constant; zero when `lhs` is zero.
    pub quotient: f64,
}

impl CarlosReport {
    pub fn to_probe(&self, grid: &Grid) -> ProbeReport {
        ProbeReport {
            probe: "carlos",
            eps: self.eps,
            q: 1.0,
            r: f64::INFINITY,
            t_end: self.t_end,
            samples: self.snapshots,
            nx: grid.nx(),
            ny: grid.ny(),
            value: self.quotient,
            min: self.lhs,
            max: self.rhs,
        }
    }
}

/// Minimum snapshot count for the time quadratures of [`carlos_bound_report`].
pub const CARLOS_MIN_SNAPSHOTS: usize = 32;

pub fn carlos_bound_report(run: &RunOutput, eps: f64) -> Result<CarlosReport> {
    let snaps = &run.snapshots;
    if snaps.len() < CARLOS_MIN_SNAPSHOTS {
        return Err(invalid(
            "snapshots",
            format!(
                "{} snapshots; at least {CARLOS_MIN_SNAPSHOTS} needed",
                snaps.len()
            ),
        ));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps", format!("{eps} must be positive")));
    }
    let grid = *snaps[0].v.grid();
    let psi = snaps[0].background.profile(&grid)?;
    let js = fractional_symbol(FracKind::J, 0.5 + eps);
    let j_norm = |f: &RealField| f.to_spectral().with_real_symbol(&js).l2_norm();
    let mut sup = Vec::with_capacity(snaps.len());
    let mut jv = Vec::with_capacity(snaps.len());
    let mut jf = Vec::with_capacity(snaps.len());
    for s in snaps {
        let v = &s.v;
        let forcing = match &psi {
            None => v.map(|x| -0.5 * x * x),
            Some(p) => v.zip_map(p, |x, p| -(0.5 * x * x + p * x))?,
        };
        sup.push(v.max_abs());
        jv.push(j_norm(v));
        jf.push(j_norm(&forcing));
    }
    let ts: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let trap = |ys: &[f64]| -> f64 {
        ts.windows(2)
            .zip(ys.windows(2))
            .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
            .sum()
    };
    let t_end = ts[ts.len() - 1] - ts[0];
    let lhs = trap(&sup);
    let rhs = (1.0 + t_end) * jv.iter().copied().fold(0.0, f64::max) + trap(&jf);
    let quotient = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(CarlosReport {
        eps,
        t_end,
        snapshots: snaps.len(),
        lhs,
        rhs,
        quotient,
    })
}
