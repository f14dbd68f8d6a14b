//! Time integration of the perturbation equation
//!
//! ```text
//! v_t = −v_xxx + ∂x⁻¹v_yy + s·v_x − v·v_x − ∂x(ψv)
//! ```
//!
//! in a frame moving with speed `s`. With no background (ψ = 0) this is plain
//! KP-I for the full field. The linear part is diagonal in Fourier space,
//! `v̂_t = iθ v̂` with `θ = ξ³ + η²/ξ + sξ`, and is integrated exactly.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::functionals::FunctionalReport;
use crate::par;
use crate::profiles::BackgroundSpec;
use crate::spectral::{in_dealias_band, Grid, RealField, SpectralRep};

/// Number of contour points for the ETD-RK4 coefficient averages.
const CONTOUR_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Exponential time differencing RK4 (Cox–Matthews).
    EtdRk4,
    /// Integrating-factor RK4 (Lawson).
    IfRk4,
    /// ETD-RK4 applied to the flow regularized by `(1 + εΔ²)⁻¹`.
    RegularizedImex,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EtdRk4 => "etd_rk4",
            Self::IfRk4 => "if_rk4",
            Self::RegularizedImex => "regularized_imex",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "etd_rk4" => Ok(Self::EtdRk4),
            "if_rk4" => Ok(Self::IfRk4),
            "regularized_imex" => Ok(Self::RegularizedImex),
            other => Err(invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Speed of the computational frame; must equal `c` when a background is active.
    pub frame_speed: f64,
    pub dealias: bool,
    /// Regularization ε; positive exactly when `scheme` is `RegularizedImex`.
    pub reg_epsilon: f64,
    pub snapshot_stride: usize,
    pub diagnostics_stride: usize,
    /// Index `s` of the `H^{s,0}` column in the diagnostics.
    pub hs_index: f64,
}

impl SolverConfig {
    /// ETD-RK4 in the lab frame, dealiased, diagnostics every step.
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::EtdRk4,
            dt,
            t_end,
            frame_speed: 0.0,
            dealias: true,
            reg_epsilon: 0.0,
            snapshot_stride: usize::MAX,
            diagnostics_stride: 1,
            hs_index: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("{} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(invalid(
                "t_end",
                format!("{} must be nonnegative", self.t_end),
            ));
        }
        if !self.frame_speed.is_finite() {
            return Err(invalid("frame_speed", "must be finite"));
        }
        let regularized = self.scheme == Scheme::RegularizedImex;
        if regularized && !(self.reg_epsilon.is_finite() && self.reg_epsilon > 0.0) {
            return Err(invalid(
                "reg_epsilon",
                format!("{} must be positive for regularized_imex", self.reg_epsilon),
            ));
        }
        if !regularized && self.reg_epsilon != 0.0 {
            return Err(invalid(
                "reg_epsilon",
                format!(
                    "{} given but scheme is {}",
                    self.reg_epsilon,
                    self.scheme.name()
                ),
            ));
        }
        if self.snapshot_stride == 0 || self.diagnostics_stride == 0 {
            return Err(invalid("stride", "strides must be at least 1"));
        }
        Ok(())
    }

    /// Step count and the uniform step that lands exactly on `t_end`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

/// Solver state: `v` is the full field without a background and the
/// perturbation otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub v: RealField,
    pub background: BackgroundSpec,
}

impl SimState {
    pub fn new(v: RealField, background: BackgroundSpec) -> Self {
        Self {
            t: 0.0,
            v,
            background,
        }
    }

    /// `u = ψ + v` in the co-moving frame.
    pub fn reconstruct(&self) -> Result<RealField> {
        match self.background.profile(self.v.grid())? {
            None => Ok(self.v.clone()),
            Some(psi) => psi.add(&self.v),
        }
    }
}

/// `θ(ξ, η) = ξ³ + η²/ξ + s·ξ` in FFT order. θ is zero on the ξ = 0 plane
/// and on the x-Nyquist column, whose modes are frozen.
pub fn linear_phase(grid: &Grid, frame_speed: f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    par::for_each_row(&mut out, grid.nx(), |k, row| {
        for (j, th) in row.iter_mut().enumerate() {
            let w = grid.wavevector(j, k);
            *th = if w.mx == 0 || w.nyquist_x {
                0.0
            } else {
                w.xi.powi(3) + w.eta * w.eta / w.xi + frame_speed * w.xi
            };
        }
    });
    out
}

/// Free evolution `e^{itθ}` applied to `f`.
pub fn propagate_linear(f: &RealField, t: f64, frame_speed: f64) -> Result<RealField> {
    let mut spec = f.to_spectral();
    spec.require_zero_xmean()?;
    spec.zero_xmean();
    let theta = linear_phase(f.grid(), frame_speed);
    par::zip_apply(spec.coeffs_mut(), &theta, |c, th| {
        *c *= Complex64::from_polar(1.0, th * t)
    });
    Ok(spec.to_real())
}

fn check_psi(grid: &Grid, psi: Option<&RealField>) -> Result<()> {
    match psi {
        Some(p) if p.grid() != grid => Err(Error::GridMismatch),
        _ => Ok(()),
    }
}

/// Spectrum of `−∂x(v²/2 + ψv)`, truncated to the 2/3 band when `dealias`.
fn nonlinear_hat(v: &RealField, psi: Option<&RealField>, dealias: bool) -> SpectralRep {
    let grid = *v.grid();
    let mut w = v.clone();
    match psi {
        None => par::for_each_row(w.samples_mut(), grid.nx(), |_, row| {
            row.iter_mut().for_each(|x| *x = 0.5 * *x * *x)
        }),
        Some(psi) => par::zip_apply(w.samples_mut(), psi.samples(), |x, p| *x *= 0.5 * *x + p),
    }
    let mut spec = w.to_spectral();
    spec.apply(move |wv| {
        if wv.nyquist_x || wv.nyquist_y || (dealias && !in_dealias_band(&grid, &wv)) {
            Complex64::default()
        } else {
            Complex64::new(0.0, -wv.xi)
        }
    });
    spec
}

/// `−∂x(v²/2 + ψv)` with the product formed pointwise and truncated to the
/// 2/3 band when `dealias` before differentiation.
pub fn nonlinear_rhs(v: &RealField, psi: Option<&RealField>, dealias: bool) -> Result<RealField> {
    check_psi(v.grid(), psi)?;
    Ok(nonlinear_hat(v, psi, dealias).to_real())
}

/// `(1 − √ε Δ)⁻¹ φ`, the smoothing applied to initial data of the
/// regularized flow.
pub fn regularize_initial(phi: &RealField, eps: f64) -> Result<RealField> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("reg_epsilon", format!("{eps} must be positive")));
    }
    let se = eps.sqrt();
    Ok(phi
        .to_spectral()
        .with_real_symbol(move |w| 1.0 / (1.0 + se * (w.xi * w.xi + w.eta * w.eta)))
        .to_real())
}

enum Coefficients {
    Etd {
        e: Vec<Complex64>,
        e2: Vec<Complex64>,
        q: Vec<Complex64>,
        f1: Vec<Complex64>,
        f2: Vec<Complex64>,
        f3: Vec<Complex64>,
    },
    If {
        e: Vec<Complex64>,
        e2: Vec<Complex64>,
    },
}

/// Contour averages of the ETD-RK4 functions at `z = Lh`.
fn etd_coefficients(z: Complex64, h: f64) -> [Complex64; 4] {
    let mut acc = [Complex64::default(); 4];
    for k in 0..CONTOUR_POINTS {
        let angle = std::f64::consts::PI * (k as f64 + 0.5) / (CONTOUR_POINTS as f64 / 2.0);
        let r = z + Complex64::from_polar(1.0, angle);
        let er = r.exp();
        let r2 = r * r;
        let r3 = r2 * r;
        acc[0] += ((r / 2.0).exp() - 1.0) / r;
        acc[1] += (-4.0 - r + er * (4.0 - 3.0 * r + r2)) / r3;
        acc[2] += (2.0 + r + er * (r - 2.0)) / r3;
        acc[3] += (-4.0 - 3.0 * r - r2 + er * (4.0 - r)) / r3;
    }
    acc.map(|a| a * (h / CONTOUR_POINTS as f64))
}

/// Precomputed stepper for one grid, background and configuration.
pub struct Integrator {
    cfg: SolverConfig,
    grid: Grid,
    h: f64,
    background: BackgroundSpec,
    psi: Option<RealField>,
    /// `1/(1 + ε|k|⁴)` for the regularized scheme.
    damping: Option<Vec<f64>>,
    coeffs: Coefficients,
}

impl Integrator {
    pub fn new(grid: Grid, background: BackgroundSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        if !background.is_none() {
            let c = background.speed();
            if (cfg.frame_speed - c).abs() > 1e-12 * c.abs() {
                return Err(invalid(
                    "frame_speed",
                    format!("{} must equal the background speed {c}", cfg.frame_speed),
                ));
            }
        }
        let psi = background.profile(&grid)?;
        let (_, h) = cfg.steps();
        let damping = (cfg.scheme == Scheme::RegularizedImex).then(|| {
            let eps = cfg.reg_epsilon;
            let mut d = vec![0.0; grid.len()];
            par::for_each_row(&mut d, grid.nx(), |k, row| {
                for (j, x) in row.iter_mut().enumerate() {
                    let w = grid.wavevector(j, k);
                    let k2 = w.xi * w.xi + w.eta * w.eta;
                    *x = 1.0 / (1.0 + eps * k2 * k2);
                }
            });
            d
        });
        let mut lh: Vec<Complex64> = linear_phase(&grid, cfg.frame_speed)
            .into_iter()
            .map(|th| Complex64::new(0.0, th * h))
            .collect();
        if let Some(d) = &damping {
            par::zip_apply(&mut lh, d, |z, r| *z *= r);
        }
        let e: Vec<Complex64> = lh.iter().map(|z| z.exp()).collect();
        let e2: Vec<Complex64> = lh.iter().map(|z| (z / 2.0).exp()).collect();
        let coeffs = match cfg.scheme {
            Scheme::IfRk4 => Coefficients::If { e, e2 },
            Scheme::EtdRk4 | Scheme::RegularizedImex => {
                let table = par::map_indices(lh.len(), |i| etd_coefficients(lh[i], h));
                let col = |c: usize| table.iter().map(|t| t[c]).collect::<Vec<_>>();
                Coefficients::Etd {
                    e,
                    e2,
                    q: col(0),
                    f1: col(1),
                    f2: col(2),
                    f3: col(3),
                }
            }
        };
        Ok(Self {
            cfg,
            grid,
            h,
            background,
            psi,
            damping,
            coeffs,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Effective step size (the configured dt adjusted to land on `t_end`).
    pub fn dt(&self) -> f64 {
        self.h
    }

    pub fn background_profile(&self) -> Option<&RealField> {
        self.psi.as_ref()
    }

    fn rhs(&self, vhat: &[Complex64]) -> Vec<Complex64> {
        let spec = SpectralRep::from_coeffs(self.grid, vhat.to_vec()).expect("grid-sized");
        let v = spec.to_real();
        let mut n = nonlinear_hat(&v, self.psi.as_ref(), self.cfg.dealias);
        if let Some(d) = &self.damping {
            par::zip_apply(n.coeffs_mut(), d, |c, r| *c *= r);
        }
        n.coeffs().to_vec()
    }

    fn combine(&self, f: impl Fn(usize) -> Complex64 + Sync + Send) -> Vec<Complex64> {
        let nx = self.grid.nx();
        let mut out = vec![Complex64::default(); self.grid.len()];
        par::for_each_row(&mut out, nx, |k, row| {
            for (j, o) in row.iter_mut().enumerate() {
                *o = f(k * nx + j);
            }
        });
        out
    }

    /// Advances spectral coefficients by one step.
    fn advance(&self, v: &[Complex64]) -> Vec<Complex64> {
        let h = self.h;
        match &self.coeffs {
            Coefficients::Etd {
                e,
                e2,
                q,
                f1,
                f2,
                f3,
            } => {
                let nv = self.rhs(v);
                let a = self.combine(|i| e2[i] * v[i] + q[i] * nv[i]);
                let na = self.rhs(&a);
                let b = self.combine(|i| e2[i] * v[i] + q[i] * na[i]);
                let nb = self.rhs(&b);
                let c = self.combine(|i| e2[i] * a[i] + q[i] * (2.0 * nb[i] - nv[i]));
                let nc = self.rhs(&c);
                self.combine(|i| {
                    e[i] * v[i] + f1[i] * nv[i] + 2.0 * f2[i] * (na[i] + nb[i]) + f3[i] * nc[i]
                })
            }
            Coefficients::If { e, e2 } => {
                let k1 = self.rhs(v);
                let a = self.combine(|i| e2[i] * (v[i] + 0.5 * h * k1[i]));
                let k2 = self.rhs(&a);
                let b = self.combine(|i| e2[i] * v[i] + 0.5 * h * k2[i]);
                let k3 = self.rhs(&b);
                let c = self.combine(|i| e[i] * v[i] + h * e2[i] * k3[i]);
                let k4 = self.rhs(&c);
                self.combine(|i| {
                    e[i] * v[i] + h / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i])
                })
            }
        }
    }

    /// One step from `state`; `t` advances by [`dt`](Self::dt).
    pub fn step(&self, state: &SimState) -> Result<SimState> {
        if state.v.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let mut spec = state.v.to_spectral();
        spec.zero_xmean();
        let next = self.advance(spec.coeffs());
        let t = state.t + self.h;
        self.finish(next, t, state)
    }

    fn finish(&self, coeffs: Vec<Complex64>, t: f64, last_good: &SimState) -> Result<SimState> {
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Unstable {
                t,
                last_good: Box::new(last_good.clone()),
            });
        }
        let mut spec = SpectralRep::from_coeffs(self.grid, coeffs)?;
        spec.zero_xmean();
        let v = spec.to_real();
        if !v.is_finite() {
            return Err(Error::Unstable {
                t,
                last_good: Box::new(last_good.clone()),
            });
        }
        Ok(SimState {
            t,
            v,
            background: self.background,
        })
    }

    /// Runs `n` steps, calling `observe(step_index, state)` after each.
    pub fn run(
        &self,
        start: &SimState,
        n: usize,
        mut observe: impl FnMut(usize, &SimState) -> Result<()>,
    ) -> Result<SimState> {
        let t0 = start.t;
        let mut state = start.clone();
        let mut spec = state.v.to_spectral();
        spec.zero_xmean();
        let mut coeffs = spec.coeffs().to_vec();
        for i in 1..=n {
            coeffs = self.advance(&coeffs);
            // Times are k·h rather than accumulated sums.
            state = self.finish(coeffs.clone(), t0 + i as f64 * self.h, &state)?;
            observe(i, &state)?;
        }
        Ok(state)
    }
}

/// One step of the configured scheme.
pub fn step(state: &SimState, cfg: &SolverConfig) -> Result<SimState> {
    Integrator::new(*state.v.grid(), state.background, *cfg)?.step(state)
}

/// One step of the regularized flow; `cfg.scheme` must be `RegularizedImex`.
pub fn step_regularized(state: &SimState, cfg: &SolverConfig) -> Result<SimState> {
    if cfg.scheme != Scheme::RegularizedImex {
        return Err(invalid(
            "scheme",
            "step_regularized requires regularized_imex",
        ));
    }
    step(state, cfg)
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SimState,
    pub diagnostics: Vec<FunctionalReport>,
    pub snapshots: Vec<SimState>,
}

/// Evolves `phi` under `background` to `cfg.t_end`.
///
/// `phi` must have zero x-mean and be localized. For the regularized
/// scheme it is smoothed by [`regularize_initial`] first.
pub fn simulate(
    phi: &RealField,
    background: BackgroundSpec,
    cfg: &SolverConfig,
) -> Result<RunOutput> {
    let ratio = crate::functionals::boundary_ratio(phi);
    if ratio >= crate::functionals::LOCALIZED_TOL {
        return Err(invalid(
            "initial",
            format!("initial data is not localized: boundary/peak = {ratio:.2e}"),
        ));
    }
    simulate_from(SimState::new(phi.clone(), background), cfg)
}

/// Like [`simulate`] without the localization check, starting at `start.t`.
pub fn simulate_from(start: SimState, cfg: &SolverConfig) -> Result<RunOutput> {
    let mut rec = Recording::default();
    let final_state = simulate_recorded(start, cfg, &mut rec, |_, _| Ok(()))?;
    Ok(RunOutput {
        final_state,
        diagnostics: rec.diagnostics,
        snapshots: rec.snapshots,
    })
}

/// Diagnostics and snapshots gathered by [`simulate_recorded`]; partial if
/// the run fails.
#[derive(Debug, Clone, Default)]
pub struct Recording {
    pub diagnostics: Vec<FunctionalReport>,
    pub snapshots: Vec<SimState>,
}

/// Runs to `cfg.t_end`, appending to `rec` at step 0, every stride and the
/// final step. `hook(step, state)` sees every state including the initial one.
pub fn simulate_recorded(
    start: SimState,
    cfg: &SolverConfig,
    rec: &mut Recording,
    mut hook: impl FnMut(usize, &SimState) -> Result<()>,
) -> Result<SimState> {
    let integrator = Integrator::new(*start.v.grid(), start.background, *cfg)?;
    let mut start = start;
    start.v.to_spectral().require_zero_xmean()?;
    if cfg.scheme == Scheme::RegularizedImex {
        start.v = regularize_initial(&start.v, cfg.reg_epsilon)?;
    }
    let (n, _) = cfg.steps();
    let psi = integrator.background_profile().cloned();
    let s = cfg.hs_index;
    rec.diagnostics.push(FunctionalReport::compute(
        start.t,
        &start.v,
        psi.as_ref(),
        s,
    )?);
    rec.snapshots.push(start.clone());
    hook(0, &start)?;
    let mut prev = start.clone();
    integrator.run(&start, n, |i, st| {
        if i % cfg.diagnostics_stride == 0 || i == n {
            // Finite samples whose functionals overflow are a blow-up too.
            let report =
                FunctionalReport::compute(st.t, &st.v, psi.as_ref(), s).map_err(|e| match e {
                    Error::NonFinite(_) => Error::Unstable {
                        t: st.t,
                        last_good: Box::new(prev.clone()),
                    },
                    e => e,
                })?;
            rec.diagnostics.push(report);
        }
        if i % cfg.snapshot_stride == 0 || i == n {
            rec.snapshots.push(st.clone());
        }
        hook(i, st)?;
        prev = st.clone();
        Ok(())
    })
}

/// `β²·v` on the grid with lengths `lx/β`, `ly/β²`: the samples of
/// `β²v(βx, β²y)` on the rescaled lattice, which coincide with the original
/// lattice points.
pub fn rescale_solution(v: &RealField, beta: f64) -> Result<RealField> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", format!("{beta} outside (0, 1]")));
    }
    let g = v.grid();
    let grid = g.with_lengths(g.lx() / beta, g.ly() / (beta * beta))?;
    let b2 = beta * beta;
    RealField::from_samples(grid, v.samples().iter().map(|x| b2 * x).collect())
}

/// Background under the scaling `ψ_β = β²ψ(βx, β²y)`.
pub fn rescale_background(background: BackgroundSpec, beta: f64) -> Result<BackgroundSpec> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(invalid("beta", format!("{beta} outside (0, 1]")));
    }
    match background {
        BackgroundSpec::None => Ok(BackgroundSpec::None),
        BackgroundSpec::KdvLine { c } => BackgroundSpec::kdv_line(beta * beta * c),
        BackgroundSpec::Zaitsev {
            alpha,
            beta: b,
            delta,
        } => BackgroundSpec::zaitsev_with_delta(alpha * beta, b, delta * beta * beta),
    }
}

/// Distance between two runs and the accumulated sup-norms that enter the
/// exponent of the stability bound.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub t: Vec<f64>,
    /// `‖v_a(t) − v_b(t)‖_{L²}`.
    pub gap: Vec<f64>,
    /// `∫₀ᵗ (‖∂x v_a‖_∞ + ‖∂x v_b‖_∞) + t‖ψ_x‖_∞`.
    pub k0: Vec<f64>,
}

impl GapSeries {
    /// Smallest `C` with `gap(t) ≤ exp(C·k0(t))·gap(0)` at every sample.
    pub fn fitted_constant(&self) -> f64 {
        let g0 = self.gap[0];
        self.t
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(i, _)| self.k0[i] > 0.0 && g0 > 0.0)
            .map(|(i, _)| (self.gap[i] / g0).ln() / self.k0[i])
            .fold(0.0, f64::max)
    }

    /// Whether `gap(t) ≤ exp(C·k0(t))·gap(0)` holds at every sample.
    pub fn within_bound(&self, c: f64) -> bool {
        let g0 = self.gap[0];
        self.gap
            .iter()
            .zip(&self.k0)
            .all(|(g, k)| *g <= (c * k).exp() * g0 * (1.0 + 1e-12))
    }
}

/// Gap series from the snapshots of two runs on the same grid and times.
pub fn stability_gap(a: &RunOutput, b: &RunOutput) -> Result<GapSeries> {
    if a.snapshots.len() != b.snapshots.len() || a.snapshots.is_empty() {
        return Err(invalid("runs", "snapshot counts differ or are empty"));
    }
    let grid = *a.snapshots[0].v.grid();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        if sa.v.grid() != &grid || sb.v.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if (sa.t - sb.t).abs() > 1e-12 * sa.t.abs().max(1.0) {
            return Err(invalid(
                "runs",
                format!("sample times {} and {} differ", sa.t, sb.t),
            ));
        }
    }
    let psi_x = match a.snapshots[0].background.profile(&grid)? {
        None => 0.0,
        Some(p) => crate::spectral::derivative(&p, crate::spectral::Axis::X, 1)?.max_abs(),
    };
    let sup_x = |s: &SimState| -> Result<f64> {
        Ok(crate::spectral::derivative(&s.v, crate::spectral::Axis::X, 1)?.max_abs())
    };
    let mut t = Vec::new();
    let mut gap = Vec::new();
    let mut dens = Vec::new();
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        t.push(sa.t);
        gap.push(sa.v.sub(&sb.v)?.l2_norm());
        dens.push(sup_x(sa)? + sup_x(sb)?);
    }
    let mut k0 = vec![0.0; t.len()];
    let mut acc = 0.0;
    for i in 1..t.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (dens[i] + dens[i - 1]);
        k0[i] = acc + (t[i] - t[0]) * psi_x;
    }
    Ok(GapSeries { t, gap, k0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn box2pi(n: usize) -> Grid {
        Grid::new(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn phase_examples() {
        let g = box2pi(8);
        let th = linear_phase(&g, 0.0);
        assert_eq!(th[1], 1.0);
        assert_eq!(th[8 + 1], 2.0);
        assert_eq!(linear_phase(&g, 0.7)[1], 1.7);
        assert_eq!(th[8], 0.0);
    }

    #[test]
    fn propagation_examples() {
        let g = box2pi(32);
        let t = 0.37;
        let s = RealField::from_fn(g, |x, _| x.sin());
        let out = propagate_linear(&s, t, 0.0).unwrap();
        let expect = RealField::from_fn(g, |x, _| (x + t).sin());
        assert!(out.sub(&expect).unwrap().max_abs() < 1e-13);
        let c = RealField::from_fn(g, |x, y| (x + y).cos());
        let out = propagate_linear(&c, t, 0.0).unwrap();
        let expect = RealField::from_fn(g, |x, y| (x + y + 2.0 * t).cos());
        assert!(out.sub(&expect).unwrap().max_abs() < 1e-13);
        let bad = RealField::from_fn(g, |_, y| y.cos());
        assert!(propagate_linear(&bad, t, 0.0).is_err());
    }

    #[test]
    fn nonlinear_examples() {
        let g = box2pi(32);
        let s = RealField::from_fn(g, |x, _| x.sin());
        let n = nonlinear_rhs(&s, None, true).unwrap();
        let expect = RealField::from_fn(g, |x, _| -x.sin() * x.cos());
        assert!(n.sub(&expect).unwrap().max_abs() < 1e-14);
        let psi = RealField::from_fn(g, |x, y| 1.0 + x.cos() * y.sin());
        let z = nonlinear_rhs(&RealField::zeros(g), Some(&psi), true).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let other = RealField::zeros(box2pi(16));
        assert!(nonlinear_rhs(&s, Some(&other), true).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::new(1e-3, 1.0);
        assert!(c.validate().is_ok());
        c.reg_epsilon = 1e-3;
        assert!(c.validate().is_err());
        c.scheme = Scheme::RegularizedImex;
        assert!(c.validate().is_ok());
        c.reg_epsilon = 0.0;
        assert!(c.validate().is_err());
        assert!(SolverConfig::new(0.0, 1.0).validate().is_err());
        assert_eq!(SolverConfig::new(0.3, 1.0).steps().0, 4);
        assert_eq!(SolverConfig::new(1e-3, 1.0).steps().0, 1000);
    }

    #[test]
    fn etd_coefficients_small_z_limits() {
        let [q, f1, f2, f3] = etd_coefficients(Complex64::default(), 1.0);
        assert!((q - 0.5).norm() < 1e-14);
        for f in [f1, f2, f3] {
            assert!((f - 1.0 / 6.0).norm() < 1e-14);
        }
        let [_, f1, _, _] = etd_coefficients(Complex64::new(0.0, 1e-9), 1.0);
        assert!((f1 - 1.0 / 6.0).norm() < 1e-9);
    }

    #[test]
    fn rescale_identity_and_grid() {
        let g = box2pi(16);
        let f = RealField::from_fn(g, |x, y| x.sin() * y.cos());
        assert_eq!(rescale_solution(&f, 1.0).unwrap(), f);
        let h = rescale_solution(&f, 0.5).unwrap();
        assert_eq!(h.grid().lx(), 4.0 * PI);
        assert_eq!(h.grid().ly(), 8.0 * PI);
        assert_eq!(h.samples()[5], 0.25 * f.samples()[5]);
        assert!(rescale_solution(&f, 1.5).is_err());
        assert!(rescale_solution(&f, 0.0).is_err());
    }
}
