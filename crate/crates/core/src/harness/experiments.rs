//! Named experiments. Each one runs a fixed protocol on its configuration
//! and registers assertions of the form `measured ≤ tolerance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, OutputConfig};
use super::diagnostics::write_diagnostics;
use super::snapshot::write_snapshot_in_frame;
use crate::dispersion::{
    check_window, decay_profile, least_squares_slope, strichartz_probe, ProbeReport,
};
use crate::error::{invalid, Error, Result};
use crate::functionals::{
    chi_sequence, energy, momentum, sobolev_anisotropic_check, ChiConvention, SobolevProbe,
};
use crate::initial::InitialSpec;
use crate::par;
use crate::profiles::{traveling_residual, zaitsev_delta, zaitsev_grid, BackgroundSpec};
use crate::rng::substream_seed;
use crate::solver::{
    rescale_background, rescale_solution, simulate_recorded, stability_gap, Integrator, Recording,
    RunOutput, Scheme, SimState, SolverConfig,
};
use crate::spectral::{derivative, project_zero_xmean, Axis, Grid, RealField};

/// Time samples for the Strichartz quotients.
pub const STRICHARTZ_TIME_SAMPLES: usize = 64;
/// Seeded draws per Strichartz probe.
pub const STRICHARTZ_SAMPLES: usize = 100;
pub const SOBOLEV_SAMPLES: usize = 1000;
pub const CHI_SAMPLES: usize = 50;
/// Rescaling factor of the scaling check.
pub const SCALING_BETA: f64 = 0.5;
/// Perturbation sizes of the stability audit.
pub const STABILITY_SIZES: [f64; 2] = [1e-3, 1e-4];
/// Smoothing orders of the decay fit.
pub const DECAY_EPS: [f64; 2] = [0.0, 0.3];
pub const DECAY_TIMES: usize = 16;
pub const DECAY_T_MIN: f64 = 0.5;
/// Step sizes of the order check are `dt·{4, 2, 1}`, against a reference at `dt/8`.
pub const ORDER_FACTORS: [f64; 3] = [4.0, 2.0, 1.0];
pub const ORDER_REFERENCE_DIVISOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Experiment {
    ZaitsevPropagation,
    LineSolitonPerturbation,
    ConservationAudit,
    StrichartzProbe,
    ScalingCheck,
    SobolevAudit,
    ChiAudit,
    StabilityAudit,
    DispersiveDecay,
    OrderCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Self::ZaitsevPropagation,
        Self::LineSolitonPerturbation,
        Self::ConservationAudit,
        Self::StrichartzProbe,
        Self::ScalingCheck,
        Self::SobolevAudit,
        Self::ChiAudit,
        Self::StabilityAudit,
        Self::DispersiveDecay,
        Self::OrderCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::ZaitsevPropagation => "zaitsev-propagation",
            Self::LineSolitonPerturbation => "line-soliton-perturbation",
            Self::ConservationAudit => "conservation-audit",
            Self::StrichartzProbe => "strichartz-probe",
            Self::ScalingCheck => "scaling-check",
            Self::SobolevAudit => "sobolev-audit",
            Self::ChiAudit => "chi-audit",
            Self::StabilityAudit => "stability-audit",
            Self::DispersiveDecay => "dispersive-decay",
            Self::OrderCheck => "order-check",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|e| e.name()).collect();
                Error::Config(format!(
                    "experiment: unknown `{name}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }

    /// Registered assertions and their default tolerances.
    pub fn default_tolerances(&self) -> &'static [(&'static str, f64)] {
        match self {
            Self::ZaitsevPropagation => &[
                ("residual", 1e-7),
                ("profile_deviation", 1e-4),
                ("no_source", 1e-12),
            ],
            Self::LineSolitonPerturbation => &[("balance", 1e-3), ("no_source", 1e-12)],
            Self::ConservationAudit => &[("m_drift", 1e-8), ("e_drift", 1e-6), ("f_drift", 1e-4)],
            Self::StrichartzProbe => &[("r2_unitarity", 1e-12), ("doubling_growth", 2.0)],
            Self::ScalingCheck => &[("scaling", 1e-5)],
            Self::SobolevAudit => &[("sobolev_ratio", 1.0)],
            Self::ChiAudit => &[("chi3_momentum", 1e-10), ("chi5_spread", 1e-6)],
            Self::StabilityAudit => &[
                ("ratio_free", 0.1),
                ("ratio_background", 0.1),
                ("bound_free", 1.0 + 1e-9),
                ("bound_background", 1.0 + 1e-9),
            ],
            Self::DispersiveDecay => &[("exponent_plain", 0.1), ("exponent_smoothed", 0.1)],
            Self::OrderCheck => &[("order_etd_rk4", 0.3), ("order_if_rk4", 0.3)],
        }
    }

    pub fn default_config(&self) -> Result<ExperimentConfig> {
        let square = |n: usize, l: f64| Grid::new(n, n, l, l);
        let gd = |amplitude: f64, width: f64, x0: f64| InitialSpec::GaussianDerivative {
            amplitude,
            width,
            x0,
            y0: 0.0,
        };
        let solver = |dt: f64, t_end: f64, diag: usize, snap: usize| SolverConfig {
            diagnostics_stride: diag,
            snapshot_stride: snap,
            ..SolverConfig::new(dt, t_end)
        };
        let kdv = BackgroundSpec::kdv_line(1.0)?;
        let (grid, background, initial, mut solver) = match self {
            Self::ConservationAudit => (
                square(256, 32.0 * PI)?,
                BackgroundSpec::None,
                gd(1.0, 2.0, 0.0),
                solver(1e-3, 1.0, 10, 250),
            ),
            Self::ZaitsevPropagation => {
                let delta = zaitsev_delta(1.0, 0.5)?;
                (
                    zaitsev_grid(1.0, 0.5, delta)?,
                    BackgroundSpec::zaitsev_with_delta(1.0, 0.5, delta)?,
                    InitialSpec::Zero,
                    solver(1e-3, 1.0, 100, 500),
                )
            }
            Self::LineSolitonPerturbation => (
                square(256, 16.0 * PI)?,
                kdv,
                gd(0.1, 1.5, -3.0),
                solver(1e-3, 1.0, 10, 500),
            ),
            Self::StrichartzProbe => (
                square(64, 20.0)?,
                BackgroundSpec::None,
                InitialSpec::BandNoise {
                    amplitude: 1.0,
                    kmax: 2.0,
                    seed: 7,
                },
                solver(1e-2, 1.0, 1, usize::MAX),
            ),
            Self::ScalingCheck => (
                square(128, 16.0 * PI)?,
                kdv,
                gd(0.1, 2.0, -3.0),
                solver(2e-3, 0.5, 25, 50),
            ),
            Self::SobolevAudit => (
                square(128, 32.0)?,
                BackgroundSpec::None,
                InitialSpec::GaussianBumps {
                    count: 3,
                    amplitude: 1.0,
                    width: 2.0,
                    spread: 3.0,
                    seed: 0,
                },
                solver(1e-2, 0.0, 1, usize::MAX),
            ),
            Self::ChiAudit => (
                square(128, 48.0)?,
                BackgroundSpec::None,
                InitialSpec::GaussianBumps {
                    count: 3,
                    amplitude: 1.0,
                    width: 3.0,
                    spread: 4.0,
                    seed: 0,
                },
                solver(1e-2, 0.0, 1, usize::MAX),
            ),
            Self::StabilityAudit => (
                square(128, 16.0 * PI)?,
                kdv,
                gd(0.1, 2.0, -3.0),
                solver(2e-3, 1.0, 25, 25),
            ),
            Self::DispersiveDecay => (
                Grid::new(1024, 512, 400.0, 200.0)?,
                BackgroundSpec::None,
                InitialSpec::BandPulse {
                    amplitude: 1.0,
                    a: 2.5,
                    b: 1.5,
                },
                solver(1e-2, 4.0, 1, usize::MAX),
            ),
            Self::OrderCheck => (
                square(128, 16.0 * PI)?,
                BackgroundSpec::None,
                gd(1.0, 2.0, 0.0),
                solver(5e-3, 0.5, usize::MAX, usize::MAX),
            ),
        };
        solver.frame_speed = background.speed();
        let tolerances: BTreeMap<String, f64> = self
            .default_tolerances()
            .iter()
            .map(|(n, t)| (n.to_string(), *t))
            .collect();
        Ok(ExperimentConfig {
            experiment: *self,
            grid,
            background,
            initial,
            solver,
            output: OutputConfig {
                dir: PathBuf::from("out").join(self.name()),
                snapshots: true,
            },
            tolerances,
        })
    }

    /// Protocol-specific requirements on an otherwise valid configuration.
    pub(crate) fn check_setup(&self, cfg: &ExperimentConfig) -> Result<()> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{}: {what}", self.name())))
            }
        };
        match self {
            Self::ConservationAudit => need(
                cfg.background.is_none(),
                "requires background kind = \"none\"",
            ),
            Self::ZaitsevPropagation => need(
                matches!(cfg.background, BackgroundSpec::Zaitsev { .. }),
                "requires a zaitsev background",
            ),
            Self::LineSolitonPerturbation | Self::ScalingCheck => {
                need(!cfg.background.is_none(), "requires an active background")
            }
            Self::StrichartzProbe => need(
                matches!(cfg.initial, InitialSpec::BandNoise { .. }),
                "requires family = \"band_noise\"",
            ),
            Self::SobolevAudit | Self::ChiAudit => need(
                matches!(cfg.initial, InitialSpec::GaussianBumps { .. }),
                "requires family = \"gaussian_bumps\"",
            ),
            Self::DispersiveDecay => need(cfg.solver.t_end > DECAY_T_MIN, "requires t_end > 0.5"),
            Self::StabilityAudit | Self::OrderCheck => Ok(()),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One registered check: passes when `measured ≤ tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn at_most(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
            passed: measured.is_finite() && measured <= tolerance,
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e}, tolerance {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub assertions: Vec<Assertion>,
    /// Values logged for reference without a pass criterion.
    pub recorded: Vec<(String, f64)>,
    pub artifacts: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// 0 iff every assertion passed.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for a in &self.assertions {
            s.push_str(&format!("{a}\n"));
        }
        for (name, v) in &self.recorded {
            s.push_str(&format!("RECORD {name}: {v:.12e}\n"));
        }
        s
    }
}

/// Collects assertions and artifacts while an experiment runs.
struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: &'a Path,
    report: ExperimentReport,
}

impl<'a> Ctx<'a> {
    fn check(&mut self, name: &str, measured: f64) {
        let tol = self.cfg.tolerance(name);
        self.report
            .assertions
            .push(Assertion::at_most(name, measured, tol));
    }

    fn record(&mut self, name: &str, value: f64) {
        self.report.recorded.push((name.to_string(), value));
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let p = self.dir.join(name);
        std::fs::write(&p, contents)?;
        self.report.artifacts.push(p);
        Ok(())
    }

    /// Runs the solver from `start`, writing `{prefix}diagnostics.csv` and,
    /// if enabled, `{prefix}snap_NNNNN.kpi`. Artifacts recorded before a
    /// failure are still written, together with the last good state.
    fn run(
        &mut self,
        prefix: &str,
        start: SimState,
        solver: &SolverConfig,
        hook: impl FnMut(usize, &SimState) -> Result<()>,
    ) -> Result<RunOutput> {
        let mut rec = Recording::default();
        let result = simulate_recorded(start, solver, &mut rec, hook);
        let artifacts = write_run(
            self.dir,
            prefix,
            &rec,
            solver.frame_speed,
            self.cfg.output.snapshots,
        );
        if let Err(Error::Unstable { last_good, .. }) = &result {
            let p = self.dir.join(format!("{prefix}snap_last_good.kpi"));
            write_snapshot_in_frame(last_good, solver.frame_speed, &p)?;
            self.report.artifacts.push(p);
        }
        self.report.artifacts.extend(artifacts?);
        let final_state = result?;
        Ok(RunOutput {
            final_state,
            diagnostics: rec.diagnostics,
            snapshots: rec.snapshots,
        })
    }
}

fn write_run(
    dir: &Path,
    prefix: &str,
    rec: &Recording,
    frame_speed: f64,
    snapshots: bool,
) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if !rec.diagnostics.is_empty() {
        let p = dir.join(format!("{prefix}diagnostics.csv"));
        write_diagnostics(&rec.diagnostics, &p)?;
        out.push(p);
    }
    if snapshots {
        for (i, s) in rec.snapshots.iter().enumerate() {
            let p = dir.join(format!("{prefix}snap_{i:05}.kpi"));
            write_snapshot_in_frame(s, frame_speed, &p)?;
            out.push(p);
        }
    }
    Ok(out)
}

fn prepare_dir(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(())
}

/// Evolves the configured initial data and writes diagnostics and snapshots,
/// without assertions.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<(RunOutput, Vec<PathBuf>)> {
    cfg.validate()?;
    let phi = cfg.initial.sample(&cfg.grid)?;
    prepare_dir(cfg)?;
    let mut ctx = Ctx {
        cfg,
        dir: &cfg.output.dir,
        report: ExperimentReport {
            experiment: cfg.experiment,
            assertions: vec![],
            recorded: vec![],
            artifacts: vec![],
        },
    };
    let ratio = crate::functionals::boundary_ratio(&phi);
    if ratio >= crate::functionals::LOCALIZED_TOL {
        return Err(invalid(
            "initial",
            format!("initial data is not localized: boundary/peak = {ratio:.2e}"),
        ));
    }
    let run = ctx.run(
        "",
        SimState::new(phi, cfg.background),
        &cfg.solver,
        |_, _| Ok(()),
    )?;
    Ok((run, ctx.report.artifacts))
}

/// Runs the configured experiment, writes its artifacts and `summary.txt`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    prepare_dir(cfg)?;
    let mut ctx = Ctx {
        cfg,
        dir: &cfg.output.dir,
        report: ExperimentReport {
            experiment: cfg.experiment,
            assertions: vec![],
            recorded: vec![],
            artifacts: vec![],
        },
    };
    match cfg.experiment {
        Experiment::ConservationAudit => conservation_audit(&mut ctx)?,
        Experiment::ZaitsevPropagation => zaitsev_propagation(&mut ctx)?,
        Experiment::LineSolitonPerturbation => line_soliton_perturbation(&mut ctx)?,
        Experiment::StrichartzProbe => strichartz(&mut ctx)?,
        Experiment::ScalingCheck => scaling_check(&mut ctx)?,
        Experiment::SobolevAudit => sobolev_audit(&mut ctx)?,
        Experiment::ChiAudit => chi_audit(&mut ctx)?,
        Experiment::StabilityAudit => stability_audit(&mut ctx)?,
        Experiment::DispersiveDecay => dispersive_decay(&mut ctx)?,
        Experiment::OrderCheck => order_check(&mut ctx)?,
    }
    let summary = ctx.report.summary();
    ctx.write("summary.txt", &summary)?;
    Ok(ctx.report)
}

/// `max_t |x(t) − x(0)| / |x(0)|`.
fn relative_drift(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let x0 = v[0];
    v.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max) / x0.abs()
}

fn conservation_audit(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let phi = cfg.initial.sample(&cfg.grid)?;
    let run = ctx.run(
        "",
        SimState::new(phi, cfg.background),
        &cfg.solver,
        |_, _| Ok(()),
    )?;
    let d = &run.diagnostics;
    ctx.check("m_drift", relative_drift(d.iter().map(|r| r.m)));
    ctx.check("e_drift", relative_drift(d.iter().map(|r| r.e)));
    ctx.check("f_drift", relative_drift(d.iter().map(|r| r.fpsi)));
    Ok(())
}

/// Largest `‖v(t)‖` over every step of a run from `v = 0`.
fn no_source(grid: Grid, background: BackgroundSpec, solver: &SolverConfig) -> Result<f64> {
    let integrator = Integrator::new(grid, background, *solver)?;
    let mut worst = 0.0f64;
    let (n, _) = solver.steps();
    integrator.run(
        &SimState::new(RealField::zeros(grid), background),
        n,
        |_, s| {
            worst = worst.max(s.v.l2_norm());
            Ok(())
        },
    )?;
    Ok(worst)
}

/// Evolves the full field `u = ψ` without a background. The x-mean `m̄` of ψ
/// is removed and absorbed into the frame: `w = u − m̄` solves the same
/// equation in a frame moving with `c − m̄`.
fn zaitsev_propagation(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let c = cfg.background.speed();
    let psi = cfg
        .background
        .profile(&cfg.grid)?
        .expect("zaitsev background");
    ctx.check("residual", traveling_residual(&psi, c));

    let mean = psi.to_spectral().coeff(0, 0).re;
    let w0 = project_zero_xmean(&psi);
    let mut solver = cfg.solver;
    solver.frame_speed = c - mean;
    let run = ctx.run(
        "",
        SimState::new(w0.clone(), BackgroundSpec::None),
        &solver,
        |_, _| Ok(()),
    )?;
    let dev = run.final_state.v.sub(&w0)?.l2_norm() / psi.l2_norm();
    ctx.check("profile_deviation", dev);
    ctx.record("x_mean", mean);

    ctx.check(
        "no_source",
        no_source(cfg.grid, cfg.background, &cfg.solver)?,
    );
    Ok(())
}

/// Centered differences of `M` against `−∫ψ_x v²` at interior samples with
/// equal spacing on both sides; returns the worst relative error.
pub fn balance_error(t: &[f64], m: &[f64], source: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for k in 1..t.len().saturating_sub(1) {
        let (h0, h1) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        if (h1 - h0).abs() > 1e-9 * h0 {
            continue;
        }
        let fd = (m[k + 1] - m[k - 1]) / (h0 + h1);
        worst = worst.max((fd - source[k]).abs() / source[k].abs());
    }
    worst
}

fn line_soliton_perturbation(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let psi = cfg
        .background
        .profile(&cfg.grid)?
        .expect("active background");
    let psi_x = derivative(&psi, Axis::X, 1)?;
    let phi = cfg.initial.sample(&cfg.grid)?;
    let (n, _) = cfg.solver.steps();
    let stride = cfg.solver.diagnostics_stride;
    let (mut t, mut m, mut src) = (vec![], vec![], vec![]);
    ctx.run(
        "",
        SimState::new(phi, cfg.background),
        &cfg.solver,
        |i, s| {
            if i % stride == 0 || i == n {
                t.push(s.t);
                m.push(momentum(&s.v));
                src.push(-psi_x.zip_map(&s.v, |p, v| p * v * v)?.integral());
            }
            Ok(())
        },
    )?;
    ctx.check("balance", balance_error(&t, &m, &src));
    ctx.check(
        "no_source",
        no_source(cfg.grid, cfg.background, &cfg.solver)?,
    );
    Ok(())
}

fn strichartz(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let InitialSpec::BandNoise { kmax, seed, .. } = cfg.initial else {
        unreachable!("checked by check_setup")
    };
    let (t_end, nt, samples) = (
        cfg.solver.t_end,
        STRICHARTZ_TIME_SAMPLES,
        STRICHARTZ_SAMPLES,
    );
    let g = cfg.grid;
    let fine = Grid::new(2 * g.nx(), 2 * g.ny(), g.lx(), g.ly())?;
    let r2 = strichartz_probe(&g, 2.0, 0.0, t_end, nt, samples, kmax, seed)?;
    let coarse = strichartz_probe(&g, f64::INFINITY, 0.3, t_end, nt, samples, kmax, seed)?;
    let doubled = strichartz_probe(&fine, f64::INFINITY, 0.3, t_end, nt, samples, kmax, seed)?;
    ctx.check(
        "r2_unitarity",
        (r2.max - 1.0).abs().max((r2.min - 1.0).abs()),
    );
    ctx.check("doubling_growth", doubled.max / coarse.max);
    ctx.record("max_quotient_coarse", coarse.max);
    ctx.record("max_quotient_doubled", doubled.max);
    let mut csv = format!("{}\n", ProbeReport::CSV_HEADER);
    for r in [&r2, &coarse, &doubled] {
        csv.push_str(&format!("{}\n", r.csv_row()));
    }
    ctx.write("probe.csv", &csv)
}

fn scaling_check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let beta = SCALING_BETA;
    let phi = cfg.initial.sample(&cfg.grid)?;
    let a = ctx.run(
        "",
        SimState::new(phi.clone(), cfg.background),
        &cfg.solver,
        |_, _| Ok(()),
    )?;

    let bg = rescale_background(cfg.background, beta)?;
    let b3 = beta.powi(3);
    let solver_b = SolverConfig {
        dt: cfg.solver.dt / b3,
        t_end: cfg.solver.t_end / b3,
        frame_speed: bg.speed(),
        ..cfg.solver
    };
    let b = ctx.run(
        "rescaled_",
        SimState::new(rescale_solution(&phi, beta)?, bg),
        &solver_b,
        |_, _| Ok(()),
    )?;

    let mut worst = 0.0f64;
    for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
        let mapped = rescale_solution(&sa.v, beta)?;
        let norm = mapped.l2_norm();
        if norm > 0.0 {
            worst = worst.max(mapped.sub(&sb.v)?.l2_norm() / norm);
        }
    }
    ctx.check("scaling", worst);
    Ok(())
}

/// Sample `i` of a seeded family uses the sub-stream `i` of its seed.
fn seeded_sample(spec: InitialSpec, i: usize, grid: &Grid) -> Result<RealField> {
    let spec = match spec {
        InitialSpec::GaussianBumps {
            count,
            amplitude,
            width,
            spread,
            seed,
        } => InitialSpec::GaussianBumps {
            count,
            amplitude,
            width,
            spread,
            seed: substream_seed(seed, i as u64),
        },
        InitialSpec::BandNoise {
            amplitude,
            kmax,
            seed,
        } => InitialSpec::BandNoise {
            amplitude,
            kmax,
            seed: substream_seed(seed, i as u64),
        },
        other => other,
    };
    spec.sample(grid)
}

fn sobolev_audit(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let c6 = SobolevProbe::interpolated_constant(6.0);
    let ratios = par::map_indices(SOBOLEV_SAMPLES, |i| {
        let u = seeded_sample(cfg.initial, i, &cfg.grid)?;
        let p = sobolev_anisotropic_check(&u, 6.0)?;
        Ok(p.lhs / p.rhs(c6))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let mut csv = String::from("sample,ratio\n");
    for (i, r) in ratios.iter().enumerate() {
        csv.push_str(&format!("{i},{r:.16e}\n"));
    }
    ctx.write("sobolev.csv", &csv)?;
    ctx.check("sobolev_ratio", ratios.iter().copied().fold(0.0, f64::max));
    Ok(())
}

fn chi_audit(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let rows = par::map_indices(CHI_SAMPLES, |i| {
        let u = seeded_sample(cfg.initial, i, &cfg.grid)?;
        let seq = chi_sequence(&u, 5, ChiConvention::Normalized)?;
        let m = momentum(&u);
        let e = energy(&u)?;
        Ok((seq[2].integral().re - m, seq[4].integral().re / e))
    })
    .into_iter()
    .collect::<Result<Vec<(f64, f64)>>>()?;
    let defect = rows.iter().map(|r| r.0.abs()).fold(0.0, f64::max);
    let ratios: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut csv = String::from("sample,chi3_minus_m,chi5_over_e\n");
    for (i, (d, r)) in rows.iter().enumerate() {
        csv.push_str(&format!("{i},{d:.16e},{r:.16e}\n"));
    }
    ctx.write("chi.csv", &csv)?;
    ctx.check("chi3_momentum", defect);
    ctx.check("chi5_spread", (hi - lo) / mean.abs());
    ctx.record("chi5_over_energy", mean);
    Ok(())
}

/// Perturbation of L² size `size`, from a fixed seeded family.
fn stability_perturbation(grid: &Grid, size: f64) -> Result<RealField> {
    let p = InitialSpec::GaussianBumps {
        count: 2,
        amplitude: 1.0,
        width: 2.0,
        spread: 3.0,
        seed: 1,
    }
    .sample(grid)?;
    Ok(p.scale(size / p.l2_norm()))
}

/// For each background: the gap ratio between the two perturbation sizes,
/// and the bound `gap(t) ≤ exp(K·k0(t))·gap(0)` with one constant `K` fitted
/// over both sizes.
fn stability_audit(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let base = cfg.initial.sample(&cfg.grid)?;
    let mut cases = vec![("free", BackgroundSpec::None)];
    if !cfg.background.is_none() {
        cases.push(("background", cfg.background));
    }
    let mut csv = String::from("case,size,t,gap,k0\n");
    for (label, bg) in cases {
        let solver = SolverConfig {
            frame_speed: bg.speed(),
            ..cfg.solver
        };
        let reference = ctx.run(
            &format!("{label}_"),
            SimState::new(base.clone(), bg),
            &solver,
            |_, _| Ok(()),
        )?;
        let mut series = Vec::new();
        for size in STABILITY_SIZES {
            let start = base.add(&stability_perturbation(&cfg.grid, size)?)?;
            let mut rec = Recording::default();
            let end =
                simulate_recorded(SimState::new(start, bg), &solver, &mut rec, |_, _| Ok(()))?;
            let run = RunOutput {
                final_state: end,
                diagnostics: rec.diagnostics,
                snapshots: rec.snapshots,
            };
            let gs = stability_gap(&reference, &run)?;
            for ((t, g), k) in gs.t.iter().zip(&gs.gap).zip(&gs.k0) {
                csv.push_str(&format!("{label},{size:e},{t:.16e},{g:.16e},{k:.16e}\n"));
            }
            series.push(gs);
        }
        let last = |i: usize| *series[i].gap.last().expect("nonempty");
        let ratio = last(0) / last(1);
        let expected = STABILITY_SIZES[0] / STABILITY_SIZES[1];
        ctx.check(&format!("ratio_{label}"), (ratio / expected - 1.0).abs());
        let k = series
            .iter()
            .map(|g| g.fitted_constant())
            .fold(0.0, f64::max);
        let excess = series
            .iter()
            .flat_map(|gs| {
                gs.gap
                    .iter()
                    .zip(&gs.k0)
                    .map(move |(g, k0)| g / ((k * k0).exp() * gs.gap[0]))
            })
            .fold(0.0, f64::max);
        ctx.check(&format!("bound_{label}"), excess);
        ctx.record(&format!("fitted_k_{label}"), k);
    }
    ctx.write("stability.csv", &csv)
}

fn dispersive_decay(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let phi = cfg.initial.sample(&cfg.grid)?;
    let t_max = cfg.solver.t_end;
    check_window(&phi, t_max)?;
    let ratio = t_max / DECAY_T_MIN;
    let ts: Vec<f64> = (0..DECAY_TIMES)
        .map(|i| DECAY_T_MIN * ratio.powf(i as f64 / (DECAY_TIMES - 1) as f64))
        .collect();
    let mut csv = String::from("eps,t,sup\n");
    for (eps, name) in DECAY_EPS
        .into_iter()
        .zip(["exponent_plain", "exponent_smoothed"])
    {
        let sup = decay_profile(&phi, eps, &ts)?;
        for (t, s) in ts.iter().zip(&sup) {
            csv.push_str(&format!("{eps},{t:.16e},{s:.16e}\n"));
        }
        let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
        let slope = least_squares_slope(&xs, &ys);
        ctx.check(name, (slope - (-1.0 + eps / 3.0)).abs());
        ctx.record(&format!("slope_eps_{eps}"), slope);
    }
    ctx.write("decay.csv", &csv)
}

fn final_state(start: &SimState, solver: &SolverConfig) -> Result<SimState> {
    let integrator = Integrator::new(*start.v.grid(), start.background, *solver)?;
    integrator.run(start, solver.steps().0, |_, _| Ok(()))
}

/// Self-convergence order: least-squares slope of `log e(h)` against `log h`
/// with `e(h) = ‖v_h(T) − v_ref(T)‖`.
fn order_check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let start = SimState::new(cfg.initial.sample(&cfg.grid)?, cfg.background);
    let mut csv = String::from("scheme,dt,error\n");
    for scheme in [Scheme::EtdRk4, Scheme::IfRk4] {
        let base = SolverConfig {
            scheme,
            reg_epsilon: 0.0,
            ..cfg.solver
        };
        let reference = final_state(
            &start,
            &SolverConfig {
                dt: base.dt / ORDER_REFERENCE_DIVISOR,
                ..base
            },
        )?;
        let mut xs = vec![];
        let mut ys = vec![];
        for f in ORDER_FACTORS {
            let s = SolverConfig {
                dt: base.dt * f,
                ..base
            };
            let err = final_state(&start, &s)?.v.sub(&reference.v)?.l2_norm();
            csv.push_str(&format!(
                "{},{:.16e},{err:.16e}\n",
                scheme.name(),
                s.steps().1
            ));
            xs.push(s.steps().1.ln());
            ys.push(err.ln());
        }
        let order = least_squares_slope(&xs, &ys);
        ctx.check(&format!("order_{}", scheme.name()), (order - 4.0).abs());
        ctx.record(&format!("order_{}", scheme.name()), order);
    }
    ctx.write("order.csv", &csv)
}
