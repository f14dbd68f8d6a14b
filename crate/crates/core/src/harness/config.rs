//! TOML experiment configuration.
//!
//! A file names one registered experiment and may override any of the
//! sections `[grid]`, `[background]`, `[initial]`, `[solver]`, `[output]` and
//! `[tolerances]`. Omitted values take the experiment's defaults; unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::experiments::Experiment;
use crate::error::{Error, Result};
use crate::initial::InitialSpec;
use crate::profiles::{zaitsev_delta, zaitsev_grid, BackgroundSpec};
use crate::solver::{Scheme, SolverConfig};
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Whether recorded snapshots are written to disk.
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: Grid,
    pub background: BackgroundSpec,
    pub initial: InitialSpec,
    pub solver: SolverConfig,
    pub output: OutputConfig,
    /// Assertion name to tolerance; always holds every registered assertion.
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Result<Self> {
        experiment.default_config()
    }

    /// Tolerance of a registered assertion.
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances[name]
    }

    pub fn validate(&self) -> Result<()> {
        self.solver
            .validate()
            .map_err(|e| in_section("solver", e))?;
        if !self.background.is_none() {
            let c = self.background.speed();
            if (self.solver.frame_speed - c).abs() > 1e-12 * c {
                return Err(Error::Config(format!(
                    "solver.frame_speed: {} must equal the background speed {c}",
                    self.solver.frame_speed
                )));
            }
        }
        let expected = self.experiment.default_tolerances();
        for (name, _) in expected {
            match self.tolerances.get(*name) {
                Some(t) if t.is_finite() && *t > 0.0 => {}
                Some(t) => {
                    return Err(Error::Config(format!(
                        "tolerances.{name}: {t} must be positive"
                    )))
                }
                None => return Err(Error::Config(format!("tolerances.{name}: missing"))),
            }
        }
        if let Some(extra) = self
            .tolerances
            .keys()
            .find(|k| !expected.iter().any(|(n, _)| n == k))
        {
            return Err(unknown_tolerance(self.experiment, extra));
        }
        self.experiment.check_setup(self)
    }
}

fn unknown_tolerance(exp: Experiment, key: &str) -> Error {
    let names: Vec<&str> = exp.default_tolerances().iter().map(|(n, _)| *n).collect();
    Error::Config(format!(
        "tolerances.{key}: not an assertion of {}; expected one of {}",
        exp.name(),
        names.join(", ")
    ))
}

/// Rewrites an operator error as a config error naming the offending key.
fn in_section(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            Error::Config(format!("{section}.{name}: {reason}"))
        }
        Error::InvalidGrid(reason) => Error::Config(format!("{section}: {reason}")),
        other => Error::Config(format!("{section}: {other}")),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: String,
    grid: Option<RawGrid>,
    background: Option<RawBackground>,
    initial: Option<RawInitial>,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
    tolerances: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: Option<usize>,
    ny: Option<usize>,
    lx: Option<f64>,
    ly: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackground {
    kind: Option<String>,
    c: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    delta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    family: Option<String>,
    amplitude: Option<f64>,
    width: Option<f64>,
    x0: Option<f64>,
    y0: Option<f64>,
    count: Option<usize>,
    spread: Option<f64>,
    seed: Option<u64>,
    kmax: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    scheme: Option<String>,
    dt: Option<f64>,
    t_end: Option<f64>,
    frame_speed: Option<f64>,
    dealias: Option<bool>,
    reg_epsilon: Option<f64>,
    snapshot_stride: Option<usize>,
    diagnostics_stride: Option<usize>,
    hs_index: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    snapshots: Option<bool>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| parse_error(text, &e))?;
    let experiment = Experiment::parse(&raw.experiment)?;
    let def = experiment.default_config()?;

    let background = match raw.background {
        None => def.background,
        Some(rb) => {
            merge_background(def.background, rb).map_err(|e| in_section("background", e))?
        }
    };

    // A changed Zaitsev wave needs a grid spanning its own y-period.
    let base_grid = match background {
        BackgroundSpec::Zaitsev { alpha, beta, delta } if background != def.background => {
            zaitsev_grid(alpha, beta, delta).map_err(|e| in_section("background", e))?
        }
        _ => def.grid,
    };
    let grid = match raw.grid {
        None => base_grid,
        Some(g) => Grid::new(
            g.nx.unwrap_or(base_grid.nx()),
            g.ny.unwrap_or(base_grid.ny()),
            g.lx.unwrap_or(base_grid.lx()),
            g.ly.unwrap_or(base_grid.ly()),
        )
        .map_err(|e| in_section("grid", e))?,
    };

    let initial = match raw.initial {
        None => def.initial,
        Some(ri) => merge_initial(def.initial, ri).map_err(|e| in_section("initial", e))?,
    };

    let solver = merge_solver(def.solver, &background, raw.solver.unwrap_or_default())
        .map_err(|e| in_section("solver", e))?;

    let ro = raw.output.unwrap_or_default();
    let output = OutputConfig {
        dir: ro.dir.unwrap_or(def.output.dir),
        snapshots: ro.snapshots.unwrap_or(def.output.snapshots),
    };

    let mut tolerances = def.tolerances;
    for (k, v) in raw.tolerances.unwrap_or_default() {
        match tolerances.get_mut(&k) {
            Some(slot) => *slot = v,
            None => return Err(unknown_tolerance(experiment, &k)),
        }
    }

    let cfg = ExperimentConfig {
        experiment,
        grid,
        background,
        initial,
        solver,
        output,
        tolerances,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn parse_error(text: &str, e: &toml::de::Error) -> Error {
    let msg = e.message().trim();
    match e.span() {
        Some(span) => {
            let before = &text[..span.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Error::Config(format!("parse error at line {line}, column {col}: {msg}"))
        }
        None => Error::Config(format!("parse error: {msg}")),
    }
}

fn reject(section_kind: &str, fields: &[(&'static str, bool)]) -> Result<()> {
    match fields.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(crate::error::invalid(
            name,
            format!("does not apply to {section_kind}"),
        )),
        None => Ok(()),
    }
}

fn merge_background(def: BackgroundSpec, rb: RawBackground) -> Result<BackgroundSpec> {
    let default_kind = match def {
        BackgroundSpec::None => "none",
        BackgroundSpec::KdvLine { .. } => "kdv",
        BackgroundSpec::Zaitsev { .. } => "zaitsev",
    };
    let kind = rb.kind.as_deref().unwrap_or(default_kind);
    match kind {
        "none" => {
            reject(
                "kind = \"none\"",
                &[
                    ("c", rb.c.is_some()),
                    ("alpha", rb.alpha.is_some()),
                    ("beta", rb.beta.is_some()),
                    ("delta", rb.delta.is_some()),
                ],
            )?;
            Ok(BackgroundSpec::None)
        }
        "kdv" => {
            reject(
                "kind = \"kdv\"",
                &[
                    ("alpha", rb.alpha.is_some()),
                    ("beta", rb.beta.is_some()),
                    ("delta", rb.delta.is_some()),
                ],
            )?;
            let c0 = match def {
                BackgroundSpec::KdvLine { c } => c,
                _ => 1.0,
            };
            BackgroundSpec::kdv_line(rb.c.unwrap_or(c0))
        }
        "zaitsev" => {
            reject(
                "kind = \"zaitsev\" (its speed follows from alpha, beta)",
                &[("c", rb.c.is_some())],
            )?;
            let (a0, b0, d0) = match def {
                BackgroundSpec::Zaitsev { alpha, beta, delta } => (alpha, beta, Some(delta)),
                _ => (1.0, 0.5, None),
            };
            let alpha = rb.alpha.unwrap_or(a0);
            let beta = rb.beta.unwrap_or(b0);
            let delta = match rb.delta {
                Some(d) => d,
                None if alpha == a0 && beta == b0 && d0.is_some() => d0.expect("checked"),
                None => {
                    BackgroundSpec::zaitsev_with_delta(alpha, beta, 1.0)?;
                    zaitsev_delta(alpha, beta)?
                }
            };
            BackgroundSpec::zaitsev_with_delta(alpha, beta, delta)
        }
        other => Err(crate::error::invalid(
            "kind",
            format!("unknown background `{other}`; expected none, kdv or zaitsev"),
        )),
    }
}

fn merge_initial(def: InitialSpec, ri: RawInitial) -> Result<InitialSpec> {
    let family = ri
        .family
        .clone()
        .unwrap_or_else(|| def.family().to_string());
    let same = family == def.family();
    // Family defaults, replaced by the experiment's values for the same family.
    let (mut amplitude, mut width, mut x0, mut y0) = (1.0, 2.0, 0.0, 0.0);
    let (mut count, mut spread, mut seed, mut kmax, mut a, mut b) =
        (3usize, 3.0, 0u64, 2.0, 2.5, 1.5);
    if same {
        match def {
            InitialSpec::Zero => {}
            InitialSpec::GaussianDerivative {
                amplitude: am,
                width: w,
                x0: xx,
                y0: yy,
            } => (amplitude, width, x0, y0) = (am, w, xx, yy),
            InitialSpec::GaussianBumps {
                count: n,
                amplitude: am,
                width: w,
                spread: s,
                seed: sd,
            } => (count, amplitude, width, spread, seed) = (n, am, w, s, sd),
            InitialSpec::BandNoise {
                amplitude: am,
                kmax: k,
                seed: sd,
            } => (amplitude, kmax, seed) = (am, k, sd),
            InitialSpec::BandPulse {
                amplitude: am,
                a: aa,
                b: bb,
            } => (amplitude, a, b) = (am, aa, bb),
        }
    }
    let set = |name: &'static str, on: bool| (name, on);
    let all = [
        set("amplitude", ri.amplitude.is_some()),
        set("width", ri.width.is_some()),
        set("x0", ri.x0.is_some()),
        set("y0", ri.y0.is_some()),
        set("count", ri.count.is_some()),
        set("spread", ri.spread.is_some()),
        set("seed", ri.seed.is_some()),
        set("kmax", ri.kmax.is_some()),
        set("a", ri.a.is_some()),
        set("b", ri.b.is_some()),
    ];
    let allowed: &[&str] = match family.as_str() {
        "zero" => &[],
        "gaussian_derivative" => &["amplitude", "width", "x0", "y0"],
        "gaussian_bumps" => &["count", "amplitude", "width", "spread", "seed"],
        "band_noise" => &["amplitude", "kmax", "seed"],
        "band_pulse" => &["amplitude", "a", "b"],
        other => {
            return Err(crate::error::invalid(
                "family",
                format!(
                    "unknown family `{other}`; expected zero, gaussian_derivative, \
                     gaussian_bumps, band_noise or band_pulse"
                ),
            ))
        }
    };
    let stray: Vec<(&'static str, bool)> = all
        .iter()
        .map(|&(n, on)| (n, on && !allowed.contains(&n)))
        .collect();
    reject(&format!("family `{family}`"), &stray)?;
    amplitude = ri.amplitude.unwrap_or(amplitude);
    width = ri.width.unwrap_or(width);
    x0 = ri.x0.unwrap_or(x0);
    y0 = ri.y0.unwrap_or(y0);
    count = ri.count.unwrap_or(count);
    spread = ri.spread.unwrap_or(spread);
    seed = ri.seed.unwrap_or(seed);
    kmax = ri.kmax.unwrap_or(kmax);
    a = ri.a.unwrap_or(a);
    b = ri.b.unwrap_or(b);
    Ok(match family.as_str() {
        "zero" => InitialSpec::Zero,
        "gaussian_derivative" => InitialSpec::GaussianDerivative {
            amplitude,
            width,
            x0,
            y0,
        },
        "gaussian_bumps" => InitialSpec::GaussianBumps {
            count,
            amplitude,
            width,
            spread,
            seed,
        },
        "band_noise" => InitialSpec::BandNoise {
            amplitude,
            kmax,
            seed,
        },
        _ => InitialSpec::BandPulse { amplitude, a, b },
    })
}

fn merge_solver(
    def: SolverConfig,
    background: &BackgroundSpec,
    rs: RawSolver,
) -> Result<SolverConfig> {
    let mut s = def;
    if let Some(name) = rs.scheme {
        s.scheme = Scheme::parse(&name)?;
    }
    s.dt = rs.dt.unwrap_or(s.dt);
    s.t_end = rs.t_end.unwrap_or(s.t_end);
    s.dealias = rs.dealias.unwrap_or(s.dealias);
    s.reg_epsilon = rs.reg_epsilon.unwrap_or(s.reg_epsilon);
    s.snapshot_stride = rs.snapshot_stride.unwrap_or(s.snapshot_stride);
    s.diagnostics_stride = rs.diagnostics_stride.unwrap_or(s.diagnostics_stride);
    s.hs_index = rs.hs_index.unwrap_or(s.hs_index);
    s.frame_speed = match rs.frame_speed {
        Some(f) => f,
        None if background.is_none() => s.frame_speed,
        None => background.speed(),
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("experiment = \"conservation-audit\"\n").unwrap();
        assert_eq!(cfg, Experiment::ConservationAudit.default_config().unwrap());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("experiment = \"conservation-audit\"\n[grid]\ndx = 0.1\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("dx"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn beta_outside_unit_interval_is_rejected() {
        let text = "experiment = \"zaitsev-propagation\"\n[background]\nbeta = 1.5\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("|beta| < 1"), "{err}");
        assert!(err.contains("background.beta"), "{err}");
    }

    #[test]
    fn unknown_experiment_and_tolerance() {
        assert!(parse_config("experiment = \"nope\"\n").is_err());
        let err = parse_config("experiment = \"conservation-audit\"\n[tolerances]\nfoo = 1.0\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("foo"), "{err}");
    }

    #[test]
    fn family_fields_are_checked() {
        let text = "experiment = \"conservation-audit\"\n[initial]\nfamily = \"band_noise\"\nwidth = 2.0\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("initial.width"), "{err}");
        let text =
            "experiment = \"conservation-audit\"\n[initial]\nfamily = \"band_noise\"\nseed = 4\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(
            cfg.initial,
            InitialSpec::BandNoise {
                amplitude: 1.0,
                kmax: 2.0,
                seed: 4
            }
        );
    }

    #[test]
    fn frame_speed_follows_background() {
        let text = "experiment = \"line-soliton-perturbation\"\n[background]\nc = 2.0\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.solver.frame_speed, 2.0);
        let text = "experiment = \"line-soliton-perturbation\"\n[solver]\nframe_speed = 0.5\n";
        assert!(parse_config(text)
            .unwrap_err()
            .to_string()
            .contains("frame_speed"));
    }
}
