use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use kpiwave::dispersion::{strichartz_probe, ProbeReport};
use kpiwave::harness::{
    configure_threads_from_env, diagnostics::diagnostics_to_string, load_config,
    read_snapshot_with_header, run_experiment, run_simulation, write_snapshot_in_frame,
};
use kpiwave::profiles::{
    kdv_line, traveling_residual, zaitsev, zaitsev_delta, zaitsev_grid, zaitsev_speed,
};
use kpiwave::{BackgroundSpec, FunctionalReport, Grid, SimState};

/// Pseudo-spectral KP-I simulations around line solitons and Zaitsev waves.
#[derive(Parser)]
#[command(name = "kpiwave", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured initial data and write diagnostics and snapshots.
    Simulate { config: PathBuf },
    /// Run the configured experiment and print one PASS/FAIL line per assertion.
    CheckInvariants { config: PathBuf },
    /// Monte-Carlo Strichartz quotient over seeded band-limited noise.
    ProbeStrichartz(ProbeArgs),
    /// Write a background profile as a snapshot of the full field at rest.
    Profile(ProfileArgs),
    /// Evaluate the conserved functionals and norms of a snapshot.
    Functionals {
        snapshot: PathBuf,
        /// Index s of the H^{s,0} column.
        #[arg(long, default_value_t = 2.0)]
        hs_index: f64,
    },
}

#[derive(clap::Args)]
struct ProbeArgs {
    /// Spatial exponent r in [2, inf]; `inf` for the sup norm.
    #[arg(long, default_value = "inf", value_parser = parse_exponent)]
    r: f64,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Time samples of [0, T].
    #[arg(long, default_value_t = 64)]
    nt: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 64)]
    nx: usize,
    #[arg(long, default_value_t = 64)]
    ny: usize,
    #[arg(long, default_value_t = 20.0)]
    lx: f64,
    #[arg(long, default_value_t = 20.0)]
    ly: f64,
    /// Band limit of the noise in both directions.
    #[arg(long, default_value_t = 2.0)]
    kmax: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Append the result row to this CSV (header written if new).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKind {
    Kdv,
    Zaitsev,
}

#[derive(clap::Args)]
struct ProfileArgs {
    #[arg(long, value_enum)]
    kind: ProfileKind,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Line soliton speed.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Transverse wavenumber; solved numerically when omitted.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    lx: Option<f64>,
    #[arg(long)]
    ly: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|e| format!("{e}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads_from_env()?;
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load_config(&config)?;
            let (run, artifacts) = run_simulation(&cfg)?;
            print!(
                "{}",
                diagnostics_to_string(&run.diagnostics[run.diagnostics.len() - 1..])?
            );
            eprintln!(
                "wrote {} artifacts to {}",
                artifacts.len(),
                cfg.output.dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckInvariants { config } => {
            let cfg = load_config(&config)?;
            let report = run_experiment(&cfg)?;
            print!("{}", report.summary());
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::ProbeStrichartz(a) => {
            let grid = Grid::new(a.nx, a.ny, a.lx, a.ly)?;
            let report =
                strichartz_probe(&grid, a.r, a.eps, a.t_end, a.nt, a.samples, a.kmax, a.seed)?;
            println!("{}", ProbeReport::CSV_HEADER);
            println!("{}", report.csv_row());
            if let Some(path) = a.out {
                append_probe(&path, &report)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Profile(a) => {
            profile(a)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Functionals { snapshot, hs_index } => {
            let (_, state) = read_snapshot_with_header(&snapshot)
                .with_context(|| format!("reading {}", snapshot.display()))?;
            let psi = state.background.profile(state.v.grid())?;
            let report = FunctionalReport::compute(state.t, &state.v, psi.as_ref(), hs_index)?;
            print!("{}", diagnostics_to_string(&[report])?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn append_probe(path: &PathBuf, report: &ProbeReport) -> Result<()> {
    use std::io::Write;
    let fresh = !path.exists();
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    if fresh {
        writeln!(f, "{}", ProbeReport::CSV_HEADER)?;
    }
    writeln!(f, "{}", report.csv_row())?;
    Ok(())
}

/// The snapshot holds `u = ψ` with no background in the header, recorded in
/// the frame moving with the wave speed.
fn profile(a: ProfileArgs) -> Result<()> {
    let (psi, c) = match a.kind {
        ProfileKind::Kdv => {
            if a.c.is_nan() || a.c <= 0.0 {
                bail!("--c must be positive");
            }
            let grid = Grid::new(
                a.nx.unwrap_or(512),
                a.ny.unwrap_or(8),
                a.lx.unwrap_or(64.0 / a.c.sqrt()),
                a.ly.unwrap_or(2.0 * std::f64::consts::PI),
            )?;
            (kdv_line(&grid, a.c)?, a.c)
        }
        ProfileKind::Zaitsev => {
            let delta = match a.delta {
                Some(d) => d,
                None => zaitsev_delta(a.alpha, a.beta)?,
            };
            let g = zaitsev_grid(a.alpha, a.beta, delta)?;
            let grid = Grid::new(
                a.nx.unwrap_or(g.nx()),
                a.ny.unwrap_or(g.ny()),
                a.lx.unwrap_or(g.lx()),
                a.ly.unwrap_or(g.ly()),
            )?;
            (
                zaitsev(&grid, a.alpha, a.beta, delta)?,
                zaitsev_speed(a.alpha, a.beta)?,
            )
        }
    };
    let residual = traveling_residual(&psi, c);
    let g = *psi.grid();
    let state = SimState::new(psi, BackgroundSpec::None);
    write_snapshot_in_frame(&state, c, &a.out)?;
    eprintln!(
        "wrote {} ({}x{}, lx = {}, ly = {}, c = {c}, residual = {residual:.3e})",
        a.out.display(),
        g.nx(),
        g.ny(),
        g.lx(),
        g.ly()
    );
    Ok(())
}
