//! `magsphere`: simulate, solve, classify and tabulate two charged particles
//! on a sphere in a radial magnetic field.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magsphere::atlas::AxisSpec;

use config::{CommandKind, Diagram, Format, PotentialSpec, RunConfig, Solver};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "magsphere", version, about)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

/// Shared flags. Every flag left unset keeps the value from `--config`
/// (or the built-in default).
#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML run configuration; explicit flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    mu1: Option<f64>,
    #[arg(long, global = true)]
    mu2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e2: Option<f64>,
    /// Magnetic field strength.
    #[arg(long = "B", global = true, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Inter-particle distance.
    #[arg(long, global = true)]
    q: Option<f64>,
    /// `cot` or `table:<path>`.
    #[arg(long, global = true)]
    potential: Option<PotentialSpec>,
    /// Distance grid `start:end:count`.
    #[arg(long = "grid-q", global = true)]
    grid_q: Option<String>,
    /// Field grid `start:end:count`.
    #[arg(long = "grid-B", global = true)]
    grid_b: Option<String>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// Residual tolerance for accepting equilibria.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps (default: number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the reduced flow (and optionally the full-space flow).
    Simulate {
        #[arg(long, allow_hyphen_values = true)]
        m1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        m2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        m3: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<f64>,
        /// Keep every n-th step.
        #[arg(long)]
        sample_every: Option<usize>,
        /// Rescale onto the initial Casimir level after each step.
        #[arg(long)]
        project: bool,
        /// Also integrate in R³ and write that trajectory here.
        #[arg(long)]
        full_out: Option<PathBuf>,
    },
    /// Relative equilibria on a (q, B) grid.
    Equilibria {
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
    /// Linear stability of the equilibria on a (q, B) grid.
    Stability {
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
    /// Diagram data: curves, stability tables and bifurcation sets.
    Atlas {
        #[arg(long, value_enum)]
        diagram: Option<Diagram>,
        /// Slopes `a` of the approach lines for `--diagram appendix`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slopes: Option<Vec<f64>>,
        /// Window samples per field strength for `--diagram bc`.
        #[arg(long)]
        window_samples: Option<usize>,
    },
    /// Rigid rotations of the relative equilibria at the given distance.
    Reconstruct {
        #[arg(long, value_enum)]
        solver: Option<Solver>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let a = cli.common;
    let mut cfg = match &a.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.params.mu1, a.mu1);
    set(&mut cfg.params.mu2, a.mu2);
    set(&mut cfg.params.e1, a.e1);
    set(&mut cfg.params.e2, a.e2);
    set(&mut cfg.params.b, a.b);
    if a.q.is_some() {
        cfg.q = a.q;
    }
    set(&mut cfg.potential, a.potential);
    let axis = |name: &str, text: &str| {
        AxisSpec::parse(name, text).map_err(|e| CliError::Config(format!("--grid-{name}: {e}")))
    };
    if let Some(text) = &a.grid_q {
        cfg.grid.q = Some(axis("q", text)?);
    }
    if let Some(text) = &a.grid_b {
        cfg.grid.b = Some(axis("B", text)?);
    }
    set(&mut cfg.dt, a.dt);
    set(&mut cfg.t_end, a.t_end);
    set(&mut cfg.tolerances.residual, a.tol);
    if a.out.is_some() {
        cfg.output_path = a.out;
    }
    set(&mut cfg.format, a.format);
    if a.workers.is_some() {
        cfg.workers = a.workers;
    }

    match cli.command {
        Command::Simulate { m1, m2, m3, p, sample_every, project, full_out } => {
            cfg.command = CommandKind::Simulate;
            set(&mut cfg.initial.m1, m1);
            set(&mut cfg.initial.m2, m2);
            set(&mut cfg.initial.m3, m3);
            set(&mut cfg.initial.p, p);
            set(&mut cfg.sample_every, sample_every);
            cfg.project_casimir |= project;
            if full_out.is_some() {
                cfg.full_output_path = full_out;
            }
        }
        Command::Equilibria { solver } => {
            cfg.command = CommandKind::Equilibria;
            set(&mut cfg.solver, solver);
        }
        Command::Stability { solver } => {
            cfg.command = CommandKind::Stability;
            set(&mut cfg.solver, solver);
        }
        Command::Atlas { diagram, slopes, window_samples } => {
            cfg.command = CommandKind::Atlas;
            if diagram.is_some() {
                cfg.diagram = diagram;
            }
            set(&mut cfg.appendix.slopes, slopes);
            set(&mut cfg.window_samples, window_samples);
        }
        Command::Reconstruct { solver } => {
            cfg.command = CommandKind::Reconstruct;
            set(&mut cfg.solver, solver);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let dump = cli.common.dump_config;
    let cfg = build_config(cli)?;
    if dump {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    commands::execute(&cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("magsphere: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
