//! `capillarity`: runs the experiments of the laboratory and writes hashed, self-describing outputs.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use capillarity::harness::PerturbationMode;
use capillarity::Error;
use clap::{Args, Parser, Subcommand};

use crate::commands::SweepArgs;
use crate::config::{Rep, RunConfig};
use crate::output::OutDir;

const EXIT_ASSERTION: u8 = 2;
const EXIT_GATE: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "capillarity", version, about = "Capillarity isoperimetric experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// auto, profile or voxel.
    #[arg(long, global = true)]
    rep: Option<Rep>,
    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    xi_step_factor: Option<f64>,
    #[arg(long, global = true)]
    tol_identity: Option<f64>,
    #[arg(long, global = true)]
    tol_deficit: Option<f64>,
    #[arg(long, global = true)]
    tol_monotone: Option<f64>,
    #[arg(long, global = true)]
    tol_coverage: Option<f64>,
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    #[arg(long, global = true)]
    tol_factor3: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the optimal bubble with its closed-form measures and report.
    Bubble,
    /// Evaluate every functional of a set file.
    Eval { input: PathBuf },
    /// Run reduction stages on a set file.
    Symmetrize {
        input: PathBuf,
        /// Comma-separated subset of normalize,truncate,reflect,schwarz.
        #[arg(long, default_value = "normalize,truncate,reflect,schwarz")]
        stages: String,
    },
    /// Solve the Neumann problem on a planar set and measure the ABP coverage and residuals.
    Abp { input: PathBuf },
    /// Evaluate a perturbation family over a schedule of amplitudes.
    Sweep {
        /// Legendre degree or `bump`.
        #[arg(long, default_value = "2")]
        mode: PerturbationMode,
        /// Explicit comma-separated amplitudes; overrides the geometric schedule.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        eps_start: f64,
        #[arg(long, default_value_t = 7)]
        count: usize,
        /// Skip the renormalization to the bubble volume.
        #[arg(long)]
        no_renormalize: bool,
        /// Also rasterize each member at `--h` and report the coupling residuals (n = 2).
        #[arg(long)]
        abp: bool,
    },
    /// Brute-force the one-dimensional weighted interval inequality.
    Lemma1d {
        /// Scale l; defaults to the three scales spanning the admissible range.
        #[arg(long)]
        l: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Compare restricted and unrestricted asymmetry on symmetric random sets.
    Factor3 {
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bubble => "bubble",
            Command::Eval { .. } => "eval",
            Command::Symmetrize { .. } => "symmetrize",
            Command::Abp { .. } => "abp",
            Command::Sweep { .. } => "sweep",
            Command::Lemma1d { .. } => "lemma1d",
            Command::Factor3 { .. } => "factor3",
        }
    }
}

fn resolve(c: &Common) -> capillarity::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = c.$f.clone() { cfg.$f = v; } )* };
    }
    set!(lambda, n, rep, h, nodes, seed, out, jobs, xi_step_factor);
    set!(tol_identity, tol_deficit, tol_monotone, tol_coverage, tol_residual, tol_factor3);
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) => EXIT_ASSERTION,
        Error::Parse { .. } | Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::Search { .. } | Error::Numeric { .. } => 1,
        _ => EXIT_GATE,
    }
}

fn run(cli: Cli) -> capillarity::Result<Vec<String>> {
    let cfg = resolve(&cli.common)?;
    if cfg.jobs > 0 {
        // only fails if a pool already exists, in which case that pool is used
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    let mut out = OutDir::create(&cfg.out)?;
    out.write("config.toml", cfg.to_toml())?;
    let failures = match &cli.command {
        Command::Bubble => commands::bubble(&cfg, &mut out),
        Command::Eval { input } => commands::eval(&cfg, input, &mut out),
        Command::Symmetrize { input, stages } => commands::symmetrize(&cfg, input, stages, &mut out),
        Command::Abp { input } => commands::abp(&cfg, input, &mut out),
        Command::Sweep { mode, eps, eps_start, count, no_renormalize, abp } => {
            let args = SweepArgs {
                mode: *mode,
                eps: eps.clone(),
                eps_start: *eps_start,
                count: *count,
                renormalize: !no_renormalize,
                abp: *abp,
            };
            commands::sweep_cmd(&cfg, &args, &mut out)
        }
        Command::Lemma1d { l, trials } => commands::lemma1d(&cfg, *l, *trials, &mut out),
        Command::Factor3 { trials } => commands::factor3(&cfg, *trials, &mut out),
    };
    let failures = match failures {
        Ok(f) => f,
        Err(e) => {
            out.finish(cli.command.name(), &cfg, &[e.to_string()])?;
            return Err(e);
        }
    };
    out.finish(cli.command.name(), &cfg, &failures)?;
    Ok(failures)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_IO) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(failures) if failures.is_empty() => ExitCode::SUCCESS,
        Ok(failures) => {
            for f in &failures {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
