//! `hslab`: command-line front end of the Hele-Shaw laboratory.
//!
//! Each subcommand runs one experiment (or the whole suite) into a
//! subdirectory of the output root, prints one PASS/FAIL line per check,
//! and exits 0 on success, 2 on configuration problems, 3 on numerical
//! failures, 4 on failed checks or assertions.

use clap::{Args, Parser, Subcommand};
use heleshaw_lab::config::{parse_config, ExperimentKind, RunConfig};
use heleshaw_lab::experiments::{self, all, RunRecord};
use heleshaw_lab::outdir::OutputDir;
use heleshaw_lab::LabError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "hslab",
    version,
    about = "Numerical laboratory for the one-phase Hele-Shaw free-boundary problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file; built-in defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output root (default: $HSLAB_OUT, else ./hslab-out).  Every file
    /// the run writes lands beneath it.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Planar exactness and single-mode dispersion survey
    Simulate(RunArgs),
    /// Interface-trace linearization gap sweep
    Linearize(RunArgs),
    /// Oscillation decay through nested parabolic cylinders
    Harnack(RunArgs),
    /// Regularity bootstrap ladder and the influx-jump gradient probe
    Ladder(RunArgs),
    /// Sup-convolution regularization battery and tau monotonicity
    Supconv(RunArgs),
    /// Inversion and shear deformation comparisons
    Deform(RunArgs),
    /// Radial barrier survey and the damped density ODE
    Barrier(RunArgs),
    /// Lattice max-principle, interpolation, and derivative verifiers
    Interp(RunArgs),
    /// Every experiment into one output tree
    All {
        #[command(flatten)]
        args: RunArgs,
        /// Parallel workers across experiments.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let (kind, args, threads) = match cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a, 1),
        Command::Linearize(a) => (ExperimentKind::Linearize, a, 1),
        Command::Harnack(a) => (ExperimentKind::Harnack, a, 1),
        Command::Ladder(a) => (ExperimentKind::Ladder, a, 1),
        Command::Supconv(a) => (ExperimentKind::Supconv, a, 1),
        Command::Deform(a) => (ExperimentKind::Deform, a, 1),
        Command::Barrier(a) => (ExperimentKind::Barrier, a, 1),
        Command::Interp(a) => (ExperimentKind::Interp, a, 1),
        Command::All { args, threads } => (ExperimentKind::All, args, threads),
    };

    let cfg = match load_config(kind, &args) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let out_root = args.out.clone().unwrap_or_else(|| {
        std::env::var_os("HSLAB_OUT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("hslab-out"))
    });
    let root = match OutputDir::create(&out_root) {
        Ok(root) => root,
        Err(e) => return fail(e),
    };

    let record = if kind == ExperimentKind::All {
        all::run_suite(&cfg, &root, threads)
    } else {
        experiments::execute(&cfg, &root)
    };
    match record {
        Ok(rec) => report(&rec, args.strict),
        Err(e) => fail(e),
    }
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> heleshaw_lab::Result<RunConfig> {
    match &args.config {
        Some(path) => parse_config(kind, path),
        None => Ok(RunConfig::defaults(kind)),
    }
}

fn fail(e: LabError) -> i32 {
    eprintln!("{e}");
    e.exit_code()
}

fn report(rec: &RunRecord, strict: bool) -> i32 {
    let outcome = &rec.outcome;
    for c in &outcome.checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", c.name, c.detail);
    }
    for w in &outcome.warnings {
        println!("WARN {w}");
    }
    let passed = outcome.checks.iter().filter(|c| c.pass).count();
    println!(
        "{passed}/{} checks passed -> {}",
        outcome.checks.len(),
        rec.dir.path().display()
    );
    if !outcome.all_pass() {
        4
    } else if strict && !outcome.warnings.is_empty() {
        4
    } else {
        0
    }
}
