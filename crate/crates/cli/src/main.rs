//! `glevy <command> --config <file>`: runs one experiment and writes
//! `report.json`, `summary.txt`, CSV tables and `metadata.json` to the
//! output directory.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical blow-up, 4 a check
//! missed its threshold, 64 usage error, 1 I/O failure.

mod commands;
mod config;
mod expr;
mod model;

use clap::{Parser, Subcommand};
use commands::Command;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_THRESHOLD: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "glevy", version, about = "Monte Carlo and PIDE experiments under jump and volatility uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check the uncertainty set, coefficients and scenario family.
    Validate(Args),
    /// Simulate paths and dump terminal values and one full path.
    Simulate(Args),
    /// Estimate the sublinear expectation of [payoff] phi at the horizon.
    Expect(Args),
    /// Compare the path functional with V(t, Y_t) - V(s, Y_s).
    CheckPi(Args),
    /// Solve the one-dimensional nonlinear PIDE for [payoff] phi.
    PideSolve(Args),
    /// Simulate the decomposition process Z and test it for zero.
    DecompCheck(Args),
    /// Compare the functional with its classical compensated form.
    ReduceClassical(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// Experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output] dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides [numerics] seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of paths (overrides [numerics] paths).
    #[arg(long)]
    paths: Option<usize>,
    /// Time step (overrides [numerics] dt).
    #[arg(long)]
    dt: Option<f64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "GLEVY_THREADS")]
    threads: Option<usize>,
}

impl Cmd {
    fn split(self) -> (Command, Args) {
        match self {
            Cmd::Validate(a) => (Command::Validate, a),
            Cmd::Simulate(a) => (Command::Simulate, a),
            Cmd::Expect(a) => (Command::Expect, a),
            Cmd::CheckPi(a) => (Command::CheckPi, a),
            Cmd::PideSolve(a) => (Command::PideSolve, a),
            Cmd::DecompCheck(a) => (Command::DecompCheck, a),
            Cmd::ReduceClassical(a) => (Command::ReduceClassical, a),
        }
    }
}

fn core_exit(e: &glevy_core::Error) -> u8 {
    use glevy_core::Error as E;
    match e {
        E::BlowUp { .. } | E::NonFinite(_) | E::NonFinitePayoff { .. } | E::Unstable { .. } => EXIT_BLOW_UP,
        E::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn write_outputs(dir: &Path, cmd: Command, args: &Args, out: &commands::Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut report = serde_json::to_string_pretty(&out.report).map_err(std::io::Error::other)?;
    report.push('\n');
    fs::write(dir.join("report.json"), report)?;
    fs::write(dir.join("summary.txt"), &out.summary)?;
    for (name, bytes) in &out.tables {
        fs::write(dir.join(name), bytes)?;
    }
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let meta = serde_json::json!({
        "command": cmd.name(),
        "config": args.config.display().to_string(),
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "finished_unix_seconds": stamp,
    });
    let mut meta = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
    meta.push('\n');
    fs::write(dir.join("metadata.json"), meta)
}

fn run(cmd: Command, args: Args) -> u8 {
    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("glevy: cannot read {}: {e}", args.config.display());
            return EXIT_USAGE;
        }
    };
    let mut cfg = match config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("glevy: {}: {e}", args.config.display());
            return EXIT_INVALID;
        }
    };
    if let Some(s) = args.seed {
        cfg.numerics.seed = s;
    }
    if let Some(p) = args.paths {
        cfg.numerics.paths = p;
    }
    if let Some(dt) = args.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            eprintln!("glevy: --dt must be positive");
            return EXIT_USAGE;
        }
        cfg.numerics.dt = dt;
    }
    if let Some(dir) = &args.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(k) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("glevy: cannot configure {k} threads: {e}");
            return EXIT_USAGE;
        }
    }

    let out = match commands::run(cmd, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("glevy {}: {e}", cmd.name());
            return core_exit(&e);
        }
    };
    if let Err(e) = write_outputs(&cfg.output_dir, cmd, &args, &out) {
        eprintln!("glevy: cannot write to {}: {e}", cfg.output_dir.display());
        return EXIT_IO;
    }
    print!("{}", out.summary);
    match (out.passed, out.validation) {
        (true, _) => 0,
        (false, true) => EXIT_INVALID,
        (false, false) => EXIT_THRESHOLD,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let (cmd, args) = cli.command.split();
    ExitCode::from(run(cmd, args))
}
