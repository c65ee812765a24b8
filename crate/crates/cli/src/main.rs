//! `curvecap analyze|cheb|fekete|verify|transform --spec FILE --out DIR`.
//!
//! Exit codes: 0 pass, 1 input error, 2 hypothesis violation, 3 verification
//! tolerance unmet, 4 internal numeric failure.

mod commands;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvecap_core::Error;
use serde_json::json;

use commands::Outcome;
use spec::Job;

#[derive(Parser)]
#[command(name = "curvecap", version, about = "Directional Chebyshev constants and transfinite diameter on algebraic curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Kind {
    /// Groebner basis, quotient structure, infinity points, hypothesis checks.
    Analyze,
    /// Directional Chebyshev constants `τ_s`, `t_s` and optional `τ(K, Q, n)`.
    Cheb,
    /// Fekete ladder and transfinite diameter estimates.
    Fekete,
    /// Gap between `d_n` and the Chebyshev side, checked against tolerances.
    Verify,
    /// Transformation laws under an exact affine map.
    Transform,
}

#[derive(Subcommand)]
enum Command {
    Analyze(Args),
    Cheb(Args),
    Fekete(Args),
    Verify(Args),
    Transform(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; falls back to `output.dir` in the spec.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for every parallel section; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `analysis.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Progress messages on stderr.
    #[arg(short, long)]
    verbose: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolation(_) | Error::NotACurve(_) => 2,
        Error::NonConvergence(_)
        | Error::RankDeficient { .. }
        | Error::ClusteredEigenvalues(_)
        | Error::Internal(_)
        | Error::Overflow(_)
        | Error::BudgetExceeded { .. } => 4,
        _ => 1,
    }
}

fn error_kind(code: u8) -> &'static str {
    match code {
        2 => "hypothesis_violation",
        4 => "numeric_failure",
        _ => "input_error",
    }
}

fn run(kind: Kind, args: &Args) -> Result<(Outcome, PathBuf), (Error, Option<PathBuf>)> {
    let job = Job::load(&args.spec, args.seed).map_err(|e| (e, args.out.clone()))?;
    let out = args
        .out
        .clone()
        .or_else(|| job.spec.output.dir.clone())
        .ok_or_else(|| (Error::Input("no output directory: pass --out or set output.dir".into()), None))?;
    std::fs::create_dir_all(&out).map_err(|e| (Error::Io(e), None))?;
    let go = || match kind {
        Kind::Analyze => commands::analyze(&job, &out),
        Kind::Cheb => commands::cheb(&job, &out),
        Kind::Fekete => commands::fekete(&job, &out),
        Kind::Verify => commands::verify(&job, &out),
        Kind::Transform => commands::transform(&job, &out),
    };
    let result = match args.threads {
        None => go(),
        Some(0) => Err(Error::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))
            .and_then(|pool| pool.install(go)),
    };
    result.map(|o| (o, out.clone())).map_err(|e| (e, Some(out)))
}

fn write_error(dir: &Path, code: u8, e: &Error) {
    let body = json!({"exit_code": code, "kind": error_kind(code), "message": e.to_string()});
    if let Ok(text) = serde_json::to_string_pretty(&body) {
        let _ = std::fs::write(dir.join("error.json"), text + "\n");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Analyze(a) => (Kind::Analyze, a),
        Command::Cheb(a) => (Kind::Cheb, a),
        Command::Fekete(a) => (Kind::Fekete, a),
        Command::Verify(a) => (Kind::Verify, a),
        Command::Transform(a) => (Kind::Transform, a),
    };
    if args.verbose {
        eprintln!("curvecap: spec {}", args.spec.display());
    }
    match run(kind, args) {
        Ok((outcome, out)) => {
            if args.verbose {
                eprintln!("curvecap: artifacts in {}", out.display());
            }
            ExitCode::from(match outcome {
                Outcome::Pass => 0,
                Outcome::HypothesisViolation => {
                    eprintln!("curvecap: hypothesis violation, see analyze.json");
                    2
                }
                Outcome::ToleranceUnmet => {
                    eprintln!("curvecap: verification tolerance not met, see verify.json");
                    3
                }
            })
        }
        Err((e, dir)) => {
            let code = exit_code(&e);
            eprintln!("curvecap: {e}");
            if let Some(dir) = dir.filter(|d| d.is_dir()) {
                write_error(&dir, code, &e);
            }
            ExitCode::from(code)
        }
    }
}
