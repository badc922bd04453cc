use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lane_emden::cli::{run, Command, RunConfig};
use lane_emden::Error;

/// Principal eigenvalues, bounds and maximum-principle checks for Lane-Emden systems.
#[derive(Debug, Parser)]
#[command(name = "lane-emden", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `command` (eigen, navier, bounds, verify, sweep).
    #[arg(long)]
    command: Option<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cells per axis (overrides `domain.resolution`).
    #[arg(long)]
    resolution: Option<usize>,
    /// Solver tolerance (overrides `solver.tol`).
    #[arg(long)]
    tol: Option<f64>,
}

fn execute(args: &Args) -> Result<i32, Error> {
    let text =
        std::fs::read_to_string(&args.config).map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(c) = &args.command {
        cfg.command = Command::parse(c)?;
    }
    if let Some(n) = args.resolution {
        cfg.set_resolution(n);
    }
    if let Some(t) = args.tol {
        cfg.solver.tol = t;
    }
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let outcome = run(&cfg, &out)?;
    for path in &outcome.artifacts {
        println!("{}", path.display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
