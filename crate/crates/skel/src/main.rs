use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use skel::config::{apply_env_overrides, RunConfig};
use skel::io::read_matrix_market;
use skel_core::diagnostics::{matrix_stats, StatsConfig};

#[derive(Parser)]
#[command(name = "skel", version, about = "Overlapping-circle substructuring solver for 2D elliptic problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble and solve the interfacial system described by a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print statistics of a Matrix Market file.
    Inspect {
        #[arg(long)]
        matrix: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve { config, workers, out } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(o) = out {
                cfg.output_dir = Some(o);
            }
            apply_env_overrides(&mut cfg)?;
            cfg.validate()?;
            let result = skel::run(&cfg)?;
            print!("{}", result.summary());
            if let Some(dir) = &cfg.output_dir {
                println!("artifacts          {}", dir.display());
            }
            if !result.report.converged {
                anyhow::bail!("GMRES did not reach tolerance {} in {} iterations", cfg.gmres_tol, cfg.gmres_max_iter);
            }
        }
        Command::Inspect { matrix } => {
            let m = read_matrix_market(&matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let s = matrix_stats(&m, &StatsConfig::default())?;
            let v = serde_json::json!({
                "n": s.n,
                "nnz": s.nnz,
                "sparsity_percent": s.sparsity_percent,
                "max_off_diagonal": s.max_off_diagonal,
                "spectral_radius_c_minus_i": s.spectral_radius,
                "spectral_radius_converged": s.spectral_radius_converged,
                "condition_number": s.condition,
            });
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    Ok(())
}
