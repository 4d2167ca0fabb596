use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hammerstein_cli::run::EXIT_RUNTIME;
use hammerstein_cli::{parse_config, run_analyze, run_solve, run_spectral, Outcome, RunError, RunSpec};

#[derive(Parser)]
#[command(version, about = "Existence certificates and solvers for Hammerstein equations on the real line")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Output directory (overrides `output_dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid nodes (overrides `n_nodes`)
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Random seed (overrides `seed`)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

type Pipeline = fn(&RunSpec, &Path) -> Result<Outcome, RunError>;

#[derive(Subcommand)]
enum Verb {
    /// Check conditions, compute limits and try to certify a nontrivial solution
    Analyze { config: PathBuf },
    /// Find the nontrivial fixed point by damped Picard iteration
    Solve { config: PathBuf },
    /// Spectral radii, characteristic values and M~(A)
    Spectral { config: PathBuf },
}

fn load(cli: &Cli, path: &PathBuf) -> Result<RunSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let mut spec = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(n) = cli.nodes {
        spec.n_nodes = n;
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(out) = &cli.out {
        spec.output_dir = Some(out.clone());
    }
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, pipeline): (_, Pipeline) = match &cli.verb {
        Verb::Analyze { config } => (config, run_analyze),
        Verb::Solve { config } => (config, run_solve),
        Verb::Spectral { config } => (config, run_spectral),
    };
    let spec = match load(&cli, config) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME as u8);
        }
    };
    let out = spec.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    match pipeline(&spec, &out) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME as u8)
        }
    }
}
