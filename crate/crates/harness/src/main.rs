use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use perfmap_cli::{run_from_path, Overrides};

/// Seeded experiment runner for the strategic-response estimation library.
#[derive(Parser, Debug)]
#[command(name = "perfmap", version, about)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides the config and OUTPUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master RNG seed (overrides the config and RNG_SEED).
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for replication parallelism; affects wall-clock only.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let seed = match cli.seed.map(Ok).or_else(env_seed) {
        Some(Ok(seed)) => Some(seed),
        Some(Err(message)) => {
            eprintln!("{message}");
            return ExitCode::from(2);
        }
        None => None,
    };
    let out = cli.out.or_else(|| std::env::var_os("OUTPUT_DIR").map(PathBuf::from));

    let overrides = Overrides { out, seed, threads: cli.threads };
    match run_from_path(&cli.config, &overrides) {
        Ok(outcome) => {
            println!(
                "wrote {} artifacts to {}",
                outcome.manifest.artifacts.len(),
                outcome.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn env_seed() -> Option<std::result::Result<u64, String>> {
    let raw = std::env::var("RNG_SEED").ok()?;
    Some(raw.parse().map_err(|_| format!("RNG_SEED is not a 64-bit unsigned integer: {raw:?}")))
}
