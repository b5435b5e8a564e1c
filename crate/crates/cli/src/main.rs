use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pds_cli::{run_estimate, run_optimize, run_validate, RunContext};

#[derive(Parser)]
#[command(name = "pds", version, about = "Heavy-tailed response PDFs of seats and decks under slamming impulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Background statistics, rare-event probabilities and response PDFs.
    Estimate(Common),
    /// Estimate plus a Monte-Carlo ensemble and a log-density comparison.
    Validate(Common),
    /// Attachment grid search.
    Optimize(Common),
}

#[derive(Args)]
struct Common {
    /// TOML (or .json) run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (Common, fn(&RunContext) -> _) = match cli.command {
        Command::Estimate(c) => (c, run_estimate),
        Command::Validate(c) => (c, run_validate),
        Command::Optimize(c) => (c, run_optimize),
    };
    if common.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(common.threads).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = RunContext {
        config_path: common.config,
        out: common.out,
        seed: common.seed,
        threads: rayon::current_num_threads(),
    };
    match run(&ctx) {
        Ok(m) => {
            eprintln!("wrote {} files to {}", m.outputs.len() + 1, ctx.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
