use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sqav::cli::{self, OutputFormat, RunManifest};

/// Deterministic simulator and verification suite for a self-tallying
/// anonymous voting protocol on entangled qudit states.
#[derive(Parser)]
#[command(name = "sqav", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one election scenario and write its transcript.
    Vote(CommonArgs),
    /// Run an anonymous multi-party computation scenario.
    Amc(CommonArgs),
    /// Sweep an attack grid and compare measurements to predictions.
    Attack(CommonArgs),
    /// Run the numerical verification suite.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed recorded in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $SQAV_OUT_DIR, else the cwd).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl CommonArgs {
    fn manifest(self) -> RunManifest {
        RunManifest {
            config_path: self.config,
            seed_override: self.seed,
            out_dir: cli::resolve_out_dir(self.out),
            format: match self.format {
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            },
        }
    }
}

fn main() -> ExitCode {
    let parsed = Cli::parse();
    let result = match parsed.command {
        Command::Vote(args) => cli::cmd_vote(&args.manifest()),
        Command::Amc(args) => cli::cmd_amc(&args.manifest()),
        Command::Attack(args) => cli::cmd_attack(&args.manifest()),
        Command::Verify(args) => cli::cmd_verify(&args.manifest()),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::EXIT_VALIDATION as u8)
        }
    }
}
