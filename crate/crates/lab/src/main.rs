use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spectrans::{ExperimentName, RunOptions};

#[derive(Parser)]
#[command(name = "spectrans", version, about = "Spectral and transport experiments for discrete Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root (artifacts go to <out>/<experiment>/<run-id>/).
    #[arg(long, env = spectrans::output::OUT_ENV)]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks the rayon default. Never changes payloads.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Replaces the base seed of every random ensemble.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Green formula, cumulative Wronskian and resolvent identity checks.
    GreenCheck(Common),
    /// Ball-norm growth of free plane waves.
    Growth(Common),
    /// Spiral corridor identity and area growth.
    SpiralCompare(Common),
    /// Transfer-matrix power laws for the random decaying model.
    KlsExponent(Common),
    /// Borel-transform scaling sweeps.
    Borel(Common),
    /// Finite-volume α-derivative estimates.
    Dalpha(Common),
    /// Time-averaged transport moments and survival.
    Transport(Common),
    /// Stark amplitude envelope.
    StarkEnvelope(Common),
    /// Coordinate-format operator and domain descriptor for `[export]`.
    Export(Common),
}

fn options(c: Common) -> RunOptions {
    RunOptions { config: c.config, out: c.out, jobs: c.jobs, seed_override: c.seed_override }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match cli.command {
        Command::GreenCheck(c) => (ExperimentName::GreenCheck, c),
        Command::Growth(c) => (ExperimentName::Growth, c),
        Command::SpiralCompare(c) => (ExperimentName::SpiralCompare, c),
        Command::KlsExponent(c) => (ExperimentName::KlsExponent, c),
        Command::Borel(c) => (ExperimentName::Borel, c),
        Command::Dalpha(c) => (ExperimentName::Dalpha, c),
        Command::Transport(c) => (ExperimentName::Transport, c),
        Command::StarkEnvelope(c) => (ExperimentName::StarkEnvelope, c),
        Command::Export(c) => {
            return match spectrans::export(&options(c)) {
                Ok(dir) => {
                    println!("{}", dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
    };
    match spectrans::execute(name, &options(common)) {
        Ok(outcome) => {
            for g in &outcome.report.gates {
                println!("{} {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
            }
            println!("{}", outcome.dir.display());
            if outcome.report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
