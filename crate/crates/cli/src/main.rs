//! `nrsurface`: command-line front end. Every command writes CSV to `--out`
//! (or stdout) and a short summary to stderr.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O error.

mod commands;
mod range;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "nrsurface",
    version,
    about = "NB-IoT controlled mmWave metasurface simulator"
)]
struct Cli {
    /// Seed for every random draw; identical seeds give identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    Emulate(commands::EmulateArgs),
    Waveform(commands::WaveformArgs),
    SyncSweep(commands::SyncSweepArgs),
    BerSweep(commands::BerSweepArgs),
    BeamPattern(commands::BeamPatternArgs),
    Codebook(commands::CodebookArgs),
    Scenario(commands::ScenarioArgs),
    Power(commands::PowerArgs),
    Selftest(commands::SelftestArgs),
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Validation(_) => 1,
            Self::Io(_) => 2,
        }
    }
}

pub type Outcome = Result<(), Failure>;

pub fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

pub fn io_failure(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Io(e.into())
}

fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let io = c.downcast_ref::<std::io::Error>().or_else(|| {
            match c.downcast_ref::<csv::Error>()?.kind() {
                csv::ErrorKind::Io(io) => Some(io),
                _ => None,
            }
        });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let seed = cli.seed;
    let result = match cli.command {
        Command::Emulate(a) => commands::emulate(a),
        Command::Waveform(a) => commands::waveform(a),
        Command::SyncSweep(a) => commands::sync_sweep(a, seed.unwrap_or(1)),
        Command::BerSweep(a) => commands::ber_sweep(a, seed.unwrap_or(1)),
        Command::BeamPattern(a) => commands::beam_pattern(a),
        Command::Codebook(a) => commands::codebook(a),
        Command::Scenario(a) => commands::scenario(a, seed),
        Command::Power(a) => commands::power(a, seed),
        Command::Selftest(_) => commands::selftest(seed.unwrap_or(2024)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // Downstream reader closed early (`| head`): not an error.
        Err(Failure::Io(e)) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Validation(e) => eprintln!("error: {e:#}"),
                Failure::Io(e) => eprintln!("I/O error: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
