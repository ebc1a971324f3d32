mod attack;
mod bench;
mod formula;
mod report;
mod serve;
mod session;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hbat_core::SchemeTag;

#[derive(Debug, Parser)]
#[command(name = "hbat", version, about = "Honeyword sessions, attacks, formulas and servers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulated login sessions.
    Session {
        #[command(subcommand)]
        action: SessionAction,
    },
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
    /// Attack simulations.
    Attack(attack::AttackArgs),
    /// Closed-form values.
    Formula {
        #[command(subcommand)]
        which: formula::FormulaCmd,
    },
    /// Run a server until interrupted.
    Serve(serve::ServeArgs),
}

#[derive(Debug, Subcommand)]
enum SessionAction {
    Run(session::SessionArgs),
}

#[derive(Debug, Subcommand)]
enum BenchAction {
    /// Challenge-generation iteration counts per k.
    ChallengeGen(bench::BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    S3pas,
    Chc,
    Pas,
    Cop,
}

impl From<SchemeArg> for SchemeTag {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::S3pas => SchemeTag::S3pas,
            SchemeArg::Chc => SchemeTag::Chc,
            SchemeArg::Pas => SchemeTag::Pas,
            SchemeArg::Cop => SchemeTag::Cop,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SeedArg {
    /// RNG seed; drawn at random and printed to stderr when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SeedArg {
    pub fn resolve(&self) -> u64 {
        let seed = self.seed.unwrap_or_else(rand::random);
        eprintln!("seed: {seed}");
        seed
    }
}

pub fn default_k(scheme: SchemeTag) -> usize {
    match scheme {
        SchemeTag::S3pas => 6,
        SchemeTag::Chc => 3,
        SchemeTag::Pas => 4,
        SchemeTag::Cop => 5,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hbat_core::HbatError),
    #[error(transparent)]
    Service(#[from] hbat_services::ServiceError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = Result<T, CliError>;

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Session { action: SessionAction::Run(a) } => session::run(a),
        Command::Bench { action: BenchAction::ChallengeGen(a) } => bench::run(a),
        Command::Attack(a) => attack::run(a),
        Command::Formula { which } => formula::run(which),
        Command::Serve(a) => serve::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
