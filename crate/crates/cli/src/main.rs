//! `tailforge`: stable and Mittag-Leffler variates, optionally conditioned
//! on a region of the real line.

mod gen;
mod grid;
mod setup;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use setup::{DistArgs, Failure, TilerArgs};

#[derive(Debug, Parser)]
#[command(name = "tailforge", version, about = "Stable and Mittag-Leffler variates, optionally conditioned on a region")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write variates as csv or packed f64le.
    Gen(GenArgs),
    /// Write the transform map evaluated on an N x N grid of cell centers.
    Map(MapArgs),
    /// Build a tile table and save it.
    Table(TableArgs),
    /// Run statistical checks; exit 1 if any fails.
    Validate(SuiteArgs),
    /// Run timing checks; exit 1 if any fails.
    Bench(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    F64le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Ks,
    Rejection,
    Throughput,
    All,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    /// Decimal or 0x-prefixed hexadecimal, nonzero.
    #[arg(long, env = "TAILFORGE_SEED")]
    pub seed: Option<String>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Region expression, e.g. "(-inf,-12]" or "(-inf,-1] U [1,inf)".
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Number of variates.
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tile table cache: loaded if it matches, otherwise built and saved.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub tiler: TilerArgs,
    /// Independent samplers with derived seeds, output in thread order.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: u32,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Cells per side.
    #[arg(long, default_value_t = 800, value_parser = clap::value_parser!(u32).range(1..=1 << 16))]
    pub grid: u32,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Region expression, e.g. "(-inf,-12]" or "(-inf,-1] U [1,inf)".
    #[arg(long, allow_hyphen_values = true)]
    pub region: String,
    #[command(flatten)]
    pub tiler: TilerArgs,
    /// Destination of the binary table.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[command(flatten)]
    pub dist: DistArgs,
    /// Region expression; the full line if absent.
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// Defaults to all for validate and throughput for bench.
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Variates per measurement.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub n: u64,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Tile table cache: loaded if it matches, otherwise built and saved.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub tiler: TilerArgs,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen(args) => gen::run(&args),
        Command::Map(args) => grid::run(&args),
        Command::Table(args) => setup::run_table(&args),
        Command::Validate(args) => suite::run(&args, Suite::All),
        Command::Bench(args) => suite::run(&args, Suite::Throughput),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tailforge: {f}");
            ExitCode::from(f.code())
        }
    }
}
