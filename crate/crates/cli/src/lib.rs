//! Front end for the `otfs` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "otfs",
    version,
    about = "OTFS delay-Doppler link simulation and PEP bound analysis"
)]
pub struct Cli {
    /// Master seed; overrides `sim.seed` in config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Record wall-clock seconds in sweep CSVs (output is then not reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo FER/BER sweep described by a config file.
    Sim(SimArgs),
    /// The same sweep on the OFDM baseline with identical seeded draws.
    Ofdm(SimArgs),
    /// Average coding gain against the coding-gain bound.
    Gain(GainArgs),
    /// Randomized check of the exact eigenvalue bounds.
    Verify(VerifyArgs),
    /// Free distance and minimum frame distance of a convolutional code.
    Mindist(MindistArgs),
    /// Dump channel realizations as CSV.
    ChannelSample(ChannelSampleArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// TOML experiment file.
    #[arg(
        long,
        required_unless_present = "from_manifest",
        conflicts_with = "from_manifest"
    )]
    pub config: Option<PathBuf>,
    /// Re-run the config embedded in a previous run's manifest.
    #[arg(long)]
    pub from_manifest: Option<PathBuf>,
    /// CSV output; the manifest is written next to it.
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GainArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Path counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub paths: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub l_max: usize,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    /// Squared Euclidean distances, comma separated.
    #[arg(long = "d-e2", value_delimiter = ',')]
    pub d_e2: Vec<f64>,
    /// Random cases per point when exhaustive enumeration is too large.
    #[arg(long, default_value_t = 200_000)]
    pub budget: u64,
    /// Average gains in dB rather than linearly.
    #[arg(long)]
    pub db_mean: bool,
    /// CSV output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 10_000)]
    pub cases: u64,
    #[arg(long, default_value_t = 8)]
    pub max_m: usize,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    #[arg(long, default_value_t = 8)]
    pub max_p: usize,
}

#[derive(Debug, Args)]
pub struct MindistArgs {
    /// Reference code A, B, C or D.
    #[arg(long, required_unless_present = "generators", conflicts_with = "generators")]
    pub code: Option<String>,
    /// Octal generators, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub generators: Option<Vec<String>>,
    /// Information bits per frame.
    #[arg(long, default_value_t = 100)]
    pub frame_bits: usize,
}

#[derive(Debug, Args)]
pub struct ChannelSampleArgs {
    /// TOML experiment file; only `[grid]` and `[channel]` are used.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    /// CSV output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sim(args) => commands::sim(cli, args, false),
        Command::Ofdm(args) => commands::sim(cli, args, true),
        Command::Gain(args) => commands::gain(cli, args),
        Command::Verify(args) => commands::verify(cli, args),
        Command::Mindist(args) => commands::mindist(args),
        Command::ChannelSample(args) => commands::channel_sample(cli, args),
    }
}
