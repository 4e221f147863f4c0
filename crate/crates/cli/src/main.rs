use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{Config, Format};

/// Air-writing recognition from wrist motion traces.
///
/// Traces are JSONL, one sample per line:
/// {"t_us":0,"la":[x,y,z],"g":[x,y,z]}. Paths default to stdin and stdout.
/// Exit status is 0 on success, 2 on usage errors and 3 on data errors.
#[derive(Debug, Parser)]
#[command(name = "airdraw", version, propagate_version = true)]
pub struct Cli {
    /// TOML config file; flags take precedence over its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a labeled trace for one letter or a word.
    Synth(SynthArgs),
    /// Segment a trace into sessions, rotate them and optionally classify.
    Pipeline(PipelineArgs),
    /// Record a single-session trace as the template of a letter.
    Train(TrainArgs),
    /// Classify the longest session of a trace.
    Classify(ClassifyArgs),
    /// Run a synthetic confusion-matrix experiment or a savings report.
    Eval(EvalArgs),
    /// Serve the live WebSocket stream.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Letter to write.
    #[arg(long, conflicts_with = "word", required_unless_present = "word")]
    pub letter: Option<char>,
    /// Word to write, one session per letter.
    #[arg(long)]
    pub word: Option<String>,
    /// Letter box edge, inches [default: 12].
    #[arg(long, value_name = "IN")]
    pub size_in: Option<f64>,
    /// Sensor noise standard deviation, m/s² per axis [default: 0].
    #[arg(long, value_name = "SIGMA")]
    pub noise: Option<f64>,
    /// Noise seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pause between letters of a word, ms [default: 1000].
    #[arg(long, value_name = "MS")]
    pub gap_ms: Option<f64>,
    /// Arm elevation, degrees [default: 0].
    #[arg(long, value_name = "DEG", allow_negative_numbers = true)]
    pub arm_deg: Option<f64>,
    /// Mean writing time per letter, seconds [default: 1.5].
    #[arg(long, value_name = "S")]
    pub duration_s: Option<f64>,
    /// Samples per second [default: 100].
    #[arg(long, value_name = "HZ")]
    pub sample_rate: Option<f64>,
    /// Output file [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Trace file, or - for stdin.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Template file; when given every session gets a prediction.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Write each rotated session to DIR and reference it instead of inlining it.
    #[arg(long, value_name = "DIR")]
    pub rotated_dir: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Letter the trace shows.
    #[arg(long)]
    pub letter: char,
    /// Trace file, or - for stdin.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Template file to update; created when missing.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Alphabet of a newly created template file [default: a-z].
    #[arg(long)]
    pub alphabet: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Trace file, or - for stdin.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Template file.
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Letters to test [default: abjwz].
    #[arg(long)]
    pub letters: Option<String>,
    /// Nominal letter box edge, inches [default: 12].
    #[arg(long, value_name = "IN")]
    pub size_in: Option<f64>,
    /// Test trials per letter [default: 100].
    #[arg(long)]
    pub trials: Option<usize>,
    /// Sensor noise standard deviation, m/s² per axis [default: 0.5].
    #[arg(long, value_name = "SIGMA")]
    pub noise: Option<f64>,
    /// Base seed; templates and trials derive their own [default: 7].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confusion matrix layout [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Print the per-word data transfer table instead of a confusion matrix.
    #[arg(long)]
    pub report_savings: bool,
    /// Words for --report-savings [default: pizza,chicken,cake,wine,coffee].
    #[arg(long, value_delimiter = ',')]
    pub words: Option<Vec<String>>,
    /// Output file [default: stdout].
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Listen address [default: 127.0.0.1].
    #[arg(long)]
    pub addr: Option<String>,
    /// Listen port [default: 8080].
    #[arg(long)]
    pub port: Option<u16>,
    /// Template file; template-mode commits are written back to it.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Frames a connection may queue before it is closed [default: 4096].
    #[arg(long)]
    pub queue: Option<usize>,
}

/// An error with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            error: error.into(),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_DATA,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match Config::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_USAGE);
            }
        },
        None => Config::default(),
    };
    match commands::run(cli.command, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
