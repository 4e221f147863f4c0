//! TOML configuration. Every section is optional; unknown keys are errors.
//!
//! ```toml
//! templates = "templates.json"
//! input = "trace.jsonl"
//! output = "sessions.jsonl"
//!
//! [pipeline.filter]
//! weights = [1, 2, 3, 4, 5]        # oldest to newest, 1..=64 positive entries
//! [pipeline.session]
//! threshold = 1.0                  # m/s², (0, 50]
//! hold_ms = 400                    # (0, 10000]
//! [pipeline.orientation]
//! angle = "per_sample"             # or "per_session"
//! [pipeline.dtw]
//! band = 0.1                       # optional Sakoe-Chiba radius, fraction of length
//!
//! [synth]
//! size_in = 12.0
//! noise = 0.0                      # m/s², per axis
//! seed = 0
//! gap_ms = 1000
//! arm_deg = 0.0
//! duration_s = 1.5
//! sample_rate = 100.0
//!
//! [eval]
//! letters = "abjwz"
//! size_in = 12.0
//! trials = 100
//! noise = 0.5
//! seed = 7
//! format = "csv"                   # or "markdown"
//! words = ["pizza", "chicken", "cake", "wine", "coffee"]
//!
//! [serve]
//! addr = "127.0.0.1"
//! port = 8080
//! queue = 4096
//! ```

use std::path::{Path, PathBuf};

use airdraw_core::PipelineConfig;
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub templates: Option<PathBuf>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub serve: ServeSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub size_in: Option<f64>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub gap_ms: Option<f64>,
    pub arm_deg: Option<f64>,
    pub duration_s: Option<f64>,
    pub sample_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub letters: Option<String>,
    pub size_in: Option<f64>,
    pub trials: Option<usize>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub words: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServeSection {
    pub addr: Option<String>,
    pub port: Option<u16>,
    pub queue: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("config {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.pipeline.validate()?;
        Ok(cfg)
    }
}
