use thiserror::Error;

use crate::classifier::Letter;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("timestamps must be strictly increasing: {next} follows {prev}")]
    NonMonotonic { prev: u64, next: u64 },

    #[error("non-finite component in {0}")]
    NonFinite(&'static str),

    #[error("degenerate gravity vector (norm {norm:e})")]
    DegenerateGravity { norm: f64 },

    #[error("arm angle is indeterminate: gravity has no x/y component")]
    IndeterminateAngle,

    #[error("savings undefined for an empty ledger")]
    UndefinedSavings,

    #[error("empty input sequence")]
    EmptySequence,

    #[error("invalid trace: {0}")]
    InvalidTrace(String),

    #[error("letter {0} is not in the alphabet")]
    UnknownLetter(Letter),

    #[error("template set is incomplete, missing: {}", missing_list(.missing))]
    NotTrained { missing: Vec<Letter> },

    #[error("synthesis error: {0}")]
    Synthesis(String),

    #[error("no trials recorded for letter {0}")]
    IncompleteExperiment(Letter),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn missing_list(missing: &[Letter]) -> String {
    missing
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
