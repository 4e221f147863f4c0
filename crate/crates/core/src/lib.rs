//! Air-writing recognition from wrist-worn motion sensors.
//!
//! The pipeline smooths linear acceleration and gravity, measures the arm's
//! elevation from gravity, cuts the stream into writing sessions, rotates each
//! session's acceleration into an arm-independent frame and picks the letter
//! whose one-shot template has the smallest summed per-axis DTW distance.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

// Range checks are written `!(x > 0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod error;
pub mod eval;
pub mod orientation;
pub mod pipeline;
pub mod scalar;
pub mod sensor_model;
pub mod session;
pub mod synth;
pub mod trace_io;

pub use classifier::{
    dtw_distance, dtw_distance_with, latin_alphabet, letters, total_distance, DtwOptions, Letter,
    Prediction, Ranked, SessionTraceMatrix, TemplateSet,
};
pub use error::{Error, Result};
pub use eval::{
    run_experiment, Accuracy, ConfusionMatrix, ExperimentSpec, ReportFormat, SynthRanges,
};
pub use orientation::{
    arm_angle, gravity_norm, normalize_gravity, rotate_frame, ArmAngle, RotatedSample,
};
pub use pipeline::{MobileStage, PipelineConfig, SessionUpload, WearEvent, WearStage};
pub use scalar::{Scalar, STANDARD_GRAVITY};
pub use sensor_model::{smooth, Channel, FilterSpec, SensorSample, Vec3};
pub use session::{account, savings, SessionDetector, SessionEvent, TransferLedger};
pub use synth::{
    letter_path, letter_paths, synthesize, synthesize_word, ArmPose, StrokePath, SynthSpec,
};

pub type Vec3f = Vec3<f64>;
pub type Sample = SensorSample<f64>;
pub type Trace = Vec<SensorSample<f64>>;
pub type TraceMatrix = SessionTraceMatrix<f64>;
pub type Templates = TemplateSet<f64>;
pub type LetterPrediction = Prediction<f64>;

pub type Sample32 = SensorSample<f32>;
pub type Templates32 = TemplateSet<f32>;
