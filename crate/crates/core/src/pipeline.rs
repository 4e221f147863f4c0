//! End-to-end composition: a wear stage (smoothing, arm angle, session
//! gating) hands each finished session across a message boundary to a mobile
//! stage (frame rotation, classification).

use serde::{Deserialize, Serialize};

use crate::classifier::{DtwOptions, Prediction, SessionTraceMatrix, TemplateSet};
use crate::error::{Error, Result};
use crate::orientation::{
    arm_angle_from_gravity, rotate_vec, wrist_roll_ratio, ArmAngle, RotatedSample,
    WRIST_ROLL_WARN_RATIO,
};
use crate::scalar::{Scalar, STANDARD_GRAVITY};
use crate::sensor_model::{Channel, FilterSpec, SensorSample, Vec3, WeightedMovingAverage};
use crate::session::{
    SessionDetector, SessionEvent, TransferLedger, DEFAULT_HOLD_MS, DEFAULT_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// Oldest to newest; normalized on use. 1 to 64 positive entries.
    pub weights: Vec<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            weights: vec![1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SessionConfig {
    /// m/s², in (0, 50].
    pub threshold: f64,
    /// Quiet time that closes a session, ms in (0, 10000].
    pub hold_ms: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            hold_ms: DEFAULT_HOLD_MS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Rotate each sample by its own arm angle.
    #[default]
    PerSample,
    /// Rotate a whole session by the circular mean of its angles.
    PerSession,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrientationConfig {
    #[serde(default)]
    pub angle: AngleMode,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    pub session: SessionConfig,
    pub orientation: OrientationConfig,
    pub dtw: DtwOptions,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let w = &self.filter.weights;
        if w.is_empty() || w.len() > 64 {
            return Err(Error::Config(format!(
                "filter.weights must have 1..=64 entries, got {}",
                w.len()
            )));
        }
        let s = &self.session;
        if !(s.threshold > 0.0 && s.threshold <= 50.0) {
            return Err(Error::Config(format!(
                "session.threshold {} outside (0, 50]",
                s.threshold
            )));
        }
        if !(s.hold_ms > 0.0 && s.hold_ms <= 10_000.0) {
            return Err(Error::Config(format!(
                "session.hold_ms {} outside (0, 10000]",
                s.hold_ms
            )));
        }
        self.dtw.validate()?;
        FilterSpec::<f64>::new(w).map(|_| ())
    }
}

/// What the wear stage sends per sample of an active session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WearPacket<T> {
    pub t_us: u64,
    pub accel: Vec3<T>,
    pub theta: T,
}

/// One finished session as uploaded by the wear stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SessionUpload<T> {
    pub index: usize,
    pub start_us: u64,
    pub end_us: u64,
    /// Timestamp of the sample that closed the session.
    pub closed_us: u64,
    pub packets: Vec<WearPacket<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WearEvent<T> {
    Started { index: usize, t_us: u64 },
    Completed(SessionUpload<T>),
}

/// Filter, arm angle and session gate for one stream.
#[derive(Debug, Clone)]
pub struct WearStage<T> {
    filter: WeightedMovingAverage<T>,
    detector: SessionDetector<T>,
    next_index: usize,
    ledger: TransferLedger,
    last_theta: Option<T>,
    roll_warnings: u64,
    angle_failures: u64,
}

impl<T: Scalar> WearStage<T> {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let weights: Vec<T> = cfg.filter.weights.iter().map(|&w| T::lit(w)).collect();
        Ok(Self {
            filter: WeightedMovingAverage::new(FilterSpec::new(&weights)?, Channel::Both),
            detector: SessionDetector::new(T::lit(cfg.session.threshold), cfg.session.hold_ms)?,
            next_index: 0,
            ledger: TransferLedger::default(),
            last_theta: None,
            roll_warnings: 0,
            angle_failures: 0,
        })
    }

    pub fn push(&mut self, raw: SensorSample<T>) -> Result<Option<WearEvent<T>>> {
        let smoothed = self.filter.push(raw)?;
        self.ledger.continuous_count += 1;
        match self.detector.feed(smoothed)? {
            None => Ok(None),
            Some(SessionEvent::Start { t }) => {
                self.last_theta = None;
                Ok(Some(WearEvent::Started {
                    index: self.next_index,
                    t_us: t,
                }))
            }
            Some(SessionEvent::End { t, trace }) => {
                Ok(Some(WearEvent::Completed(self.upload(t, trace))))
            }
        }
    }

    /// Closes a session left open at end of stream.
    pub fn finish(&mut self) -> Option<WearEvent<T>> {
        match self.detector.finish()? {
            SessionEvent::End { t, trace } => Some(WearEvent::Completed(self.upload(t, trace))),
            SessionEvent::Start { .. } => None,
        }
    }

    pub fn ledger(&self) -> TransferLedger {
        self.ledger
    }

    /// Samples with large wrist roll and samples whose angle could not be computed.
    pub fn quality_counts(&self) -> (u64, u64) {
        (self.roll_warnings, self.angle_failures)
    }

    fn upload(&mut self, closed_us: u64, trace: Vec<SensorSample<T>>) -> SessionUpload<T> {
        let index = self.next_index;
        self.next_index += 1;
        self.ledger.gated_count += trace.len() as u64;
        let packets: Vec<WearPacket<T>> = trace.iter().map(|s| self.packet(s)).collect();
        let (roll, failed) = (self.roll_warnings, self.angle_failures);
        if roll > 0 || failed > 0 {
            let msg = format!("session {index}: {roll} samples with wrist roll, {failed} without a usable gravity direction");
            // A stray noisy sample is routine; a tenth of the session is not.
            if 10 * (roll + failed) >= packets.len() as u64 {
                log::warn!("{msg}");
            } else {
                log::debug!("{msg}");
            }
            self.roll_warnings = 0;
            self.angle_failures = 0;
        }
        SessionUpload {
            index,
            start_us: trace.first().map_or(0, |s| s.t),
            end_us: trace.last().map_or(0, |s| s.t),
            closed_us,
            packets,
        }
    }

    fn packet(&mut self, s: &SensorSample<T>) -> WearPacket<T> {
        if wrist_roll_ratio(s.gravity) > T::lit(WRIST_ROLL_WARN_RATIO) {
            self.roll_warnings += 1;
        }
        let g0 = T::lit(STANDARD_GRAVITY);
        let norm = s.gravity.norm();
        if norm < g0 * T::lit(0.5) || norm > g0 * T::lit(1.5) {
            log::debug!(
                "gravity magnitude {norm} outside the expected band at t={}",
                s.t
            );
        }
        let theta = match arm_angle_from_gravity(s.gravity) {
            Ok(a) => {
                self.last_theta = Some(a.radians());
                a.radians()
            }
            Err(_) => {
                self.angle_failures += 1;
                self.last_theta.unwrap_or_else(T::zero)
            }
        };
        WearPacket {
            t_us: s.t,
            accel: s.linear_accel,
            theta,
        }
    }
}

/// Frame rotation and classification of uploaded sessions.
#[derive(Debug, Clone)]
pub struct MobileStage {
    angle: AngleMode,
    dtw: DtwOptions,
}

impl MobileStage {
    pub fn new(cfg: &PipelineConfig) -> Self {
        Self {
            angle: cfg.orientation.angle,
            dtw: cfg.dtw,
        }
    }

    pub fn dtw(&self) -> &DtwOptions {
        &self.dtw
    }

    pub fn rotate<T: Scalar>(&self, upload: &SessionUpload<T>) -> Vec<RotatedSample<T>> {
        let frozen = match self.angle {
            AngleMode::PerSample => None,
            AngleMode::PerSession => {
                let (s, c) = upload
                    .packets
                    .iter()
                    .fold((T::zero(), T::zero()), |(s, c), p| {
                        (s + p.theta.sin(), c + p.theta.cos())
                    });
                Some(s.atan2(c))
            }
        };
        upload
            .packets
            .iter()
            .map(|p| RotatedSample {
                t: p.t_us,
                accel: rotate_vec(p.accel, ArmAngle::from_radians(frozen.unwrap_or(p.theta))),
            })
            .collect()
    }

    pub fn matrix<T: Scalar>(&self, upload: &SessionUpload<T>) -> Result<SessionTraceMatrix<T>> {
        SessionTraceMatrix::from_rotated(&self.rotate(upload))
    }

    pub fn classify<T: Scalar>(
        &self,
        templates: &TemplateSet<T>,
        upload: &SessionUpload<T>,
    ) -> Result<Prediction<T>> {
        templates.classify(&self.matrix(upload)?, &self.dtw)
    }
}

/// Runs the wear stage over a whole trace, closing any trailing session.
pub fn segment<T: Scalar>(
    trace: &[SensorSample<T>],
    cfg: &PipelineConfig,
) -> Result<(Vec<SessionUpload<T>>, TransferLedger)> {
    let mut wear = WearStage::new(cfg)?;
    let mut uploads = Vec::new();
    for s in trace {
        if let Some(WearEvent::Completed(u)) = wear.push(*s)? {
            uploads.push(u);
        }
    }
    if let Some(WearEvent::Completed(u)) = wear.finish() {
        uploads.push(u);
    }
    Ok((uploads, wear.ledger()))
}

/// The rotated letter from a single-letter trace: the longest session, so
/// short noise-triggered sessions are ignored. `None` when nothing triggered.
pub fn extract_letter<T: Scalar>(
    trace: &[SensorSample<T>],
    cfg: &PipelineConfig,
) -> Result<Option<SessionTraceMatrix<T>>> {
    let (uploads, _) = segment(trace, cfg)?;
    let Some(best) = uploads
        .iter()
        .filter(|u| u.packets.len() >= 2)
        .max_by_key(|u| u.packets.len())
    else {
        return Ok(None);
    };
    MobileStage::new(cfg).matrix(best).map(Some)
}
