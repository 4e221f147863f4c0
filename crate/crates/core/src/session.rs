//! Writing-session segmentation and transfer accounting.
//!
//! A session opens on the first sample whose linear-acceleration magnitude
//! exceeds the threshold and closes on the first sample that arrives more than
//! `hold` after the last above-threshold sample. The quiet tail is trimmed
//! from the emitted trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor_model::SensorSample;

pub const DEFAULT_THRESHOLD: f64 = 1.0;
pub const DEFAULT_HOLD_MS: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Active,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionEvent<T> {
    Start {
        t: u64,
    },
    /// `t` is the sample that closed the session; `trace` runs from the start
    /// sample through the last above-threshold sample.
    End {
        t: u64,
        trace: Vec<SensorSample<T>>,
    },
}

impl<T> SessionEvent<T> {
    pub fn t(&self) -> u64 {
        match self {
            SessionEvent::Start { t } | SessionEvent::End { t, .. } => *t,
        }
    }

    pub fn is_start(&self) -> bool {
        matches!(self, SessionEvent::Start { .. })
    }
}

#[derive(Debug, Clone)]
pub struct SessionDetector<T> {
    threshold: T,
    hold_us: u64,
    state: SessionState,
    /// Timestamp of the most recent above-threshold sample while active.
    last_above: Option<u64>,
    last_t: Option<u64>,
    buffer: Vec<SensorSample<T>>,
    /// Samples up to and including `last_above`.
    kept: usize,
}

impl<T: Scalar> SessionDetector<T> {
    pub fn new(threshold: T, hold_ms: f64) -> Result<Self> {
        if !(threshold > T::zero()) || !threshold.is_finite() {
            return Err(Error::Config(format!(
                "session threshold must be > 0, got {threshold}"
            )));
        }
        if !(hold_ms > 0.0) || !hold_ms.is_finite() {
            return Err(Error::Config(format!(
                "session hold must be > 0 ms, got {hold_ms}"
            )));
        }
        Ok(Self {
            threshold,
            hold_us: (hold_ms * 1000.0).round() as u64,
            state: SessionState::Idle,
            last_above: None,
            last_t: None,
            buffer: Vec::new(),
            kept: 0,
        })
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn hold_ms(&self) -> f64 {
        self.hold_us as f64 / 1000.0
    }

    pub fn feed(&mut self, sample: SensorSample<T>) -> Result<Option<SessionEvent<T>>> {
        if let Some(prev) = self.last_t {
            if sample.t <= prev {
                return Err(Error::NonMonotonic {
                    prev,
                    next: sample.t,
                });
            }
        }
        self.last_t = Some(sample.t);
        let above = sample.linear_accel.norm() > self.threshold;

        match self.state {
            SessionState::Idle => {
                if above {
                    self.state = SessionState::Active;
                    self.last_above = Some(sample.t);
                    self.buffer.clear();
                    self.buffer.push(sample);
                    self.kept = 1;
                    return Ok(Some(SessionEvent::Start { t: sample.t }));
                }
                Ok(None)
            }
            SessionState::Active => {
                if above {
                    self.buffer.push(sample);
                    self.last_above = Some(sample.t);
                    self.kept = self.buffer.len();
                    return Ok(None);
                }
                let quiet_since = self.last_above.expect("active session has an above sample");
                if sample.t - quiet_since > self.hold_us {
                    let trace = self.take_trace();
                    return Ok(Some(SessionEvent::End { t: sample.t, trace }));
                }
                self.buffer.push(sample);
                Ok(None)
            }
        }
    }

    /// Trimmed samples of the session in progress, if any.
    pub fn pending(&self) -> Option<&[SensorSample<T>]> {
        match self.state {
            SessionState::Active => Some(&self.buffer[..self.kept]),
            SessionState::Idle => None,
        }
    }

    /// Closes a session still open at end of stream. The event carries the
    /// last sample's timestamp.
    pub fn finish(&mut self) -> Option<SessionEvent<T>> {
        if self.state != SessionState::Active {
            return None;
        }
        let t = self.last_t.unwrap_or_default();
        Some(SessionEvent::End {
            t,
            trace: self.take_trace(),
        })
    }

    fn take_trace(&mut self) -> Vec<SensorSample<T>> {
        self.buffer.truncate(self.kept);
        self.state = SessionState::Idle;
        self.last_above = None;
        self.kept = 0;
        std::mem::take(&mut self.buffer)
    }
}

impl<T: Scalar> Default for SessionDetector<T> {
    fn default() -> Self {
        Self::new(T::lit(DEFAULT_THRESHOLD), DEFAULT_HOLD_MS).expect("valid defaults")
    }
}

/// Runs a fresh detector over a whole trace. A session still open at the end
/// is left open (trailing `Start` with no `End`).
pub fn detect_sessions<T: Scalar>(
    detector: &mut SessionDetector<T>,
    stream: &[SensorSample<T>],
) -> Result<Vec<SessionEvent<T>>> {
    let mut events = Vec::new();
    for s in stream {
        if let Some(ev) = detector.feed(*s)? {
            events.push(ev);
        }
    }
    Ok(events)
}

/// Samples a continuous link would send vs. samples sent only while a session
/// is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransferLedger {
    pub continuous_count: u64,
    pub gated_count: u64,
}

impl TransferLedger {
    pub fn savings(&self) -> Result<f64> {
        savings(self.continuous_count as f64, self.gated_count as f64)
    }
}

/// Counts continuous vs. gated transfers over a full trace. An unfinished
/// session at the end contributes its trimmed samples.
pub fn account<T: Scalar>(
    detector: &mut SessionDetector<T>,
    stream: &[SensorSample<T>],
) -> Result<TransferLedger> {
    let mut gated = 0u64;
    for s in stream {
        if let Some(SessionEvent::End { trace, .. }) = detector.feed(*s)? {
            gated += trace.len() as u64;
        }
    }
    if let Some(SessionEvent::End { trace, .. }) = detector.finish() {
        gated += trace.len() as u64;
    }
    Ok(TransferLedger {
        continuous_count: stream.len() as u64,
        gated_count: gated,
    })
}

/// Percentage of transfers saved by gating: `100 (continuous - gated) / continuous`.
///
/// Takes reals so averaged counts can be checked directly.
pub fn savings(continuous: f64, gated: f64) -> Result<f64> {
    if !(continuous > 0.0) {
        return Err(Error::UndefinedSavings);
    }
    Ok(100.0 * (continuous - gated) / continuous)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor_model::Vec3;

    const MS: u64 = 1000;

    fn sample(t_ms: u64, mag: f64) -> SensorSample<f64> {
        SensorSample::new(
            t_ms * MS,
            Vec3::new(0.0, mag, 0.0),
            Vec3::new(0.0, -9.8, 0.0),
        )
    }

    /// 100 Hz stream with magnitude given per timestamp.
    fn stream(end_ms: u64, mag: impl Fn(u64) -> f64) -> Vec<SensorSample<f64>> {
        (0..=end_ms / 10)
            .map(|k| sample(k * 10, mag(k * 10)))
            .collect()
    }

    #[test]
    fn quiet_stream_has_no_events() {
        let s = stream(3000, |_| 0.0);
        let mut d = SessionDetector::default();
        assert!(detect_sessions(&mut d, &s).unwrap().is_empty());
        assert_eq!(d.state(), SessionState::Idle);
    }

    #[test]
    fn single_burst_timing() {
        let s = stream(3000, |t| if t <= 1000 { 2.0 } else { 0.0 });
        let mut d = SessionDetector::default();
        let ev = detect_sessions(&mut d, &s).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0], SessionEvent::Start { t: 0 });
        match &ev[1] {
            SessionEvent::End { t, trace } => {
                assert_eq!(*t, 1410 * MS);
                assert_eq!(trace.first().unwrap().t, 0);
                assert_eq!(trace.last().unwrap().t, 1000 * MS);
                assert_eq!(trace.len(), 101);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_dip_keeps_session_open() {
        let s = stream(3000, |t| {
            if (500..800).contains(&t) || t > 1500 {
                0.0
            } else {
                2.0
            }
        });
        let mut d = SessionDetector::default();
        let ev = detect_sessions(&mut d, &s).unwrap();
        assert_eq!(ev.len(), 2);
        match &ev[1] {
            SessionEvent::End { t, trace } => {
                assert_eq!(*t, 1910 * MS);
                // The dip stays inside the trace.
                assert_eq!(trace.len(), 151);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exactly_hold_does_not_close() {
        // Quiet for exactly 400 ms after the last loud sample, then loud again.
        let s = stream(1000, |t| if t == 0 || t > 400 { 2.0 } else { 0.0 });
        let mut d = SessionDetector::default();
        let ev = detect_sessions(&mut d, &s).unwrap();
        assert_eq!(ev, vec![SessionEvent::Start { t: 0 }]);
    }

    #[test]
    fn out_of_order_is_error() {
        let mut d = SessionDetector::default();
        d.feed(sample(10, 0.0)).unwrap();
        assert!(matches!(
            d.feed(sample(10, 0.0)),
            Err(Error::NonMonotonic { .. })
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(SessionDetector::<f64>::new(0.0, 400.0).is_err());
        assert!(SessionDetector::<f64>::new(1.0, 0.0).is_err());
    }

    #[test]
    fn accounting() {
        // One long session with a 200 ms quiet tail that never closes it.
        let s = stream(1200, |t| if t <= 1000 { 2.0 } else { 0.0 });
        let l = account(&mut SessionDetector::default(), &s).unwrap();
        assert_eq!(l.continuous_count, 121);
        assert_eq!(l.gated_count, 121 - 20);

        let quiet = stream(1000, |_| 0.0);
        let l = account(&mut SessionDetector::default(), &quiet).unwrap();
        assert_eq!(l.gated_count, 0);
        assert_eq!(l.savings().unwrap(), 100.0);
    }

    #[test]
    fn savings_formula() {
        assert!((savings(281.4, 186.0).unwrap() - 33.9).abs() < 0.05);
        assert!((savings(228.8, 118.2).unwrap() - 48.3).abs() < 0.05);
        assert_eq!(savings(50.0, 50.0).unwrap(), 0.0);
        assert!(matches!(savings(0.0, 0.0), Err(Error::UndefinedSavings)));
    }
}
