//! Labeled sensor traces synthesized from 2-D letter stroke paths.
//!
//! The pen path is scaled to the letter box, time-parameterized, and
//! differentiated twice at the sample rate. Horizontal motion becomes device
//! z; vertical motion is world y, which is tilted by the arm angle into device
//! x/y exactly as a real forearm would see it. Gravity follows the same arm
//! angle. Quiet samples pad both ends.

mod letters;
mod motion;
mod pointer;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use motion::LetterMotion;
pub use pointer::{PointerEvent, PointerIntegrator};

use crate::classifier::Letter;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, STANDARD_GRAVITY};
use crate::sensor_model::{SensorSample, Vec3};

pub const INCH: f64 = 0.0254;
pub const DEFAULT_PEN_UP_DWELL_MS: f64 = 150.0;
pub const MIN_QUIET_MS: f64 = 600.0;

/// A letter as pen strokes in a unit box; y points up.
#[derive(Debug, Clone, PartialEq)]
pub struct StrokePath<T> {
    pub letter: Letter,
    pub strokes: Vec<Vec<[T; 2]>>,
    /// Pause after each stroke before moving to the next one.
    pub pen_up_dwell_ms: f64,
}

/// Forearm elevation over the course of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmPose<T> {
    Fixed(T),
    /// Linear sweep from `from` to `to` radians across the whole trace.
    Sweep {
        from: T,
        to: T,
    },
}

impl<T: Scalar> ArmPose<T> {
    fn at(&self, frac: T) -> T {
        match *self {
            ArmPose::Fixed(th) => th,
            ArmPose::Sweep { from, to } => from + (to - from) * frac,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec<T> {
    /// Edge of the letter box, meters.
    pub letter_size: T,
    pub sample_rate: T,
    /// Mean writing time per letter over the built-in alphabet, seconds.
    /// Each letter is paced by its stroke effort, see [`LetterMotion::paced`].
    pub duration: T,
    pub noise_sigma: T,
    pub arm: ArmPose<T>,
    pub seed: u64,
    /// Quiet time before the first and after the last letter.
    pub quiet_ms: f64,
}

impl<T: Scalar> Default for SynthSpec<T> {
    fn default() -> Self {
        Self {
            letter_size: T::lit(12.0 * INCH),
            sample_rate: T::lit(100.0),
            duration: T::lit(1.5),
            noise_sigma: T::zero(),
            arm: ArmPose::Fixed(T::zero()),
            seed: 0,
            quiet_ms: MIN_QUIET_MS,
        }
    }
}

impl<T: Scalar> SynthSpec<T> {
    pub fn with_size_inches(mut self, inches: f64) -> Self {
        self.letter_size = T::lit(inches * INCH);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Synthesis(format!("invalid {what}")));
        if !(self.letter_size > T::zero()) || !self.letter_size.is_finite() {
            return bad("letter size");
        }
        if !(self.sample_rate > T::zero()) || !self.sample_rate.is_finite() {
            return bad("sample rate");
        }
        if !(self.duration > T::zero()) || !self.duration.is_finite() {
            return bad("duration");
        }
        if !(self.noise_sigma >= T::zero()) || !self.noise_sigma.is_finite() {
            return bad("noise sigma");
        }
        if !(self.quiet_ms >= 0.0) {
            return bad("quiet padding");
        }
        Ok(())
    }

    fn period_us(&self) -> u64 {
        (1e6 / self.sample_rate.to_f64_lossy()).round().max(1.0) as u64
    }
}

/// The built-in lowercase `a..=z` stroke library.
pub fn letter_paths<T: Scalar>() -> BTreeMap<Letter, StrokePath<T>> {
    letters::all(DEFAULT_PEN_UP_DWELL_MS)
}

pub fn letter_path<T: Scalar>(letter: Letter) -> Result<StrokePath<T>> {
    letters::path_for(letter, DEFAULT_PEN_UP_DWELL_MS)
        .ok_or_else(|| Error::Synthesis(format!("no stroke path for {letter:?}")))
}

/// Device-frame linear acceleration and gravity for a world motion sample.
pub fn device_sample<T: Scalar>(t: u64, horizontal: T, vertical: T, theta: T) -> SensorSample<T> {
    let (s, c) = theta.sin_cos();
    let g0 = T::lit(STANDARD_GRAVITY);
    SensorSample::new(
        t,
        Vec3::new(-vertical * s, vertical * c, horizontal),
        Vec3::new(-g0 * s, -g0 * c, T::zero()),
    )
}

/// One letter, padded with quiet on both sides.
pub fn synthesize<T: Scalar>(
    path: &StrokePath<T>,
    spec: &SynthSpec<T>,
) -> Result<Vec<SensorSample<T>>> {
    render(&[path], spec, 0.0)
}

/// Letters written one after another with `gap_ms` of stillness in between.
pub fn synthesize_word<T: Scalar>(
    word: &str,
    spec: &SynthSpec<T>,
    gap_ms: f64,
) -> Result<Vec<SensorSample<T>>> {
    let paths = word
        .chars()
        .map(|c| letter_path(Letter::new(c)))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&StrokePath<T>> = paths.iter().collect();
    render(&refs, spec, gap_ms)
}

fn render<T: Scalar>(
    paths: &[&StrokePath<T>],
    spec: &SynthSpec<T>,
    gap_ms: f64,
) -> Result<Vec<SensorSample<T>>> {
    spec.validate()?;
    if !(gap_ms >= 0.0) {
        return Err(Error::Synthesis(format!("invalid gap {gap_ms} ms")));
    }
    if paths.is_empty() {
        return Ok(Vec::new());
    }
    let motions = paths
        .iter()
        .map(|p| LetterMotion::paced(p, spec.duration))
        .collect::<Result<Vec<_>>>()?;

    let period_us = spec.period_us();
    let dt = T::lit(period_us as f64 / 1e6);
    let quiet = T::lit(spec.quiet_ms / 1000.0);
    let gap = T::lit(gap_ms / 1000.0);
    let mut offsets = Vec::with_capacity(motions.len());
    let mut t = quiet;
    for (i, m) in motions.iter().enumerate() {
        if i > 0 {
            t = t + gap;
        }
        offsets.push(t);
        t = t + m.duration();
    }
    let total = t + quiet;
    let n = (total / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0) + 1;

    let mut horizontal = vec![T::zero(); n];
    let mut vertical = vec![T::zero(); n];
    let inv_dt2 = T::one() / (dt * dt);
    for (m, &offset) in motions.iter().zip(&offsets) {
        // Only samples whose stencil touches the motion window are non-zero.
        let first = ((offset / dt).floor().to_usize().unwrap_or(0)).saturating_sub(1);
        let last = (((offset + m.duration()) / dt)
            .ceil()
            .to_usize()
            .unwrap_or(0)
            + 1)
        .min(n - 1);
        let pos = |k: isize| {
            let p = m.position(T::lit(k as f64) * dt - offset);
            [p[0] * spec.letter_size, p[1] * spec.letter_size]
        };
        for k in first..=last {
            let ki = k as isize;
            let (pm, p0, pp) = (pos(ki - 1), pos(ki), pos(ki + 1));
            horizontal[k] = horizontal[k] + (pp[0] - T::lit(2.0) * p0[0] + pm[0]) * inv_dt2;
            vertical[k] = vertical[k] + (pp[1] - T::lit(2.0) * p0[1] + pm[1]) * inv_dt2;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.noise_sigma;
    let denom = T::lit((n.max(2) - 1) as f64);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let theta = spec.arm.at(T::lit(k as f64) / denom);
        let mut s = device_sample(k as u64 * period_us, horizontal[k], vertical[k], theta);
        if sigma > T::zero() {
            let mut draw = || T::sample_normal(&mut rng, sigma);
            s.linear_accel = s.linear_accel + Vec3::new(draw(), draw(), draw());
            s.gravity = s.gravity + Vec3::new(draw(), draw(), draw());
        }
        out.push(s);
    }
    Ok(out)
}
