//! Raw sample types and the weighted moving-average smoother.

use std::collections::VecDeque;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A 3-component vector in the device frame, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn cast<U: Scalar>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T: Scalar> From<[T; 3]> for Vec3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self::new(x, y, z)
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, k: T) -> Self {
        self.scale(k)
    }
}

impl<T: Scalar> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[T; 3]>::deserialize(d).map(Vec3::from)
    }
}

/// One timestamped reading of linear acceleration and gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SensorSample<T> {
    /// Microseconds; strictly increasing within a stream.
    #[serde(rename = "t_us")]
    pub t: u64,
    #[serde(rename = "la")]
    pub linear_accel: Vec3<T>,
    #[serde(rename = "g")]
    pub gravity: Vec3<T>,
}

impl<T: Scalar> SensorSample<T> {
    pub fn new(t: u64, linear_accel: Vec3<T>, gravity: Vec3<T>) -> Self {
        Self {
            t,
            linear_accel,
            gravity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.linear_accel.is_finite() {
            return Err(Error::NonFinite("linear acceleration"));
        }
        if !self.gravity.is_finite() {
            return Err(Error::NonFinite("gravity"));
        }
        Ok(())
    }
}

/// Checks finiteness and strict timestamp monotonicity.
pub fn validate_stream<T: Scalar>(stream: &[SensorSample<T>]) -> Result<()> {
    for (i, s) in stream.iter().enumerate() {
        s.validate()?;
        if i > 0 && stream[i - 1].t >= s.t {
            return Err(Error::NonMonotonic {
                prev: stream[i - 1].t,
                next: s.t,
            });
        }
    }
    Ok(())
}

/// Which channel(s) of a sample the smoother touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    LinearAccel,
    Gravity,
    Both,
}

impl Channel {
    fn accel(self) -> bool {
        matches!(self, Channel::LinearAccel | Channel::Both)
    }

    fn gravity(self) -> bool {
        matches!(self, Channel::Gravity | Channel::Both)
    }
}

/// Causal weighted moving-average window.
///
/// Weights are ordered oldest to newest and normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec<T> {
    weights: Vec<T>,
}

impl<T: Scalar> FilterSpec<T> {
    pub fn new(weights: &[T]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("filter weights must not be empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= T::zero()) {
            return Err(Error::Config(
                "filter weights must be positive and finite".into(),
            ));
        }
        let total: T = weights.iter().copied().sum();
        Ok(Self {
            weights: weights.iter().map(|&w| w / total).collect(),
        })
    }

    pub fn uniform(window: usize) -> Result<Self> {
        Self::new(&vec![T::one(); window])
    }

    /// Linearly increasing weights `1..=window`.
    pub fn linear(window: usize) -> Result<Self> {
        let w: Vec<T> = (1..=window).map(|k| T::lit(k as f64)).collect();
        Self::new(&w)
    }

    pub fn window_length(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Scalar> Default for FilterSpec<T> {
    /// Window 5, weights (1,2,3,4,5)/15.
    fn default() -> Self {
        Self::linear(5).expect("non-empty window")
    }
}

/// Streaming form of [`smooth`]; one instance per stream.
#[derive(Debug, Clone)]
pub struct WeightedMovingAverage<T> {
    spec: FilterSpec<T>,
    channel: Channel,
    accel: VecDeque<Vec3<T>>,
    gravity: VecDeque<Vec3<T>>,
    last_t: Option<u64>,
}

impl<T: Scalar> WeightedMovingAverage<T> {
    pub fn new(spec: FilterSpec<T>, channel: Channel) -> Self {
        let w = spec.window_length();
        Self {
            spec,
            channel,
            accel: VecDeque::with_capacity(w),
            gravity: VecDeque::with_capacity(w),
            last_t: None,
        }
    }

    pub fn push(&mut self, sample: SensorSample<T>) -> Result<SensorSample<T>> {
        sample.validate()?;
        if let Some(prev) = self.last_t {
            if sample.t <= prev {
                return Err(Error::NonMonotonic {
                    prev,
                    next: sample.t,
                });
            }
        }
        self.last_t = Some(sample.t);

        let w = self.spec.window_length();
        let mut out = sample;
        if self.channel.accel() {
            out.linear_accel = Self::apply(&self.spec, &mut self.accel, w, sample.linear_accel);
        }
        if self.channel.gravity() {
            out.gravity = Self::apply(&self.spec, &mut self.gravity, w, sample.gravity);
        }
        Ok(out)
    }

    fn apply(spec: &FilterSpec<T>, buf: &mut VecDeque<Vec3<T>>, w: usize, v: Vec3<T>) -> Vec3<T> {
        if buf.len() == w {
            buf.pop_front();
        }
        buf.push_back(v);
        // Head of stream: use the newest `n` weights and renormalize.
        let weights = &spec.weights[w - buf.len()..];
        let norm: T = weights.iter().copied().sum();
        let mut acc = Vec3::zero();
        for (wk, vk) in weights.iter().zip(buf.iter()) {
            acc = acc + *vk * *wk;
        }
        acc * (T::one() / norm)
    }

    pub fn reset(&mut self) {
        self.accel.clear();
        self.gravity.clear();
        self.last_t = None;
    }
}

/// Applies the causal weighted moving average to the selected channel(s).
///
/// Output has the input's length and timestamps; unselected channels pass
/// through untouched.
pub fn smooth<T: Scalar>(
    stream: &[SensorSample<T>],
    spec: &FilterSpec<T>,
    channel: Channel,
) -> Result<Vec<SensorSample<T>>> {
    let mut filter = WeightedMovingAverage::new(spec.clone(), channel);
    stream.iter().map(|s| filter.push(*s)).collect()
}
