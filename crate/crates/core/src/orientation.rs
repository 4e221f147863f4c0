//! Arm angle from gravity and the x/y frame rotation that cancels it.
//!
//! Device frame: x runs along the forearm toward the hand, y points up through
//! the watch face when the arm is horizontal, z completes the right-handed
//! frame. Gravity as reported by the sensor stack points along -y for a level
//! arm. The arm angle is `atan2(-gx, -gy)` on normalized gravity, which is 0
//! for a level arm and grows with elevation. [`rotate_frame`] applies
//! `R(-theta)`, the inverse of the `R(+theta)` device tilt used by the
//! synthesizer, so world up/down motion lands on y only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor_model::{SensorSample, Vec3};

const MIN_GRAVITY_NORM: f64 = 1e-6;
const UNIT_NORM_TOL: f64 = 1e-6;
/// Above this |gz|/|g| ratio wrist roll is large enough to distort the 2-D rotation.
pub const WRIST_ROLL_WARN_RATIO: f64 = 0.3;

/// Elevation of the forearm above the horizon, radians in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmAngle<T>(T);

impl<T: Scalar> ArmAngle<T> {
    pub fn from_radians(theta: T) -> Self {
        Self(theta)
    }

    pub fn from_degrees(deg: T) -> Self {
        Self(deg.to_radians())
    }

    pub fn radians(self) -> T {
        self.0
    }

    pub fn degrees(self) -> T {
        self.0.to_degrees()
    }
}

/// Rotated acceleration: x back/forth, y up/down, z left/right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RotatedSample<T> {
    #[serde(rename = "t_us")]
    pub t: u64,
    #[serde(rename = "la")]
    pub accel: Vec3<T>,
}

pub fn gravity_norm<T: Scalar>(g: Vec3<T>) -> T {
    g.norm()
}

pub fn normalize_gravity<T: Scalar>(g: Vec3<T>) -> Result<Vec3<T>> {
    let norm = gravity_norm(g);
    if !(norm > T::lit(MIN_GRAVITY_NORM)) {
        return Err(Error::DegenerateGravity {
            norm: norm.to_f64_lossy(),
        });
    }
    Ok(g * (T::one() / norm))
}

pub fn arm_angle<T: Scalar>(g_normalized: Vec3<T>) -> Result<ArmAngle<T>> {
    let n = g_normalized.norm();
    if (n - T::one()).abs() > T::lit(UNIT_NORM_TOL) {
        return Err(Error::Config(format!(
            "arm_angle expects unit gravity, got norm {n}"
        )));
    }
    if g_normalized.x == T::zero() && g_normalized.y == T::zero() {
        return Err(Error::IndeterminateAngle);
    }
    Ok(ArmAngle((-g_normalized.x).atan2(-g_normalized.y)))
}

/// Normalizes then measures; the usual entry point for raw gravity.
pub fn arm_angle_from_gravity<T: Scalar>(g: Vec3<T>) -> Result<ArmAngle<T>> {
    arm_angle(normalize_gravity(g)?)
}

pub fn wrist_roll_ratio<T: Scalar>(g: Vec3<T>) -> T {
    let n = g.norm();
    if n > T::zero() {
        g.z.abs() / n
    } else {
        T::zero()
    }
}

/// Rotates the x/y acceleration plane by `-theta`; z passes through and the
/// gravity channel is dropped.
pub fn rotate_frame<T: Scalar>(sample: &SensorSample<T>, theta: ArmAngle<T>) -> RotatedSample<T> {
    RotatedSample {
        t: sample.t,
        accel: rotate_vec(sample.linear_accel, theta),
    }
}

pub fn rotate_vec<T: Scalar>(v: Vec3<T>, theta: ArmAngle<T>) -> Vec3<T> {
    let (s, c) = theta.0.sin_cos();
    Vec3::new(v.x * c + v.y * s, -v.x * s + v.y * c, v.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::STANDARD_GRAVITY as G0;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn norms() {
        assert!(close(gravity_norm(Vec3::new(0.0, 0.0, 9.81)), 9.81, 1e-12));
        assert!(close(gravity_norm(Vec3::new(3.0, 4.0, 0.0)), 5.0, 1e-12));
        let c = G0 / 3f64.sqrt();
        assert!(close(gravity_norm(Vec3::new(c, c, c)), G0, 1e-12));
    }

    #[test]
    fn normalization() {
        let n = normalize_gravity(Vec3::new(0.0, -9.81, 0.0)).unwrap();
        assert_eq!(n, Vec3::new(0.0, -1.0, 0.0));
        let n = normalize_gravity(Vec3::new(3.0, 4.0, 0.0)).unwrap();
        assert!(close(n.x, 0.6, 1e-15) && close(n.y, 0.8, 1e-15) && n.z == 0.0);
        assert!(close(n.norm(), 1.0, 1e-9));
        assert!(matches!(
            normalize_gravity(Vec3::<f64>::zero()),
            Err(Error::DegenerateGravity { .. })
        ));
    }

    #[test]
    fn angle_convention() {
        let level = arm_angle(Vec3::new(0.0, -1.0, 0.0)).unwrap();
        assert_eq!(level.radians(), 0.0);
        let deg30 = 30f64.to_radians();
        let a = arm_angle(Vec3::new(-deg30.sin(), -deg30.cos(), 0.0)).unwrap();
        assert!(close(a.degrees(), 30.0, 1e-9));
        let a = arm_angle(Vec3::new(deg30.sin(), -deg30.cos(), 0.0)).unwrap();
        assert!(close(a.degrees(), -30.0, 1e-9));
        assert!(matches!(
            arm_angle(Vec3::new(0.0, 0.0, 1.0)),
            Err(Error::IndeterminateAngle)
        ));
    }

    #[test]
    fn angle_is_monotone_in_elevation() {
        let mut prev = f64::NEG_INFINITY;
        for k in -89..=89 {
            let th = (k as f64).to_radians();
            let a = arm_angle(Vec3::new(-th.sin(), -th.cos(), 0.0))
                .unwrap()
                .radians();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn rotation_examples() {
        let s = SensorSample::new(5, Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.0, -G0, 0.0));
        let r = rotate_frame(&s, ArmAngle::from_radians(0.0));
        assert_eq!(r.accel, s.linear_accel);
        assert_eq!(r.t, 5);

        let s = SensorSample::new(0, Vec3::new(1.0, 0.0, 0.0), Vec3::zero());
        let r = rotate_frame(&s, ArmAngle::from_degrees(90.0));
        assert!(close(r.accel.x, 0.0, 1e-15));
        assert!(close(r.accel.y, -1.0, 1e-15));
        assert_eq!(r.accel.z, 0.0);
    }

    #[test]
    fn rotation_inverts_device_tilt() {
        // World up/down motion seen by a device tilted by +theta.
        for deg in [-60.0, -15.0, 0.0, 45.0, 80.0] {
            let th: f64 = f64::to_radians(deg);
            let world_y = 2.5;
            let device = Vec3::new(-world_y * th.sin(), world_y * th.cos(), 0.0);
            let g = Vec3::new(-G0 * th.sin(), -G0 * th.cos(), 0.0);
            let theta = arm_angle_from_gravity(g).unwrap();
            let r = rotate_vec(device, theta);
            assert!(close(r.x, 0.0, 1e-12), "{deg}: {r:?}");
            assert!(close(r.y, world_y, 1e-12));
        }
    }

    #[test]
    fn wrist_roll() {
        assert!(wrist_roll_ratio(Vec3::new(0.0, -G0, 0.0)) < WRIST_ROLL_WARN_RATIO);
        assert!(wrist_roll_ratio(Vec3::new(0.0, -5.0, 5.0)) > WRIST_ROLL_WARN_RATIO);
    }
}
