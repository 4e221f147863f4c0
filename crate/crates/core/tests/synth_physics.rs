//! Synthesizer checks against integration oracles and the pipeline.

use airdraw_core::pipeline::segment;
use airdraw_core::synth::{LetterMotion, INCH};
use airdraw_core::*;

/// Trapezoidal double integration from rest.
fn integrate(acc: &[f64], dt: f64) -> Vec<f64> {
    let mut v = 0.0;
    let mut p = 0.0;
    let mut out = vec![0.0];
    for k in 1..acc.len() {
        let v_next = v + 0.5 * (acc[k - 1] + acc[k]) * dt;
        p += 0.5 * (v + v_next) * dt;
        v = v_next;
        out.push(p);
    }
    out
}

#[test]
fn double_integration_recovers_stroke_endpoints() {
    let spec = SynthSpec::<f64>::default();
    let dt = 0.01;
    let size = spec.letter_size;
    for (letter, path) in letter_paths::<f64>() {
        let trace = synthesize(&path, &spec).unwrap();
        let horizontal = integrate(
            &trace.iter().map(|s| s.linear_accel.z).collect::<Vec<_>>(),
            dt,
        );
        let vertical = integrate(
            &trace.iter().map(|s| s.linear_accel.y).collect::<Vec<_>>(),
            dt,
        );
        let motion = LetterMotion::paced(&path, spec.duration).unwrap();
        let origin = motion.start_point();
        for &(t_end, [x, y]) in motion.stroke_ends() {
            let k = ((spec.quiet_ms / 1000.0 + t_end) / dt).round() as usize;
            let want = [(x - origin[0]) * size, (y - origin[1]) * size];
            let err = (horizontal[k] - want[0]).hypot(vertical[k] - want[1]);
            assert!(err < 0.02 * size, "{letter}: endpoint error {err}");
        }
        let last = trace.len() - 1;
        let [x, y] = motion.stroke_ends().last().unwrap().1;
        let err = (horizontal[last] - (x - origin[0]) * size)
            .hypot(vertical[last] - (y - origin[1]) * size);
        assert!(err < 0.02 * size, "{letter}: final error {err}");
    }
}

#[test]
fn halving_size_halves_acceleration() {
    let full = SynthSpec::<f64>::default();
    let half = full.clone().with_size_inches(6.0);
    assert!((half.letter_size * 2.0 - full.letter_size).abs() < 1e-15);
    for letter in letters("aqwz") {
        let path = letter_path(letter).unwrap();
        let a = synthesize(&path, &full).unwrap();
        let b = synthesize(&path, &half).unwrap();
        let peak = a.iter().map(|s| s.linear_accel.norm()).fold(0.0, f64::max);
        for (p, q) in a.iter().zip(&b) {
            assert!((p.linear_accel * 0.5 - q.linear_accel).norm() <= 1e-9 * peak);
        }
    }
}

#[test]
fn every_letter_is_one_session() {
    let spec = SynthSpec::<f64>::default();
    for (letter, path) in letter_paths::<f64>() {
        let trace = synthesize(&path, &spec).unwrap();
        let (uploads, _) = segment(&trace, &PipelineConfig::default()).unwrap();
        assert_eq!(uploads.len(), 1, "{letter}");
        // The session closes on its own rather than at end of stream.
        assert!(uploads[0].closed_us < trace.last().unwrap().t, "{letter}");
    }
}

#[test]
fn noise_free_gravity_recovers_pose() {
    for deg in [-60.0f64, -30.0, 0.0, 30.0, 60.0] {
        let spec = SynthSpec {
            arm: ArmPose::Fixed(deg.to_radians()),
            ..SynthSpec::default()
        };
        let trace = synthesize(&letter_path::<f64>(Letter::new('b')).unwrap(), &spec).unwrap();
        for s in &trace {
            assert!((gravity_norm(s.gravity) - STANDARD_GRAVITY).abs() < 1e-12);
            let th = arm_angle(normalize_gravity(s.gravity).unwrap())
                .unwrap()
                .radians();
            assert!((th - deg.to_radians()).abs() < 1e-9);
        }
    }
}

#[test]
fn pizza_segments_into_five_letters() {
    let spec = SynthSpec::<f64>::default();
    let trace = synthesize_word("pizza", &spec, 1000.0).unwrap();
    let (uploads, ledger) = segment(&trace, &PipelineConfig::default()).unwrap();
    assert_eq!(uploads.len(), 5);
    assert!(ledger.gated_count < ledger.continuous_count);
    let cake = synthesize_word("cake", &spec, 1000.0).unwrap();
    let (_, ledger) = segment(&cake, &PipelineConfig::default()).unwrap();
    assert!(ledger.savings().unwrap() > 0.0);
}

#[test]
fn default_letter_box_is_twelve_inches() {
    assert!((SynthSpec::<f64>::default().letter_size - 12.0 * INCH).abs() < 1e-15);
}

#[test]
fn f32_synthesis_tracks_f64() {
    let path64 = letter_path::<f64>(Letter::new('g')).unwrap();
    let path32 = letter_path::<f32>(Letter::new('g')).unwrap();
    let a = synthesize(&path64, &SynthSpec::default()).unwrap();
    let b = synthesize(&path32, &SynthSpec::default()).unwrap();
    assert_eq!(a.len(), b.len());
    let peak = a.iter().map(|s| s.linear_accel.norm()).fold(0.0, f64::max);
    for (p, q) in a.iter().zip(&b) {
        assert!((p.linear_accel - q.linear_accel.cast::<f64>()).norm() < 1e-2 * peak);
    }
}
