#![allow(dead_code)]

use airdraw_core::pipeline::extract_letter;
use airdraw_core::synth::LetterMotion;
use airdraw_core::*;
use airdraw_service::{Connection, ConnectionConfig, ServerMessage, TemplateStore};

/// Templates from noise-free, level-arm synthetic letters.
pub fn synth_templates() -> Templates {
    let spec = SynthSpec::<f64>::default();
    let cfg = PipelineConfig::default();
    let mut set = Templates::new(latin_alphabet()).unwrap();
    for (letter, path) in letter_paths::<f64>() {
        let trace = synthesize(&path, &spec).unwrap();
        set.insert(letter, extract_letter(&trace, &cfg).unwrap().unwrap())
            .unwrap();
    }
    set
}

/// A pad recording of `letter` traced at the synthesizer's pace: 100 Hz
/// pointer events from `t0_ms`, followed by one second of hover. Pen lifts
/// inside the letter are sped up to at most 280 ms, as a hand on a pad
/// would, so they stay inside the rebase window.
pub fn pad_frames(letter: char, t0_ms: f64) -> Vec<String> {
    const MAX_LIFT: f64 = 0.28;
    let path = letter_path::<f64>(Letter::new(letter)).unwrap();
    let motion = LetterMotion::paced(&path, 1.5).unwrap();
    let end = motion.duration();
    let lift_length = |from: f64| {
        let mut t = from;
        while t < end && !motion.pen_down(t) {
            t += 0.001;
        }
        t - from
    };
    let mut frames = Vec::new();
    let mut push = |k: usize, t: f64, pen: bool| {
        let [x, y] = motion.position(t);
        frames.push(format!(
            r#"{{"v":1,"kind":"stroke_point","x":{},"y":{},"t_ms":{},"pen":"{}"}}"#,
            x,
            1.0 - y,
            t0_ms + 10.0 * k as f64,
            if pen { "down" } else { "up" }
        ));
    };
    let (mut k, mut t, mut speed) = (0, 0.0, 1.0);
    loop {
        let down = motion.pen_down(t);
        push(k, t, down);
        if t >= end {
            break;
        }
        if down {
            speed = 1.0;
        } else if speed == 1.0 {
            speed = (lift_length(t) / MAX_LIFT).max(1.0);
        }
        t = (t + 0.01 * speed).min(end);
        k += 1;
    }
    for j in 1..=100 {
        push(k + j, end, false);
    }
    frames
}

/// Feeds frames through a fresh connection and collects every reply.
pub fn replay(frames: &[String], store: &TemplateStore) -> Vec<ServerMessage> {
    let mut conn = Connection::new(&ConnectionConfig::default()).unwrap();
    let mut out = Vec::new();
    for f in frames {
        let reply = conn.handle_text(f, store);
        out.extend(reply.messages);
        if reply.close {
            return out;
        }
    }
    out.extend(conn.finish(store));
    out
}

pub fn kinds(messages: &[ServerMessage]) -> Vec<&'static str> {
    messages
        .iter()
        .map(|m| match m {
            ServerMessage::SessionStart { .. } => "session_start",
            ServerMessage::SessionEnd { .. } => "session_end",
            ServerMessage::Prediction { .. } => "prediction",
            ServerMessage::TemplateSaved { .. } => "template_saved",
            ServerMessage::Error { .. } => "error",
        })
        .collect()
}
