//! Converts drawing-pad pointer events into sensor samples.
//!
//! Pad positions are scaled to the letter box and differentiated twice at the
//! events' own timestamp spacing, one sample per event, emitted one event
//! late. Pen-up events hold the last position. A short lift followed by a
//! new pen-down becomes a smoothstep transit across the lift; a lift longer
//! than the rebase window leaves the hand where it was and shifts the origin
//! instead, so moving the cursor between letters produces no motion.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sensor_model::SensorSample;

use super::device_sample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerEvent<T> {
    pub t_us: u64,
    /// Unit-box coordinates, y up.
    pub x: T,
    pub y: T,
    pub pen_down: bool,
}

#[derive(Debug, Clone)]
pub struct PointerIntegrator<T> {
    letter_size: T,
    theta: T,
    rebase_after_us: u64,
    offset: [T; 2],
    started: bool,
    last_t: Option<u64>,
    /// Time and position at which the pen was last lifted.
    lifted: Option<(u64, [T; 2])>,
    rebase: bool,
    /// Pen-up events awaiting a position.
    unresolved: Vec<u64>,
    /// Resolved positions; the back two are kept for the difference stencil.
    resolved: VecDeque<(u64, [T; 2])>,
    emitted_first: bool,
}

impl<T: Scalar> PointerIntegrator<T> {
    pub fn new(letter_size: T, theta: T, rebase_after_ms: f64) -> Self {
        Self {
            letter_size,
            theta,
            rebase_after_us: (rebase_after_ms * 1000.0).round() as u64,
            offset: [T::zero(); 2],
            started: false,
            last_t: None,
            lifted: None,
            rebase: false,
            unresolved: Vec::new(),
            resolved: VecDeque::new(),
            emitted_first: false,
        }
    }

    pub fn set_letter_size(&mut self, letter_size: T) {
        self.letter_size = letter_size;
    }

    pub fn set_theta(&mut self, theta: T) {
        self.theta = theta;
    }

    pub fn push(&mut self, ev: PointerEvent<T>) -> Result<Vec<SensorSample<T>>> {
        if let Some(prev) = self.last_t {
            if ev.t_us <= prev {
                return Err(Error::NonMonotonic {
                    prev,
                    next: ev.t_us,
                });
            }
        }
        if !(ev.x.is_finite() && ev.y.is_finite()) {
            return Err(Error::NonFinite("pointer position"));
        }
        self.last_t = Some(ev.t_us);

        if !self.started {
            if !ev.pen_down {
                // Nothing drawn yet; hovering carries no motion.
                return Ok(Vec::new());
            }
            self.started = true;
        }

        if ev.pen_down {
            let raw = [ev.x * self.letter_size, ev.y * self.letter_size];
            let pos = match self.lifted.take() {
                Some((lift_t, held)) => {
                    if self.rebase || ev.t_us - lift_t > self.rebase_after_us {
                        self.offset = [held[0] - raw[0], held[1] - raw[1]];
                        self.resolve_held(held);
                        held
                    } else {
                        let target = [raw[0] + self.offset[0], raw[1] + self.offset[1]];
                        self.resolve_transit(lift_t, held, ev.t_us, target);
                        target
                    }
                }
                None => [raw[0] + self.offset[0], raw[1] + self.offset[1]],
            };
            self.rebase = false;
            self.resolved.push_back((ev.t_us, pos));
        } else {
            let (lift_t, held) = match self.lifted {
                Some(l) => l,
                None => {
                    let l = *self
                        .resolved
                        .back()
                        .expect("started implies a resolved point");
                    self.lifted = Some(l);
                    l
                }
            };
            self.unresolved.push(ev.t_us);
            if ev.t_us - lift_t > self.rebase_after_us {
                self.rebase = true;
                self.resolve_held(held);
            }
        }
        Ok(self.drain(false))
    }

    /// Emits everything still buffered, holding position at the end.
    pub fn flush(&mut self) -> Vec<SensorSample<T>> {
        if let Some((_, held)) = self.lifted {
            self.resolve_held(held);
        }
        self.drain(true)
    }

    fn resolve_held(&mut self, held: [T; 2]) {
        for t in self.unresolved.drain(..) {
            self.resolved.push_back((t, held));
        }
    }

    fn resolve_transit(&mut self, t0: u64, from: [T; 2], t1: u64, to: [T; 2]) {
        let span = T::lit((t1 - t0) as f64);
        for t in self.unresolved.drain(..) {
            let u = T::lit((t - t0) as f64) / span;
            let e = u * u * (T::lit(3.0) - T::lit(2.0) * u);
            self.resolved.push_back((
                t,
                [
                    from[0] + (to[0] - from[0]) * e,
                    from[1] + (to[1] - from[1]) * e,
                ],
            ));
        }
    }

    fn drain(&mut self, to_end: bool) -> Vec<SensorSample<T>> {
        let mut out = Vec::new();
        // resolved[0] is the previous point once the first sample went out.
        loop {
            let centre = usize::from(self.emitted_first);
            let Some(&(t, p)) = self.resolved.get(centre) else {
                break;
            };
            let next = match self.resolved.get(centre + 1) {
                Some(&n) => Some(n),
                None if to_end => None,
                None => break,
            };
            let prev = if self.emitted_first {
                Some(self.resolved[0])
            } else {
                None
            };
            out.push(self.sample(prev, (t, p), next));
            if self.emitted_first {
                self.resolved.pop_front();
            }
            self.emitted_first = true;
            if next.is_none() {
                self.resolved.clear();
                self.emitted_first = false;
                break;
            }
        }
        out
    }

    /// Non-uniform central second difference; a missing neighbour is a held
    /// position at the mirrored spacing.
    fn sample(
        &self,
        prev: Option<(u64, [T; 2])>,
        (t, p): (u64, [T; 2]),
        next: Option<(u64, [T; 2])>,
    ) -> SensorSample<T> {
        let secs = |a: u64, b: u64| T::lit((b - a) as f64 / 1e6);
        let (hp, pp) = next.map_or((None, p), |(tn, pn)| (Some(secs(t, tn)), pn));
        let (hm, pm) = prev.map_or((None, p), |(tp, q)| (Some(secs(tp, t)), q));
        let (hm, hp) = match (hm, hp) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, a),
            (None, Some(b)) => (b, b),
            (None, None) => (T::one(), T::one()),
        };
        let two = T::lit(2.0);
        let acc = |k: usize| two * ((pp[k] - p[k]) / hp - (p[k] - pm[k]) / hm) / (hp + hm);
        device_sample(t, acc(0), acc(1), self.theta)
    }
}
