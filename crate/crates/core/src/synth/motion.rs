//! Time parameterization of stroke paths.
//!
//! Each stroke is split into runs at sharp corners. A run follows a
//! centripetal Catmull-Rom curve through its vertices and is traversed with a
//! smoothstep arc-length profile, so velocity is zero at both ends. Pen-up
//! gaps are a dwell followed by a straight transit to the next stroke. Run
//! durations scale with the square root of run length, which gives every run
//! the same peak tangential acceleration.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::StrokePath;

/// Turns sharper than this split a stroke into separate runs.
const CORNER_DEG: f64 = 50.0;
const TABLE_STEPS: usize = 32;
const MIN_SEGMENT: f64 = 1e-9;

type P<T> = [T; 2];

fn sub<T: Scalar>(a: P<T>, b: P<T>) -> P<T> {
    [a[0] - b[0], a[1] - b[1]]
}

fn dist<T: Scalar>(a: P<T>, b: P<T>) -> T {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

fn lerp<T: Scalar>(a: P<T>, b: P<T>, wa: T, wb: T) -> P<T> {
    [a[0] * wa + b[0] * wb, a[1] * wa + b[1] * wb]
}

/// A smooth curve traversed by arc length.
#[derive(Debug, Clone)]
struct Run<T> {
    pts: Vec<P<T>>,
    /// Cumulative lengths at `(segment, step)` samples.
    table: Vec<(T, usize, T)>,
    length: T,
}

impl<T: Scalar> Run<T> {
    fn new(pts: Vec<P<T>>) -> Self {
        let mut table = vec![(T::zero(), 0, T::zero())];
        let mut prev = pts[0];
        let mut acc = T::zero();
        for seg in 0..pts.len() - 1 {
            for k in 1..=TABLE_STEPS {
                let u = T::lit(k as f64 / TABLE_STEPS as f64);
                let p = Self::eval_on(&pts, seg, u);
                acc = acc + dist(p, prev);
                prev = p;
                table.push((acc, seg, u));
            }
        }
        Self {
            pts,
            table,
            length: acc,
        }
    }

    fn at_length(&self, s: T) -> P<T> {
        if s <= T::zero() {
            return self.pts[0];
        }
        if s >= self.length {
            return *self.pts.last().unwrap();
        }
        let idx = self.table.partition_point(|e| e.0 < s).max(1);
        let (s0, seg0, u0) = self.table[idx - 1];
        let (s1, seg1, u1) = self.table[idx];
        let w = if s1 > s0 {
            (s - s0) / (s1 - s0)
        } else {
            T::zero()
        };
        // Parameter of the previous table entry, moved to seg1's frame.
        let u0 = if seg0 == seg1 { u0 } else { T::zero() };
        Self::eval_on(&self.pts, seg1, u0 + (u1 - u0) * w)
    }

    /// Centripetal Catmull-Rom between `pts[seg]` and `pts[seg + 1]`,
    /// with reflected phantom end points.
    fn eval_on(pts: &[P<T>], seg: usize, u: T) -> P<T> {
        let n = pts.len();
        let p1 = pts[seg];
        let p2 = pts[seg + 1];
        if n == 2 {
            return lerp(p1, p2, T::one() - u, u);
        }
        let two = T::lit(2.0);
        let p0 = if seg == 0 {
            [two * p1[0] - p2[0], two * p1[1] - p2[1]]
        } else {
            pts[seg - 1]
        };
        let p3 = if seg + 2 < n {
            pts[seg + 2]
        } else {
            [two * p2[0] - p1[0], two * p2[1] - p1[1]]
        };
        let knot = |a: P<T>, b: P<T>| dist(a, b).sqrt();
        let t0 = T::zero();
        let t1 = t0 + knot(p0, p1);
        let t2 = t1 + knot(p1, p2);
        let t3 = t2 + knot(p2, p3);
        let t = t1 + (t2 - t1) * u;
        let a1 = lerp(p0, p1, (t1 - t) / (t1 - t0), (t - t0) / (t1 - t0));
        let a2 = lerp(p1, p2, (t2 - t) / (t2 - t1), (t - t1) / (t2 - t1));
        let a3 = lerp(p2, p3, (t3 - t) / (t3 - t2), (t - t2) / (t3 - t2));
        let b1 = lerp(a1, a2, (t2 - t) / (t2 - t0), (t - t0) / (t2 - t0));
        let b2 = lerp(a2, a3, (t3 - t) / (t3 - t1), (t - t1) / (t3 - t1));
        lerp(b1, b2, (t2 - t) / (t2 - t1), (t - t1) / (t2 - t1))
    }
}

#[derive(Debug, Clone)]
enum Phase<T> {
    Move {
        run: Run<T>,
        start: T,
        dur: T,
        pen_down: bool,
    },
    Dwell {
        at: P<T>,
        start: T,
        dur: T,
    },
}

impl<T: Scalar> Phase<T> {
    fn start(&self) -> T {
        match self {
            Phase::Move { start, .. } | Phase::Dwell { start, .. } => *start,
        }
    }

    fn end(&self) -> T {
        match self {
            Phase::Move { start, dur, .. } | Phase::Dwell { start, dur, .. } => *start + *dur,
        }
    }

    fn position(&self, t: T) -> P<T> {
        match self {
            Phase::Dwell { at, .. } => *at,
            Phase::Move {
                run, start, dur, ..
            } => {
                let u = ((t - *start) / *dur).max(T::zero()).min(T::one());
                let ease = u * u * (T::lit(3.0) - T::lit(2.0) * u);
                run.at_length(run.length * ease)
            }
        }
    }
}

/// The time-parameterized pen position of one letter, in unit-box coordinates.
#[derive(Debug, Clone)]
pub struct LetterMotion<T> {
    phases: Vec<Phase<T>>,
    duration: T,
    stroke_ends: Vec<(T, P<T>)>,
}

fn dedup<T: Scalar>(pl: &[P<T>]) -> Vec<P<T>> {
    let mut out: Vec<P<T>> = Vec::with_capacity(pl.len());
    for &p in pl {
        if out.last().is_none_or(|&q| dist(p, q) > T::lit(MIN_SEGMENT)) {
            out.push(p);
        }
    }
    out
}

fn split_at_corners<T: Scalar>(pl: &[P<T>]) -> Vec<Vec<P<T>>> {
    let limit = T::lit(CORNER_DEG.to_radians());
    let mut runs = vec![vec![pl[0]]];
    for i in 1..pl.len() {
        runs.last_mut().unwrap().push(pl[i]);
        if i + 1 < pl.len() {
            let d0 = sub(pl[i], pl[i - 1]);
            let d1 = sub(pl[i + 1], pl[i]);
            let turn = (d0[0] * d1[1] - d0[1] * d1[0]).atan2(d0[0] * d1[0] + d0[1] * d1[1]);
            if turn.abs() > limit {
                runs.push(vec![pl[i]]);
            }
        }
    }
    runs
}

/// Runs of a path in drawing order; `None` marks a pen-up dwell.
struct Plan<T> {
    items: Vec<Option<(Run<T>, bool)>>,
    stroke_last_item: Vec<usize>,
    first_point: P<T>,
    dwell: T,
}

impl<T: Scalar> Plan<T> {
    fn new(path: &StrokePath<T>) -> Result<Self> {
        if path.strokes.is_empty() {
            return Err(Error::Synthesis(format!(
                "letter {} has no strokes",
                path.letter
            )));
        }
        let mut items: Vec<Option<(Run<T>, bool)>> = Vec::new();
        let mut prev_end: Option<P<T>> = None;
        let mut stroke_last_item = Vec::new();
        for stroke in &path.strokes {
            let pts = dedup(stroke);
            if pts.len() < 2 {
                return Err(Error::Synthesis(format!(
                    "letter {} has a zero-length stroke",
                    path.letter
                )));
            }
            if let Some(end) = prev_end {
                items.push(None);
                if dist(end, pts[0]) > T::lit(MIN_SEGMENT) {
                    items.push(Some((Run::new(vec![end, pts[0]]), false)));
                }
            }
            for run in split_at_corners(&pts) {
                items.push(Some((Run::new(run), true)));
            }
            stroke_last_item.push(items.len() - 1);
            prev_end = pts.last().copied();
        }
        Ok(Self {
            items,
            stroke_last_item,
            first_point: path.strokes[0][0],
            dwell: T::lit(path.pen_up_dwell_ms / 1000.0),
        })
    }

    /// Sum of sqrt(run length), the time weight of all moving runs.
    fn effort(&self) -> T {
        self.items
            .iter()
            .flatten()
            .map(|(r, _)| r.length.sqrt())
            .sum()
    }

    fn dwell_time(&self) -> T {
        T::lit(self.items.iter().filter(|i| i.is_none()).count() as f64) * self.dwell
    }
}

/// Mean effort and dwell time over the built-in alphabet, unit box.
fn library_pace() -> (f64, f64) {
    static PACE: OnceLock<(f64, f64)> = OnceLock::new();
    *PACE.get_or_init(|| {
        let plans: Vec<Plan<f64>> = super::letter_paths::<f64>()
            .values()
            .map(|p| Plan::new(p).expect("library paths are valid"))
            .collect();
        let n = plans.len() as f64;
        (
            plans.iter().map(|p| p.effort()).sum::<f64>() / n,
            plans.iter().map(|p| p.dwell_time()).sum::<f64>() / n,
        )
    })
}

impl<T: Scalar> LetterMotion<T> {
    /// Lays the path out over exactly `duration` seconds.
    pub fn with_duration(path: &StrokePath<T>, duration: T) -> Result<Self> {
        let plan = Plan::new(path)?;
        let moving = duration - plan.dwell_time();
        if !(moving > T::zero()) {
            return Err(Error::Synthesis(format!(
                "duration {duration}s leaves no time for motion after pen-up dwells"
            )));
        }
        let secs_per_effort = moving / plan.effort();
        Ok(Self::layout(plan, secs_per_effort))
    }

    /// Paces the path so that the built-in alphabet averages `mean_duration`
    /// seconds per letter. Every run then peaks at about the same
    /// acceleration: simple letters are written faster than busy ones.
    pub fn paced(path: &StrokePath<T>, mean_duration: T) -> Result<Self> {
        let plan = Plan::new(path)?;
        let (effort, dwell) = library_pace();
        let moving = mean_duration - T::lit(dwell);
        if !(moving > T::zero()) {
            return Err(Error::Synthesis(format!(
                "mean duration {mean_duration}s leaves no time for motion after pen-up dwells"
            )));
        }
        Ok(Self::layout(plan, moving / T::lit(effort)))
    }

    fn layout(plan: Plan<T>, secs_per_effort: T) -> Self {
        let mut phases = Vec::with_capacity(plan.items.len());
        let mut stroke_ends = Vec::new();
        let mut t = T::zero();
        let mut last_point = plan.first_point;
        for (idx, item) in plan.items.into_iter().enumerate() {
            let phase = match item {
                None => Phase::Dwell {
                    at: last_point,
                    start: t,
                    dur: plan.dwell,
                },
                Some((run, pen_down)) => {
                    let dur = secs_per_effort * run.length.sqrt();
                    last_point = *run.pts.last().unwrap();
                    Phase::Move {
                        run,
                        start: t,
                        dur,
                        pen_down,
                    }
                }
            };
            t = phase.end();
            phases.push(phase);
            if plan.stroke_last_item.contains(&idx) {
                stroke_ends.push((t, last_point));
            }
        }
        Self {
            phases,
            duration: t,
            stroke_ends,
        }
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn start_point(&self) -> P<T> {
        self.position(T::zero())
    }

    /// Pen position at `t` seconds; held at the ends outside `[0, duration]`.
    pub fn position(&self, t: T) -> P<T> {
        let idx = self.phases.partition_point(|p| p.end() < t);
        match self.phases.get(idx) {
            Some(phase) => phase.position(t.max(phase.start())),
            None => self.phases.last().unwrap().position(self.duration),
        }
    }

    /// Whether the pen is on the writing surface at `t` (false in dwells and transits).
    pub fn pen_down(&self, t: T) -> bool {
        let idx = self.phases.partition_point(|p| p.end() < t);
        matches!(
            self.phases.get(idx),
            Some(Phase::Move { pen_down: true, .. })
        )
    }

    /// Time and position at which each stroke finishes.
    pub fn stroke_ends(&self) -> &[(T, P<T>)] {
        &self.stroke_ends
    }
}
