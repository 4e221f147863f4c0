//! Lowercase stroke fixtures in a unit box.
//!
//! x is left to right, y is bottom to top. Baseline sits at 0.3, the x-height
//! line at 0.65, ascenders reach 1.0 and descenders 0.0.

use std::collections::BTreeMap;

use crate::classifier::Letter;
use crate::scalar::Scalar;

use super::StrokePath;

const BASE: f64 = 0.3;
const MID: f64 = 0.65;
const TOP: f64 = 1.0;
const DESC: f64 = 0.0;
const BOWL: (f64, f64) = (0.48, 0.475);
const BOWL_R: (f64, f64) = (0.17, 0.175);

type P = [f64; 2];

/// Elliptic arc from `from_deg` to `to_deg` (counter-clockwise when increasing),
/// roughly one vertex per 15 degrees.
fn arc(c: (f64, f64), r: (f64, f64), from_deg: f64, to_deg: f64) -> Vec<P> {
    let n = (((to_deg - from_deg).abs() / 15.0).ceil() as usize).max(2);
    (0..=n)
        .map(|k| {
            let a = (from_deg + (to_deg - from_deg) * k as f64 / n as f64).to_radians();
            [c.0 + r.0 * a.cos(), c.1 + r.1 * a.sin()]
        })
        .collect()
}

fn then(mut a: Vec<P>, rest: &[P]) -> Vec<P> {
    a.extend_from_slice(rest);
    a
}

fn bowl_ccw() -> Vec<P> {
    arc(BOWL, BOWL_R, 40.0, 400.0)
}

fn stroke_defs(c: char) -> Option<Vec<Vec<P>>> {
    let right = BOWL.0 + BOWL_R.0;
    let left = BOWL.0 - BOWL_R.0;
    let s = match c {
        'a' => vec![then(bowl_ccw(), &[[right, MID], [right, BASE]])],
        'b' => vec![then(
            vec![[left, TOP], [left, BASE], [left, 0.5]],
            &arc(BOWL, BOWL_R, 160.0, -180.0),
        )],
        'c' => vec![arc((0.5, BOWL.1), BOWL_R, 45.0, 315.0)],
        'd' => vec![then(bowl_ccw(), &[[right, TOP], [right, BASE]])],
        'e' => vec![then(vec![[left, BOWL.1]], &arc(BOWL, BOWL_R, 0.0, 320.0))],
        'f' => vec![
            then(arc((0.55, 0.88), (0.12, 0.1), 20.0, 180.0), &[[0.43, BASE]]),
            vec![[0.3, MID], [0.6, MID]],
        ],
        'g' => vec![then(
            bowl_ccw(),
            &then(
                vec![[right, MID], [right, 0.1]],
                &arc((0.49, 0.1), (0.16, 0.1), 0.0, -160.0),
            ),
        )],
        'h' => vec![then(
            vec![[left, TOP], [left, BASE], [left, 0.5]],
            &then(
                arc((BOWL.0, 0.5), (BOWL_R.0, 0.15), 180.0, 0.0),
                &[[right, BASE]],
            ),
        )],
        'i' => vec![vec![[0.5, MID], [0.5, BASE]], vec![[0.5, 0.8], [0.5, 0.76]]],
        'j' => vec![
            then(
                vec![[0.55, MID], [0.55, 0.1]],
                &arc((0.42, 0.1), (0.13, 0.1), 0.0, -160.0),
            ),
            vec![[0.55, 0.8], [0.55, 0.76]],
        ],
        'k' => vec![
            vec![[0.33, TOP], [0.33, BASE]],
            vec![[0.65, MID], [0.33, 0.45], [0.66, BASE]],
        ],
        'l' => vec![vec![[0.5, TOP], [0.5, BASE]]],
        'm' => vec![then(
            vec![[0.25, MID], [0.25, BASE], [0.25, 0.55]],
            &then(
                then(
                    arc((0.36, 0.55), (0.11, 0.1), 180.0, 0.0),
                    &[[0.47, BASE], [0.47, 0.55]],
                ),
                &then(arc((0.58, 0.55), (0.11, 0.1), 180.0, 0.0), &[[0.69, BASE]]),
            ),
        )],
        'n' => vec![then(
            vec![[left, MID], [left, BASE], [left, 0.5]],
            &then(
                arc((BOWL.0, 0.5), (BOWL_R.0, 0.15), 180.0, 0.0),
                &[[right, BASE]],
            ),
        )],
        'o' => vec![arc((0.5, BOWL.1), BOWL_R, 90.0, 450.0)],
        'p' => vec![then(
            vec![[left, MID], [left, DESC], [left, 0.6]],
            &arc(BOWL, BOWL_R, 150.0, -180.0),
        )],
        'q' => vec![then(
            bowl_ccw(),
            &[[right, MID], [right, DESC], [0.75, 0.08]],
        )],
        'r' => vec![then(
            vec![[0.38, MID], [0.38, BASE], [0.38, 0.5]],
            &arc((0.52, 0.5), (0.14, 0.12), 180.0, 45.0),
        )],
        's' => vec![then(
            arc((0.5, 0.5625), (0.14, 0.0875), 30.0, 270.0),
            &arc((0.5, 0.3875), (0.14, 0.0875), 90.0, -150.0)[1..],
        )],
        't' => vec![
            vec![[0.45, 0.9], [0.45, 0.35], [0.5, BASE], [0.6, 0.32]],
            vec![[0.32, MID], [0.6, MID]],
        ],
        'u' => vec![then(
            vec![[left, MID], [left, 0.42]],
            &then(
                arc((BOWL.0, 0.42), (BOWL_R.0, 0.12), 180.0, 360.0)[1..].to_vec(),
                &[[right, MID], [right, BASE]],
            ),
        )],
        'v' => vec![vec![[0.3, MID], [0.5, BASE], [0.7, MID]]],
        'w' => vec![vec![
            [0.22, MID],
            [0.35, BASE],
            [0.5, 0.55],
            [0.65, BASE],
            [0.78, MID],
        ]],
        'x' => vec![vec![[0.3, MID], [0.7, BASE]], vec![[0.7, MID], [0.3, BASE]]],
        'y' => vec![
            vec![[0.3, MID], [0.5, BASE]],
            vec![[0.7, MID], [0.38, DESC]],
        ],
        'z' => vec![vec![[0.3, MID], [0.7, MID], [0.3, BASE], [0.7, BASE]]],
        _ => return None,
    };
    Some(s)
}

pub(super) fn path_for<T: Scalar>(letter: Letter, pen_up_dwell_ms: f64) -> Option<StrokePath<T>> {
    let strokes = stroke_defs(letter.as_char())?
        .into_iter()
        .map(|pl| {
            pl.into_iter()
                .map(|[x, y]| [T::lit(x), T::lit(y)])
                .collect()
        })
        .collect();
    Some(StrokePath {
        letter,
        strokes,
        pen_up_dwell_ms,
    })
}

pub(super) fn all<T: Scalar>(pen_up_dwell_ms: f64) -> BTreeMap<Letter, StrokePath<T>> {
    ('a'..='z')
        .map(Letter::new)
        .filter_map(|l| path_for(l, pen_up_dwell_ms).map(|p| (l, p)))
        .collect()
}
