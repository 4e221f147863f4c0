use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// DTW knobs. The default is unconstrained warping.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtwOptions {
    /// Sakoe-Chiba band radius as a fraction of the longer sequence.
    #[serde(default)]
    pub band: Option<f64>,
}

impl DtwOptions {
    pub fn validate(&self) -> Result<()> {
        match self.band {
            Some(b) if !(b > 0.0 && b <= 1.0) => Err(Error::Config(format!(
                "dtw band must be in (0, 1], got {b}"
            ))),
            _ => Ok(()),
        }
    }

    fn radius(&self, n: usize, m: usize) -> usize {
        match self.band {
            None => n.max(m),
            // Never narrower than the length difference, or no path exists.
            Some(frac) => ((frac * n.max(m) as f64).ceil() as usize).max(n.abs_diff(m)),
        }
    }
}

/// Unconstrained DTW with local cost `|a_i - b_j|`, both endpoints matched.
pub fn dtw_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    dtw_distance_with(a, b, &DtwOptions::default())
}

pub fn dtw_distance_with<T: Scalar>(a: &[T], b: &[T], opts: &DtwOptions) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (n, m) = (a.len(), b.len());
    let radius = opts.radius(n, m);
    let inf = T::infinity();

    // Two rolling rows over b, index 0 is the virtual boundary column.
    let mut prev = vec![inf; m + 1];
    let mut curr = vec![inf; m + 1];
    prev[0] = T::zero();
    for i in 1..=n {
        curr.fill(inf);
        // Band centred on the diagonal scaled to the aspect ratio.
        let centre = (i * m) / n;
        let lo = centre.saturating_sub(radius).max(1);
        let hi = (centre + radius).min(m);
        let ai = a[i - 1];
        for j in lo..=hi {
            let cost = (ai - b[j - 1]).abs();
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = cost + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}
