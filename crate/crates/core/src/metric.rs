//! Distances between cell states and between whole configurations.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{BernoulliParam, Configuration};

/// Monge-Kantorovich distance between two Bernoulli measures on `{0, 1}`.
///
/// Transporting mass between the two atoms costs 1 per unit, so the optimal
/// plan moves exactly `|p - q|`.
#[inline]
pub fn d_mk(p: BernoulliParam, q: BernoulliParam) -> f64 {
    (p.get() - q.get()).abs()
}

/// Per-cell weights for the configuration metric.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    /// `2^-d` where `d` is the Chebyshev distance to the center cell
    /// `((H-1)/2, (W-1)/2)` (integer division).
    #[default]
    Centered,
    /// `1 / (H * W)` for every cell.
    Uniform,
}

impl WeightScheme {
    /// Row-major weight grid for an `height x width` lattice.
    pub fn weights(self, height: usize, width: usize) -> Vec<f64> {
        match self {
            WeightScheme::Uniform => vec![1.0 / (height * width) as f64; height * width],
            WeightScheme::Centered => {
                let (cr, cc) = ((height - 1) / 2, (width - 1) / 2);
                let mut w = Vec::with_capacity(height * width);
                for r in 0..height {
                    for c in 0..width {
                        let d = r.abs_diff(cr).max(c.abs_diff(cc));
                        w.push((-(d as f64)).exp2());
                    }
                }
                w
            }
        }
    }
}

/// Weighted sum of per-cell MK distances.
pub fn d_m(x: &Configuration, y: &Configuration, weighting: WeightScheme) -> Result<f64> {
    x.check_same_shape(y)?;
    let w = weighting.weights(x.height(), x.width());
    Ok(weighted_l1(&w, x.cells(), y.cells()))
}

/// `sum_i w_i |a_i - b_i|`, accumulated in index order.
#[inline]
pub(crate) fn weighted_l1(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((wi, ai), bi) in w.iter().zip(a).zip(b) {
        acc += wi * (ai - bi).abs();
    }
    acc
}
