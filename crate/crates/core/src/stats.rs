//! Parameter-recovery error and run statistics.

use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};

/// Root-mean-square error between estimate and truth, normalized by the
/// range of the true vector, in percent.
pub fn nrmse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(CamError::LengthMismatch(estimate.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(CamError::ConstantTruth);
    }
    let max = truth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range <= 0.0 {
        return Err(CamError::ConstantTruth);
    }
    let mse = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(100.0 * mse.sqrt() / range)
}

/// Best (minimum), mean, sample standard deviation and maximum of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub best: f64,
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
}

impl Summary {
    /// `None` for an empty sample. SD is 0 for a single value.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            count: n,
            best: values.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            sd,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}
