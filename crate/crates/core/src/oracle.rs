//! Reference solver for the identification objective.
//!
//! The objective is a weighted sum of absolute residuals of a linear
//! predictor, hence convex in the weights, and the feasible set is the
//! probability simplex. Projected subgradient descent therefore reaches the
//! global minimum, which makes it an independent check on the evolutionary
//! search.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::objective::Objective;

/// A convex function that can report a subgradient.
pub trait SubgradientObjective {
    fn dim(&self) -> usize;
    fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl SubgradientObjective for Objective {
    fn dim(&self) -> usize {
        Objective::dim(self)
    }

    fn value_and_subgradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Objective::value_and_subgradient(self, x)
    }
}

/// Euclidean projection onto `{x >= 0, sum x = 1}` by the sort-and-threshold
/// construction: find the largest `rho` with `u_rho > (sum_{j<=rho} u_j - 1) / rho`
/// over the descending sort `u`, then shift and clip.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub max_iter: usize,
    /// Absolute objective improvement below which a window counts as stalled;
    /// also the smallest step scale tried.
    pub tol: f64,
    /// Initial step scale `c` in `c / sqrt(j)`.
    pub step: f64,
    /// Iterations per stall check.
    pub window: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            tol: 1e-12,
            step: 0.25,
            window: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` over the simplex, starting from the barycenter.
///
/// Steps move `c / sqrt(j)` along the normalized negative subgradient, followed
/// by projection. Every `window` iterations the best value is compared with
/// the previous check; if it improved by less than `tol`, the scale `c` is
/// halved and the iteration counter `j` restarts from the best point. The
/// run has converged once a stall happens with `c <= tol`, or when a zero
/// subgradient certifies optimality.
pub fn minimize<F: SubgradientObjective + ?Sized>(
    f: &F,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    let k = f.dim();
    let mut theta = vec![1.0 / k as f64; k];
    let (mut best_val, _) = f.value_and_subgradient(&theta)?;
    let mut best = theta.clone();
    let mut checkpoint = best_val;
    let mut c = cfg.step;
    let mut j = 1usize;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let (val, grad) = f.value_and_subgradient(&theta)?;
        if val < best_val {
            best_val = val;
            best.clone_from(&theta);
        }
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            converged = true;
            break;
        }
        let scale = c / (j as f64).sqrt() / norm;
        let stepped: Vec<f64> = theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| t - scale * g)
            .collect();
        theta = simplex_project(&stepped);
        j += 1;

        if iterations % cfg.window.max(1) == 0 {
            if checkpoint - best_val < cfg.tol {
                if c <= cfg.tol {
                    converged = true;
                    break;
                }
                c *= 0.5;
                j = 1;
                theta.clone_from(&best);
            }
            checkpoint = best_val;
        }
    }

    // Final iterate may beat the recorded best.
    let (val, _) = f.value_and_subgradient(&theta)?;
    if val < best_val {
        best_val = val;
        best = theta;
    }
    Ok(OracleResult {
        theta: best,
        objective: best_val,
        iterations,
        converged,
    })
}

/// Oracle solution of the identification objective.
pub fn solve_projected_subgradient(
    objective: &Objective,
    cfg: &OracleConfig,
) -> Result<OracleResult> {
    minimize(objective, cfg)
}
