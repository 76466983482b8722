//! The identification objective
//!
//! `J(theta) = sum_{t=0}^{T-1} d_m(x_obs(t+1), f_theta(x_obs(t)))`
//!
//! with one-step predictions taken from the observed state at every step
//! (teacher forcing). The neighborhood vectors of every observed cell are
//! gathered once so each evaluation is a streaming weighted L1 of dot
//! products.

use crate::error::{CamError, Result};
use crate::lattice::Configuration;
use crate::metric::WeightScheme;
use crate::neighborhood::NeighborhoodSpec;
use crate::rule::{convex_sum, stencil_indices};
use crate::scenario::ObservedDataset;

#[derive(Clone, Debug)]
pub struct Objective {
    k: usize,
    steps: usize,
    cells: usize,
    weights: Vec<f64>,
    /// `x_obs(t+1)`, step-major then row-major.
    targets: Vec<f64>,
    /// `N_i(t)` rows of length `k`, same order as `targets`.
    features: Vec<f64>,
}

impl Objective {
    pub fn new(
        observed: &[Configuration],
        spec: &NeighborhoodSpec,
        weighting: WeightScheme,
    ) -> Result<Self> {
        let first = observed.first().ok_or(CamError::EmptyTrajectory)?;
        if observed.len() < 2 {
            return Err(CamError::InvalidConfig(
                "identification needs at least two observed configurations".into(),
            ));
        }
        for c in &observed[1..] {
            first.check_same_shape(c)?;
        }
        let (h, w) = first.shape();
        let k = spec.size();
        let steps = observed.len() - 1;
        let cells = h * w;
        let idx = stencil_indices(h, w, spec);

        let mut targets = Vec::with_capacity(steps * cells);
        let mut features = Vec::with_capacity(steps * cells * k);
        for t in 0..steps {
            let src = observed[t].cells();
            features.extend(idx.iter().map(|&j| src[j]));
            targets.extend_from_slice(observed[t + 1].cells());
        }
        Ok(Self {
            k,
            steps,
            cells,
            weights: weighting.weights(h, w),
            targets,
            features,
        })
    }

    pub fn from_dataset(data: &ObservedDataset, weighting: WeightScheme) -> Result<Self> {
        Self::new(&data.observed, data.neighborhood(), weighting)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn check_len(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.k {
            return Err(CamError::WeightCount {
                expected: self.k,
                got: theta.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<f64> {
        self.check_len(theta)?;
        Ok(self.eval(theta))
    }

    /// Caller guarantees `theta.len() == self.dim()`.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.k);
        let k = self.k;
        let mut total = 0.0;
        for t in 0..self.steps {
            let base = t * self.cells;
            let targets = &self.targets[base..base + self.cells];
            let feats = &self.features[base * k..(base + self.cells) * k];
            let mut step = 0.0;
            for ((row, &y), &w) in feats.chunks_exact(k).zip(targets).zip(&self.weights) {
                let pred = convex_sum(theta, row.iter().copied()).clamp(0.0, 1.0);
                step += w * (y - pred).abs();
            }
            total += step;
        }
        total
    }

    /// Objective value and one subgradient. The subgradient of `|.|` at 0
    /// is taken as 0.
    pub fn value_and_subgradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_len(theta)?;
        let k = self.k;
        let mut grad = vec![0.0; k];
        let mut total = 0.0;
        for t in 0..self.steps {
            let base = t * self.cells;
            let targets = &self.targets[base..base + self.cells];
            let feats = &self.features[base * k..(base + self.cells) * k];
            let mut step = 0.0;
            for ((row, &y), &w) in feats.chunks_exact(k).zip(targets).zip(&self.weights) {
                let pred = convex_sum(theta, row.iter().copied()).clamp(0.0, 1.0);
                let resid = y - pred;
                step += w * resid.abs();
                if resid != 0.0 {
                    let s = -w * resid.signum();
                    for (g, &n) in grad.iter_mut().zip(row) {
                        *g += s * n;
                    }
                }
            }
            total += step;
        }
        Ok((total, grad))
    }
}

/// One-shot evaluation of the identification objective.
pub fn fitness(theta: &[f64], data: &ObservedDataset, weighting: WeightScheme) -> Result<f64> {
    Objective::from_dataset(data, weighting)?.evaluate(theta)
}
