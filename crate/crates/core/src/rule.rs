//! The convex-combination local rule and its synchronous application.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};
use crate::lattice::Configuration;
use crate::neighborhood::NeighborhoodSpec;

/// Tolerance on `sum(weights) == 1` accepted at construction.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Weights on the probability simplex, one per neighborhood offset in
/// [`NeighborhoodSpec::offsets`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct RuleParams {
    spec: NeighborhoodSpec,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawRule {
    spec: NeighborhoodSpec,
    weights: Vec<f64>,
}

impl TryFrom<RawRule> for RuleParams {
    type Error = CamError;

    fn try_from(raw: RawRule) -> Result<Self> {
        RuleParams::new(raw.spec, raw.weights)
    }
}

impl From<RuleParams> for RawRule {
    fn from(r: RuleParams) -> Self {
        RawRule {
            spec: r.spec,
            weights: r.weights,
        }
    }
}

impl RuleParams {
    pub fn new(spec: NeighborhoodSpec, weights: Vec<f64>) -> Result<Self> {
        check_simplex(spec.size(), &weights)?;
        Ok(Self { spec, weights })
    }

    /// All mass on the `(0, 0)` offset.
    pub fn identity(spec: NeighborhoodSpec) -> Self {
        let weights = spec
            .offsets()
            .iter()
            .map(|&o| if o == (0, 0) { 1.0 } else { 0.0 })
            .collect();
        Self { spec, weights }
    }

    pub fn uniform(spec: NeighborhoodSpec) -> Self {
        let k = spec.size();
        Self {
            spec,
            weights: vec![1.0 / k as f64; k],
        }
    }

    #[inline]
    pub fn spec(&self) -> &NeighborhoodSpec {
        &self.spec
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Checks length, per-component bounds and the unit sum.
pub fn check_simplex(k: usize, weights: &[f64]) -> Result<()> {
    if weights.len() != k {
        return Err(CamError::WeightCount {
            expected: k,
            got: weights.len(),
        });
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(CamError::WeightOutOfRange { index, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(CamError::NotOnSimplex { sum });
    }
    Ok(())
}

/// Neighborhood state vector `N_i` of the cell at `(row, col)`, in offset
/// order, wrapping toroidally at the lattice edges.
pub fn gather_neighborhood(
    cfg: &Configuration,
    (row, col): (usize, usize),
    spec: &NeighborhoodSpec,
) -> Vec<f64> {
    assert!(
        row < cfg.height() && col < cfg.width(),
        "cell out of bounds"
    );
    spec.offsets()
        .iter()
        .map(|&(dy, dx)| cfg.get_wrapped(row as isize + dy, col as isize + dx))
        .collect()
}

/// Flat cell indices of every neighborhood, `K` per cell, cells row-major.
///
/// Shared by [`apply_rule`] and the fitness precomputation so both visit
/// neighbors in the same order.
pub(crate) fn stencil_indices(height: usize, width: usize, spec: &NeighborhoodSpec) -> Vec<usize> {
    let offsets = spec.offsets();
    let mut idx = Vec::with_capacity(height * width * offsets.len());
    for r in 0..height {
        for c in 0..width {
            for &(dy, dx) in &offsets {
                let rr = (r as isize + dy).rem_euclid(height as isize) as usize;
                let cc = (c as isize + dx).rem_euclid(width as isize) as usize;
                idx.push(rr * width + cc);
            }
        }
    }
    idx
}

/// Dot product accumulated in offset order, starting from `0.0`.
#[inline]
pub(crate) fn convex_sum(weights: &[f64], states: impl Iterator<Item = f64>) -> f64 {
    let mut acc = 0.0;
    for (w, s) in weights.iter().zip(states) {
        acc += w * s;
    }
    acc
}

/// One synchronous step: every output cell is the weighted sum of its
/// neighborhood in the input configuration.
///
/// Rows are computed in parallel; each cell's sum is sequential in offset
/// order, so the result is bitwise independent of the schedule.
pub fn apply_rule(cfg: &Configuration, rule: &RuleParams) -> Configuration {
    let (h, w) = cfg.shape();
    let k = rule.len();
    let idx = stencil_indices(h, w, rule.spec());
    let src = cfg.cells();
    let weights = rule.weights();
    let mut out = vec![0.0; h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(r, row)| {
        for (c, cell) in row.iter_mut().enumerate() {
            let base = (r * w + c) * k;
            let nb = &idx[base..base + k];
            *cell = convex_sum(weights, nb.iter().map(|&j| src[j]));
        }
    });
    Configuration::from_clamped(h, w, out)
}

/// Trajectory `[x(0), ..., x(steps)]` under repeated application of `rule`.
pub fn evolve(cfg0: &Configuration, rule: &RuleParams, steps: usize) -> Vec<Configuration> {
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(cfg0.clone());
    for t in 0..steps {
        let next = apply_rule(&traj[t], rule);
        traj.push(next);
    }
    traj
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::lattice::BernoulliParam;

    fn manhattan1() -> NeighborhoodSpec {
        NeighborhoodSpec::manhattan(1).unwrap()
    }

    #[test]
    fn rule_validation() {
        let spec = manhattan1();
        assert!(RuleParams::new(spec, vec![0.2; 5]).is_ok());
        assert!(matches!(
            RuleParams::new(spec, vec![0.25; 4]),
            Err(CamError::WeightCount {
                expected: 5,
                got: 4
            })
        ));
        assert!(matches!(
            RuleParams::new(spec, vec![-0.1, 0.3, 0.3, 0.3, 0.2]),
            Err(CamError::WeightOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            RuleParams::new(spec, vec![0.3; 5]),
            Err(CamError::NotOnSimplex { .. })
        ));
        assert!(RuleParams::new(spec, vec![0.2, 0.2, 0.2, 0.2, 0.2 + 5e-10]).is_ok());
    }

    #[test]
    fn gather_uniform_and_impulse() {
        let spec = manhattan1();
        let cfg = Configuration::filled(4, 4, BernoulliParam::new(0.3).unwrap()).unwrap();
        assert_eq!(gather_neighborhood(&cfg, (0, 3), &spec), vec![0.3; 5]);

        let mut cells = vec![0.0; 9];
        cells[4] = 1.0;
        let cfg = Configuration::new(3, 3, cells).unwrap();
        assert_eq!(
            gather_neighborhood(&cfg, (1, 1), &spec),
            vec![0.0, 0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn gather_wraps_at_corner() {
        // 3x3 with values 0.1 * (3r + c); corner (0, 0) under Moore r=1.
        let cells: Vec<f64> = (0..9).map(|i| i as f64 / 10.0).collect();
        let cfg = Configuration::new(3, 3, cells).unwrap();
        let got = gather_neighborhood(&cfg, (0, 0), &NeighborhoodSpec::moore(1).unwrap());
        // Offsets (-1,-1) (-1,0) (-1,1) (0,-1) (0,0) (0,1) (1,-1) (1,0) (1,1)
        // land on (2,2) (2,0) (2,1) (0,2) (0,0) (0,1) (1,2) (1,0) (1,1).
        let expected = [8, 6, 7, 2, 0, 1, 5, 3, 4].map(|i| i as f64 / 10.0);
        assert_eq!(got, expected);
    }

    #[test]
    fn constant_and_identity() {
        let spec = NeighborhoodSpec::moore(2).unwrap();
        let c = Configuration::filled(6, 7, BernoulliParam::new(0.42).unwrap()).unwrap();
        let rule = RuleParams::new(spec, {
            let mut w: Vec<f64> = (1..=25).map(|i| i as f64).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        })
        .unwrap();
        let out = apply_rule(&c, &rule);
        for &v in out.cells() {
            assert!((v - 0.42).abs() < 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = Configuration::random(5, 5, &mut rng).unwrap();
        assert_eq!(apply_rule(&x, &RuleParams::identity(spec)), x);
        let traj = evolve(&x, &RuleParams::identity(spec), 3);
        assert_eq!(traj.len(), 4);
        assert!(traj.iter().all(|t| *t == x));
    }

    #[test]
    fn mean_stencil_matches_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Configuration::random(5, 5, &mut rng).unwrap();
        let out = apply_rule(&x, &RuleParams::new(manhattan1(), vec![0.2; 5]).unwrap());
        for r in 0..5isize {
            for c in 0..5isize {
                let stencil = [(r - 1, c), (r, c - 1), (r, c), (r, c + 1), (r + 1, c)];
                let expected: f64 = stencil
                    .iter()
                    .map(|&(a, b)| 0.2 * x.get_wrapped(a, b))
                    .sum();
                assert!((out.get(r as usize, c as usize) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn evolve_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Configuration::random(7, 6, &mut rng).unwrap();
        let rule = RuleParams::uniform(NeighborhoodSpec::moore(1).unwrap());
        let traj = evolve(&x, &rule, 2);
        assert_eq!(traj[2], apply_rule(&apply_rule(&x, &rule), &rule));
        let fixed = Configuration::filled(4, 4, BernoulliParam::new(0.5).unwrap()).unwrap();
        let traj = evolve(&fixed, &rule, 10);
        assert_eq!(traj.len(), 11);
        for t in &traj {
            assert!(t.cells().iter().all(|&v| (v - 0.5).abs() < 1e-15));
        }
    }
}
