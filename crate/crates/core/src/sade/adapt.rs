//! Strategy selection and self-adaptation of strategy probabilities and
//! crossover rates from a sliding window of recent generations.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::strategy::{Strategy, POOL_SIZE};

/// Outcome counts for one generation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub successes: [u32; POOL_SIZE],
    pub failures: [u32; POOL_SIZE],
    /// CR values of successful trials that went through binomial crossover.
    pub successful_cr: [Vec<f64>; POOL_SIZE],
}

impl GenerationRecord {
    pub fn record(&mut self, strategy: Strategy, success: bool, cr: Option<f64>) {
        let s = strategy.index();
        if success {
            self.successes[s] += 1;
            if let Some(cr) = cr {
                self.successful_cr[s].push(cr);
            }
        } else {
            self.failures[s] += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyState {
    pub probabilities: [f64; POOL_SIZE],
    pub cr_median: [f64; POOL_SIZE],
    learning_period: usize,
    epsilon: f64,
    generations_seen: usize,
    memory: VecDeque<GenerationRecord>,
}

impl StrategyState {
    pub fn new(learning_period: usize, cr_init: f64, epsilon: f64) -> Self {
        Self {
            probabilities: [1.0 / POOL_SIZE as f64; POOL_SIZE],
            cr_median: [cr_init; POOL_SIZE],
            learning_period: learning_period.max(1),
            epsilon,
            generations_seen: 0,
            memory: VecDeque::with_capacity(learning_period + 1),
        }
    }

    pub fn generations_seen(&self) -> usize {
        self.generations_seen
    }

    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    /// Pushes one generation into the window. Once `learning_period`
    /// generations have been seen, probabilities become
    /// `S_k / sum(S)` with `S_k = ns_k / (ns_k + nf_k) + epsilon` (the ratio is
    /// 0 when strategy `k` had no trials), and `CRm_k` becomes the median of
    /// the successful CRs in the window when there are any.
    pub fn update(&mut self, record: GenerationRecord) {
        self.memory.push_back(record);
        while self.memory.len() > self.learning_period {
            self.memory.pop_front();
        }
        self.generations_seen += 1;
        if self.generations_seen < self.learning_period {
            return;
        }

        let mut rates = [0.0; POOL_SIZE];
        for (s, rate) in rates.iter_mut().enumerate() {
            let ns: u64 = self.memory.iter().map(|r| r.successes[s] as u64).sum();
            let nf: u64 = self.memory.iter().map(|r| r.failures[s] as u64).sum();
            let ratio = if ns + nf == 0 {
                0.0
            } else {
                ns as f64 / (ns + nf) as f64
            };
            *rate = ratio + self.epsilon;
        }
        let total: f64 = rates.iter().sum();
        for (p, r) in self.probabilities.iter_mut().zip(rates) {
            *p = r / total;
        }

        for s in 0..POOL_SIZE {
            let mut crs: Vec<f64> = self
                .memory
                .iter()
                .flat_map(|r| r.successful_cr[s].iter().copied())
                .collect();
            if let Some(m) = median(&mut crs) {
                self.cr_median[s] = m;
            }
        }
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Stochastic universal sampling: `n` equally spaced pointers at
/// `(u + j) / n` over the cumulative distribution. Returns per-strategy counts.
pub fn sus_counts(probabilities: &[f64; POOL_SIZE], n: usize, u: f64) -> [usize; POOL_SIZE] {
    let total: f64 = probabilities.iter().sum();
    let mut counts = [0usize; POOL_SIZE];
    let mut cum = probabilities[0] / total;
    let mut s = 0;
    for j in 0..n {
        let pointer = (u + j as f64) / n as f64;
        while pointer >= cum && s < POOL_SIZE - 1 {
            s += 1;
            cum += probabilities[s] / total;
        }
        counts[s] += 1;
    }
    counts
}

/// Draws `n` strategies with one SUS spin, then shuffles them so the
/// assignment to candidates is random.
pub fn select_strategies<R: Rng + ?Sized>(
    probabilities: &[f64; POOL_SIZE],
    n: usize,
    rng: &mut R,
) -> Vec<Strategy> {
    let u: f64 = rng.random();
    let counts = sus_counts(probabilities, n, u);
    let mut out = Vec::with_capacity(n);
    for (s, &c) in Strategy::ALL.iter().zip(&counts) {
        out.extend(std::iter::repeat_n(*s, c));
    }
    out.shuffle(rng);
    out
}

pub fn select_strategy<R: Rng + ?Sized>(state: &StrategyState, rng: &mut R) -> Strategy {
    select_strategies(&state.probabilities, 1, rng)[0]
}
