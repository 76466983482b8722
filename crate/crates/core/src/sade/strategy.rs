//! Mutation strategies and binomial crossover.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// The four-member strategy pool, in pool order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "rand/1")]
    Rand1,
    #[serde(rename = "rand-to-best/2")]
    RandToBest2,
    #[serde(rename = "rand/2")]
    Rand2,
    #[serde(rename = "current-to-rand/1")]
    CurrentToRand1,
}

pub const POOL_SIZE: usize = 4;

impl Strategy {
    pub const ALL: [Strategy; POOL_SIZE] = [
        Strategy::Rand1,
        Strategy::RandToBest2,
        Strategy::Rand2,
        Strategy::CurrentToRand1,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rand1 => "rand/1",
            Strategy::RandToBest2 => "rand-to-best/2",
            Strategy::Rand2 => "rand/2",
            Strategy::CurrentToRand1 => "current-to-rand/1",
        }
    }

    /// Column-friendly identifier (`rand1`, `rand_to_best2`, ...).
    pub fn slug(self) -> &'static str {
        match self {
            Strategy::Rand1 => "rand1",
            Strategy::RandToBest2 => "rand_to_best2",
            Strategy::Rand2 => "rand2",
            Strategy::CurrentToRand1 => "current_to_rand1",
        }
    }

    /// Whether trials from this strategy go through binomial crossover.
    /// current-to-rand/1 recombines arithmetically instead.
    #[inline]
    pub fn uses_crossover(self) -> bool {
        self != Strategy::CurrentToRand1
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Builds the mutant for candidate `i`.
///
/// `r` holds five distinct population indices, none equal to `i`; strategies
/// use a prefix of it. `f` scales difference vectors and `f_rec` is the
/// arithmetic recombination coefficient of current-to-rand/1.
pub fn mutate(
    strategy: Strategy,
    population: &[Vec<f64>],
    i: usize,
    best: &[f64],
    r: &[usize; 5],
    f: f64,
    f_rec: f64,
) -> Vec<f64> {
    let x = &population[i];
    let [a, b, c, d, e] = r.map(|j| &population[j]);
    (0..x.len())
        .map(|k| match strategy {
            Strategy::Rand1 => a[k] + f * (b[k] - c[k]),
            Strategy::RandToBest2 => {
                x[k] + f * (best[k] - x[k]) + f * (a[k] - b[k]) + f * (c[k] - d[k])
            }
            Strategy::Rand2 => a[k] + f * (b[k] - c[k]) + f * (d[k] - e[k]),
            Strategy::CurrentToRand1 => x[k] + f_rec * (a[k] - x[k]) + f * (b[k] - c[k]),
        })
        .collect()
}

/// Binomial crossover. Component `k` comes from `trial` when a fresh coin is
/// below `cr` or `k == k_rand`, otherwise from `target`. One coin is drawn per
/// component.
pub fn crossover<R: Rng + ?Sized>(
    trial: &[f64],
    target: &[f64],
    cr: f64,
    k_rand: usize,
    rng: &mut R,
) -> Vec<f64> {
    trial
        .iter()
        .zip(target)
        .enumerate()
        .map(|(k, (&t, &x))| {
            let coin: f64 = rng.random();
            if coin < cr || k == k_rand {
                t
            } else {
                x
            }
        })
        .collect()
}

/// Crossover step as the search loop applies it: skipped for strategies that
/// do not use binomial crossover.
pub fn recombine<R: Rng + ?Sized>(
    strategy: Strategy,
    mutant: Vec<f64>,
    target: &[f64],
    cr: f64,
    k_rand: usize,
    rng: &mut R,
) -> Vec<f64> {
    if strategy.uses_crossover() {
        crossover(&mutant, target, cr, k_rand, rng)
    } else {
        mutant
    }
}
