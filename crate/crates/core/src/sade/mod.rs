//! Self-adaptive differential evolution over the probability simplex.
//!
//! Each generation one SUS spin assigns a strategy from the pool to every
//! candidate. For each candidate, a crossover index, five distinct partners,
//! `F`, the recombination coefficient and `CR` are drawn, the mutant is
//! recombined with the target, repaired onto the simplex (clamp, then divide
//! by the sum), evaluated, and kept if it is no worse than the target.
//! Constraint violations are counted per strategy before repair. After the
//! generation, strategy probabilities and per-strategy `CR` medians adapt
//! from a sliding window of successes and failures.
//!
//! With [`Replacement::Immediate`] (the default) an accepted trial enters the
//! population at once. [`Replacement::Generational`] builds every trial of a
//! generation first and evaluates them in parallel. Either way, all random
//! draws come from one sequential stream, so runs are reproducible from the
//! seed.

pub mod adapt;
pub mod repair;
pub mod strategy;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};
use crate::metric::WeightScheme;
use crate::neighborhood::NeighborhoodSpec;
use crate::objective::Objective;
use crate::rule::RuleParams;
use crate::scenario::ObservedDataset;
use crate::seed::{self, CamRng};

pub use adapt::{select_strategies, select_strategy, sus_counts, GenerationRecord, StrategyState};
pub use repair::repair;
pub use strategy::{crossover, mutate, recombine, Strategy, POOL_SIZE};

/// Search settings. Defaults follow the standard SaDE recommendations:
/// `NP = 100`, `LP = 50`, 500 generations, `F ~ N(0.5, 0.3)`, `CRm = 0.5`
/// with spread 0.1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SadeConfig {
    pub population: usize,
    pub learning_period: usize,
    pub generations: usize,
    pub f_mean: f64,
    /// Standard deviation of `F`.
    pub f_spread: f64,
    pub cr_init: f64,
    pub cr_spread: f64,
    /// Floor added to every strategy's success rate.
    pub epsilon: f64,
    pub weighting: WeightScheme,
    pub replacement: Replacement,
    pub seed: u64,
}

/// When accepted trials enter the population.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Replacement {
    /// Each trial is built, evaluated and selected before the next candidate
    /// is processed, so later candidates in a generation see earlier
    /// replacements and the updated best.
    #[default]
    Immediate,
    /// All trials of a generation are built from the same population, then
    /// evaluated in parallel, then selected.
    Generational,
}

impl Default for SadeConfig {
    fn default() -> Self {
        Self {
            population: 100,
            learning_period: 50,
            generations: 500,
            f_mean: 0.5,
            f_spread: 0.3,
            cr_init: 0.5,
            cr_spread: 0.1,
            epsilon: 0.01,
            weighting: WeightScheme::Centered,
            replacement: Replacement::Immediate,
            seed: 0,
        }
    }
}

impl SadeConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CamError::InvalidConfig(msg));
        if self.population < 6 {
            return bad(format!(
                "population {} is too small: five distinct partners besides the target are required",
                self.population
            ));
        }
        if self.learning_period == 0 {
            return bad("learning period must be at least 1".into());
        }
        if self.generations == 0 {
            return bad("generations must be at least 1".into());
        }
        if !(self.f_mean.is_finite() && self.f_spread.is_finite() && self.f_spread >= 0.0) {
            return bad("F distribution parameters must be finite, spread >= 0".into());
        }
        if !(self.f_mean > 0.0 && self.f_mean <= 2.0) && self.f_spread == 0.0 {
            return bad("F mean must lie in (0, 2] when the spread is zero".into());
        }
        if !(0.0..=1.0).contains(&self.cr_init) {
            return bad(format!("initial CR {} is outside [0, 1]", self.cr_init));
        }
        if !(self.cr_spread.is_finite() && self.cr_spread >= 0.0) {
            return bad("CR spread must be finite and >= 0".into());
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SadeRunResult {
    pub best_theta: RuleParams,
    pub best_fitness: f64,
    /// Best-so-far objective after each generation.
    pub fitness_trace: Vec<f64>,
    /// Strategy probabilities used to draw each generation.
    pub strategy_prob_trace: Vec<[f64; POOL_SIZE]>,
    /// Per-strategy share of trials that violated the simplex before repair.
    /// 0 for a strategy with no trials in that generation.
    pub cvr_trace: Vec<[f64; POOL_SIZE]>,
    /// Number of trials per strategy in each generation.
    pub trial_trace: Vec<[u32; POOL_SIZE]>,
    pub evaluations: u64,
    pub seed: u64,
}

/// Draws from `N(mean, sd)` until the value lands in `[lo, hi]` (open at `lo`
/// when `open_lo`). Falls back to clamping after a fixed number of attempts,
/// which only matters for pathological configurations.
fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
    open_lo: bool,
) -> f64 {
    let inside = |v: f64| (if open_lo { v > lo } else { v >= lo }) && v <= hi;
    if sd == 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, sd).expect("finite normal parameters");
    for _ in 0..1000 {
        let v = normal.sample(rng);
        if inside(v) {
            return v;
        }
    }
    let v = mean.clamp(lo, hi);
    if inside(v) {
        v
    } else {
        f64::EPSILON.max(lo)
    }
}

/// A trial built before evaluation.
struct Trial {
    strategy: Strategy,
    cr: Option<f64>,
    vector: Vec<f64>,
    infeasible: bool,
}

/// Stepwise driver for one search run.
pub struct SadeEngine<'a> {
    objective: &'a Objective,
    spec: NeighborhoodSpec,
    cfg: SadeConfig,
    rng: CamRng,
    population: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    best_vector: Vec<f64>,
    best_fitness: f64,
    state: StrategyState,
    evaluations: u64,
    fitness_trace: Vec<f64>,
    strategy_prob_trace: Vec<[f64; POOL_SIZE]>,
    cvr_trace: Vec<[f64; POOL_SIZE]>,
    trial_trace: Vec<[u32; POOL_SIZE]>,
}

impl<'a> SadeEngine<'a> {
    /// Validates the configuration and evaluates an initial population of
    /// uniform random vectors repaired onto the simplex.
    pub fn new(objective: &'a Objective, spec: NeighborhoodSpec, cfg: SadeConfig) -> Result<Self> {
        cfg.validate()?;
        if objective.dim() != spec.size() {
            return Err(CamError::WeightCount {
                expected: spec.size(),
                got: objective.dim(),
            });
        }
        let k = spec.size();
        let mut rng = seed::rng(cfg.seed);
        let population: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                repair(&raw).0
            })
            .collect();
        let fitness: Vec<f64> = population.par_iter().map(|p| objective.eval(p)).collect();
        let best = argmin(&fitness);
        let state = StrategyState::new(cfg.learning_period, cfg.cr_init, cfg.epsilon);
        Ok(Self {
            objective,
            spec,
            rng,
            best_vector: population[best].clone(),
            best_fitness: fitness[best],
            evaluations: cfg.population as u64,
            population,
            fitness,
            state,
            fitness_trace: Vec::with_capacity(cfg.generations),
            strategy_prob_trace: Vec::with_capacity(cfg.generations),
            cvr_trace: Vec::with_capacity(cfg.generations),
            trial_trace: Vec::with_capacity(cfg.generations),
            cfg,
        })
    }

    pub fn population(&self) -> &[Vec<f64>] {
        &self.population
    }

    pub fn population_fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn state(&self) -> &StrategyState {
        &self.state
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_fitness
    }

    pub fn generation(&self) -> usize {
        self.fitness_trace.len()
    }

    fn draw_f(&mut self) -> f64 {
        truncated_normal(
            &mut self.rng,
            self.cfg.f_mean,
            self.cfg.f_spread,
            0.0,
            2.0,
            true,
        )
    }

    fn build_trial(&mut self, i: usize, strategy: Strategy) -> Trial {
        let np = self.cfg.population;
        let k = self.spec.size();
        let k_rand = self.rng.random_range(0..k);
        let mut partners = [0usize; 5];
        for (slot, j) in partners
            .iter_mut()
            .zip(index::sample(&mut self.rng, np - 1, 5))
        {
            *slot = if j >= i { j + 1 } else { j };
        }
        let f = self.draw_f();
        let f_rec = if strategy == Strategy::CurrentToRand1 {
            self.rng.random::<f64>()
        } else {
            0.0
        };
        let cr = strategy.uses_crossover().then(|| {
            truncated_normal(
                &mut self.rng,
                self.state.cr_median[strategy.index()],
                self.cfg.cr_spread,
                0.0,
                1.0,
                false,
            )
        });
        let mutant = mutate(
            strategy,
            &self.population,
            i,
            &self.best_vector,
            &partners,
            f,
            f_rec,
        );
        let candidate = recombine(
            strategy,
            mutant,
            &self.population[i],
            cr.unwrap_or(1.0),
            k_rand,
            &mut self.rng,
        );
        let (vector, infeasible) = repair(&candidate);
        Trial {
            strategy,
            cr,
            vector,
            infeasible,
        }
    }

    /// Runs one generation.
    pub fn step(&mut self) {
        let np = self.cfg.population;
        let probabilities = self.state.probabilities;
        let strategies = select_strategies(&probabilities, np, &mut self.rng);

        let mut record = GenerationRecord::default();
        let mut counts = [0u32; POOL_SIZE];
        let mut violations = [0u32; POOL_SIZE];
        let mut tally = |trial: &Trial, success: bool| {
            let s = trial.strategy.index();
            counts[s] += 1;
            violations[s] += trial.infeasible as u32;
            record.record(trial.strategy, success, trial.cr);
        };

        match self.cfg.replacement {
            Replacement::Immediate => {
                for (i, &s) in strategies.iter().enumerate() {
                    let trial = self.build_trial(i, s);
                    let score = self.objective.eval(&trial.vector);
                    let success = self.select(i, &trial, score);
                    tally(&trial, success);
                    if success {
                        self.population[i] = trial.vector;
                    }
                }
            }
            Replacement::Generational => {
                let trials: Vec<Trial> = strategies
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| self.build_trial(i, s))
                    .collect();
                let objective = self.objective;
                let scores: Vec<f64> = trials
                    .par_iter()
                    .map(|t| objective.eval(&t.vector))
                    .collect();
                for (i, (trial, score)) in trials.into_iter().zip(scores).enumerate() {
                    let success = self.select(i, &trial, score);
                    tally(&trial, success);
                    if success {
                        self.population[i] = trial.vector;
                    }
                }
            }
        }
        self.evaluations += np as u64;

        let mut cvr = [0.0; POOL_SIZE];
        for s in 0..POOL_SIZE {
            if counts[s] > 0 {
                cvr[s] = violations[s] as f64 / counts[s] as f64;
            }
        }
        self.fitness_trace.push(self.best_fitness);
        self.strategy_prob_trace.push(probabilities);
        self.cvr_trace.push(cvr);
        self.trial_trace.push(counts);
        self.state.update(record);
    }

    /// Greedy `<=` selection of the trial for slot `i`. Updates fitness and
    /// the best-so-far; the caller moves the vector into the population.
    fn select(&mut self, i: usize, trial: &Trial, score: f64) -> bool {
        if score > self.fitness[i] {
            return false;
        }
        self.fitness[i] = score;
        if score < self.best_fitness {
            self.best_fitness = score;
            self.best_vector.clone_from(&trial.vector);
        }
        true
    }

    pub fn finish(self) -> SadeRunResult {
        SadeRunResult {
            best_theta: RuleParams::new(self.spec, self.best_vector)
                .expect("repaired vectors lie on the simplex"),
            best_fitness: self.best_fitness,
            fitness_trace: self.fitness_trace,
            strategy_prob_trace: self.strategy_prob_trace,
            cvr_trace: self.cvr_trace,
            trial_trace: self.trial_trace,
            evaluations: self.evaluations,
            seed: self.cfg.seed,
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Runs the search against a prebuilt objective.
pub fn run_objective(
    objective: &Objective,
    spec: NeighborhoodSpec,
    cfg: &SadeConfig,
) -> Result<SadeRunResult> {
    let mut engine = SadeEngine::new(objective, spec, cfg.clone())?;
    for _ in 0..cfg.generations {
        engine.step();
    }
    Ok(engine.finish())
}

/// Identifies the rule weights of `data` under its own neighborhood spec.
pub fn run(data: &ObservedDataset, cfg: &SadeConfig) -> Result<SadeRunResult> {
    let objective = Objective::from_dataset(data, cfg.weighting)?;
    run_objective(&objective, *data.neighborhood(), cfg)
}
