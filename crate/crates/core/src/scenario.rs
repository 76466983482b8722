//! Identification scenarios: ground-truth rules, initial states, trajectories
//! and noisy observations.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CamError, Result};
use crate::lattice::Configuration;
use crate::neighborhood::{NeighborhoodSpec, Topology};
use crate::rule::{evolve, RuleParams};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaScheme {
    /// Independent uniform weights, normalized to sum 1.
    RandomUniform,
    /// `1 / (1 + d)` with `d` the topology's own distance, normalized.
    DistanceBased,
}

impl std::fmt::Display for ThetaScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ThetaScheme::RandomUniform => "random",
            ThetaScheme::DistanceBased => "distance",
        })
    }
}

fn default_side() -> usize {
    51
}

fn default_steps() -> usize {
    10
}

fn default_snr() -> Option<f64> {
    Some(40.0)
}

/// Everything needed to regenerate one observed dataset bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub topology: Topology,
    pub radius: usize,
    pub theta_scheme: ThetaScheme,
    #[serde(default = "default_side")]
    pub height: usize,
    #[serde(default = "default_side")]
    pub width: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// `None` means noiseless observations.
    #[serde(default = "default_snr")]
    pub snr_db: Option<f64>,
    /// Drives the truth weights and the observation noise.
    pub seed: u64,
    /// Drives the initial configuration; shared across a suite.
    pub init_seed: u64,
}

impl ScenarioSpec {
    /// A spec with the standard 51x51 lattice, 10 steps and 40 dB noise.
    pub fn standard(
        topology: Topology,
        radius: usize,
        theta_scheme: ThetaScheme,
        seed: u64,
        init_seed: u64,
    ) -> Self {
        Self {
            topology,
            radius,
            theta_scheme,
            height: default_side(),
            width: default_side(),
            steps: default_steps(),
            snr_db: default_snr(),
            seed,
            init_seed,
        }
    }

    pub fn neighborhood(&self) -> Result<NeighborhoodSpec> {
        NeighborhoodSpec::new(self.topology, self.radius)
    }

    pub fn validate(&self) -> Result<NeighborhoodSpec> {
        let nb = self.neighborhood()?;
        if self.steps == 0 {
            return Err(CamError::InvalidConfig("steps must be at least 1".into()));
        }
        let min_side = 2 * self.radius + 1;
        if self.height < min_side || self.width < min_side {
            return Err(CamError::InvalidConfig(format!(
                "lattice {}x{} is smaller than the {min_side}-cell neighborhood diameter",
                self.height, self.width
            )));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(CamError::InvalidConfig(format!(
                    "snr_db must be finite, got {snr}"
                )));
            }
        }
        Ok(nb)
    }

    /// Short label such as `manhattan-r1-random`.
    pub fn label(&self) -> String {
        format!("{}-r{}-{}", self.topology, self.radius, self.theta_scheme)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservedDataset {
    pub spec: ScenarioSpec,
    pub truth: RuleParams,
    pub clean: Vec<Configuration>,
    pub observed: Vec<Configuration>,
}

impl ObservedDataset {
    pub fn neighborhood(&self) -> &NeighborhoodSpec {
        self.truth.spec()
    }

    pub fn steps(&self) -> usize {
        self.observed.len().saturating_sub(1)
    }
}

/// Ground-truth rule weights for `spec` under `scheme`.
pub fn make_theta(spec: &NeighborhoodSpec, scheme: ThetaScheme, seed: u64) -> RuleParams {
    let raw: Vec<f64> = match scheme {
        ThetaScheme::RandomUniform => {
            let mut rng = seed::rng(seed);
            loop {
                let draw: Vec<f64> = (0..spec.size()).map(|_| rng.random::<f64>()).collect();
                if draw.iter().sum::<f64>() > 0.0 {
                    break draw;
                }
            }
        }
        ThetaScheme::DistanceBased => spec
            .offsets()
            .iter()
            .map(|&(dy, dx)| 1.0 / (1.0 + spec.topology().distance(dy, dx) as f64))
            .collect(),
    };
    let sum: f64 = raw.iter().sum();
    let weights = raw.into_iter().map(|v| v / sum).collect();
    RuleParams::new(*spec, weights).expect("normalized positive weights lie on the simplex")
}

/// Noise standard deviation giving `snr_db` against the mean squared value
/// over the whole trajectory.
pub fn noise_sigma(traj: &[Configuration], snr_db: f64) -> Result<f64> {
    let n: usize = traj.iter().map(Configuration::len).sum();
    if n == 0 {
        return Err(CamError::EmptyTrajectory);
    }
    let power = traj
        .iter()
        .flat_map(|c| c.cells())
        .map(|v| v * v)
        .sum::<f64>()
        / n as f64;
    Ok((power / 10f64.powf(snr_db / 10.0)).sqrt())
}

/// The noisy trajectory before clamping: `x + N(0, sigma^2)` per cell, drawn
/// on a single stream in step-major, row-major order.
pub fn add_noise_unclamped(
    traj: &[Configuration],
    snr_db: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let sigma = noise_sigma(traj, snr_db)?;
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| CamError::InvalidConfig(format!("noise distribution: {e}")))?;
    let mut rng = seed::rng(seed);
    Ok(traj
        .iter()
        .map(|c| {
            c.cells()
                .iter()
                .map(|&v| v + normal.sample(&mut rng))
                .collect()
        })
        .collect())
}

/// Adds white Gaussian noise at `snr_db` and clamps back into `[0, 1]`.
/// `None` returns the input unchanged.
pub fn add_noise(
    traj: &[Configuration],
    snr_db: Option<f64>,
    seed: u64,
) -> Result<Vec<Configuration>> {
    if traj.is_empty() {
        return Err(CamError::EmptyTrajectory);
    }
    let Some(snr) = snr_db else {
        return Ok(traj.to_vec());
    };
    let noisy = add_noise_unclamped(traj, snr, seed)?;
    Ok(traj
        .iter()
        .zip(noisy)
        .map(|(c, cells)| Configuration::from_clamped(c.height(), c.width(), cells))
        .collect())
}

/// `10 log10(P_signal / P_noise)` measured from a clean and a noisy trajectory.
pub fn empirical_snr_db(clean: &[Configuration], noisy: &[Vec<f64>]) -> f64 {
    let mut signal = 0.0;
    let mut noise = 0.0;
    for (c, n) in clean.iter().zip(noisy) {
        for (x, y) in c.cells().iter().zip(n) {
            signal += x * x;
            noise += (y - x) * (y - x);
        }
    }
    10.0 * (signal / noise).log10()
}

/// The initial configuration drawn from `init_seed`.
pub fn initial_configuration(spec: &ScenarioSpec) -> Result<Configuration> {
    let mut rng = seed::rng(spec.init_seed);
    Configuration::random(spec.height, spec.width, &mut rng)
}

/// Truth weights, clean trajectory and noisy observations for `spec`.
pub fn build_dataset(spec: &ScenarioSpec) -> Result<ObservedDataset> {
    let nb = spec.validate()?;
    let truth = make_theta(
        &nb,
        spec.theta_scheme,
        seed::split(spec.seed, seed::STREAM_THETA),
    );
    let x0 = initial_configuration(spec)?;
    let clean = evolve(&x0, &truth, spec.steps);
    let observed = add_noise(
        &clean,
        spec.snr_db,
        seed::split(spec.seed, seed::STREAM_NOISE),
    )?;
    Ok(ObservedDataset {
        spec: spec.clone(),
        truth,
        clean,
        observed,
    })
}
