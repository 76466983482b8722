//! Suite files and the scenario x run driver.
//!
//! A suite file is a JSON array of scenario specs. `seed` and `init_seed` may
//! be omitted; missing values derive from the master seed:
//!
//! * `init_seed = split(master, STREAM_INIT)`, shared by every scenario, so all
//!   scenarios start from the same initial configuration;
//! * `seed = split(master, scenario_index)`;
//! * each run's search seed is `split(seed, run_index)`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cam_core::oracle::{solve_projected_subgradient, OracleConfig, OracleResult};
use cam_core::sade::{self, SadeConfig, SadeRunResult};
use cam_core::seed::{split, STREAM_INIT};
use cam_core::{build_dataset, nrmse, Objective, ObservedDataset, ScenarioSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{ScenarioReport, SuiteReport};
use crate::traces;

/// Parses a suite file, filling in seeds that are not given.
pub fn parse_suite(text: &str, master_seed: u64) -> Result<Vec<ScenarioSpec>> {
    let entries: Vec<Value> =
        serde_json::from_str(text).context("suite file is not a JSON array")?;
    entries
        .into_iter()
        .enumerate()
        .map(|(i, mut v)| {
            let obj = v
                .as_object_mut()
                .with_context(|| format!("suite entry {i} is not an object"))?;
            obj.entry("init_seed")
                .or_insert_with(|| Value::from(split(master_seed, STREAM_INIT)));
            obj.entry("seed")
                .or_insert_with(|| Value::from(split(master_seed, i as u64)));
            let spec: ScenarioSpec =
                serde_json::from_value(v).with_context(|| format!("suite entry {i}"))?;
            spec.validate()
                .with_context(|| format!("suite entry {i}"))?;
            Ok(spec)
        })
        .collect()
}

pub fn load_suite(path: &Path, master_seed: u64) -> Result<Vec<ScenarioSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_suite(&text, master_seed).with_context(|| format!("in {}", path.display()))
}

pub fn run_seed(scenario: &ScenarioSpec, run: usize) -> u64 {
    split(scenario.seed, run as u64)
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub runs: usize,
    pub out_dir: PathBuf,
    pub master_seed: u64,
    pub oracle: bool,
    pub oracle_config: OracleConfig,
    /// Worker threads for scenario x run jobs; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Search settings; the seed is replaced per run.
    pub sade: SadeConfig,
}

impl SuiteOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            runs: 20,
            out_dir: out_dir.into(),
            master_seed: 0,
            oracle: false,
            oracle_config: OracleConfig::default(),
            threads: None,
            sade: SadeConfig::default(),
        }
    }
}

/// `result.json` for one solver run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub solver: String,
    pub scenario: String,
    pub scenario_index: usize,
    pub run: Option<usize>,
    pub seed: Option<u64>,
    pub best_theta: Vec<f64>,
    pub truth: Vec<f64>,
    pub best_fitness: f64,
    pub nrmse: f64,
    pub evaluations: Option<u64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub config: Value,
}

impl RunRecord {
    fn from_sade(
        idx: usize,
        data: &ObservedDataset,
        run: usize,
        res: &SadeRunResult,
        cfg: &SadeConfig,
    ) -> Result<Self> {
        Ok(Self {
            solver: "sade".into(),
            scenario: data.spec.label(),
            scenario_index: idx,
            run: Some(run),
            seed: Some(res.seed),
            best_theta: res.best_theta.weights().to_vec(),
            truth: data.truth.weights().to_vec(),
            best_fitness: res.best_fitness,
            nrmse: nrmse(res.best_theta.weights(), data.truth.weights())?,
            evaluations: Some(res.evaluations),
            iterations: None,
            converged: None,
            config: serde_json::to_value(cfg)?,
        })
    }

    fn from_oracle(
        idx: usize,
        data: &ObservedDataset,
        res: &OracleResult,
        cfg: &OracleConfig,
    ) -> Result<Self> {
        Ok(Self {
            solver: "oracle".into(),
            scenario: data.spec.label(),
            scenario_index: idx,
            run: None,
            seed: None,
            best_theta: res.theta.clone(),
            truth: data.truth.weights().to_vec(),
            best_fitness: res.objective,
            nrmse: nrmse(&res.theta, data.truth.weights())?,
            evaluations: None,
            iterations: Some(res.iterations),
            converged: Some(res.converged),
            config: serde_json::to_value(cfg)?,
        })
    }
}

/// Output directory of scenario `idx`.
pub fn scenario_dir(out: &Path, idx: usize, spec: &ScenarioSpec) -> PathBuf {
    out.join(format!("{idx:02}-{}", spec.label()))
}

pub fn run_dir(scenario_dir: &Path, run: usize) -> PathBuf {
    scenario_dir.join(format!("run_{run:02}"))
}

/// Run directories of scenario `idx` under a suite output directory.
pub fn run_dirs_of(out: &Path, idx: usize, spec: &ScenarioSpec) -> Result<Vec<PathBuf>> {
    traces::run_dirs(&scenario_dir(out, idx, spec))
}

/// Fails if a best-so-far trace ever increases.
pub fn check_monotone(trace: &[f64]) -> Result<()> {
    for (g, w) in trace.windows(2).enumerate() {
        if w[1] > w[0] {
            bail!(
                "best fitness rose from {} to {} at generation {}",
                w[0],
                w[1],
                g + 2
            );
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Everything one completed run produced, kept in memory for the report.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub scenario_index: usize,
    pub run: usize,
    pub record: RunRecord,
    pub result: SadeRunResult,
}

/// Output of a whole suite.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub runs: Vec<RunOutcome>,
    pub oracle: Vec<Option<RunRecord>>,
}

/// Runs every scenario `opts.runs` times and writes per-run artifacts,
/// `report.json` and `report.csv` under `opts.out_dir`.
pub fn run_suite(
    scenarios: &[ScenarioSpec],
    suite_text: &str,
    opts: &SuiteOptions,
) -> Result<SuiteOutcome> {
    if opts.runs == 0 {
        bail!("runs must be at least 1");
    }
    opts.sade.validate()?;
    let started = SuiteReport::started_now();
    fs::create_dir_all(&opts.out_dir)
        .with_context(|| format!("creating {}", opts.out_dir.display()))?;

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = opts.threads {
            b = b.num_threads(n);
        }
        b.build()?
    };

    pool.install(|| -> Result<SuiteOutcome> {
        let datasets: Vec<ObservedDataset> = scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                build_dataset(s).with_context(|| format!("building scenario {i} ({})", s.label()))
            })
            .collect::<Result<_>>()?;
        let objectives: Vec<Objective> = datasets
            .iter()
            .map(|d| Objective::from_dataset(d, opts.sade.weighting))
            .collect::<Result<_, _>>()?;

        for (i, (spec, data)) in scenarios.iter().zip(&datasets).enumerate() {
            let dir = scenario_dir(&opts.out_dir, i, spec);
            fs::create_dir_all(&dir)?;
            write_json(
                &dir.join("scenario.json"),
                &serde_json::json!({
                    "spec": spec,
                    "truth": data.truth,
                }),
            )?;
        }

        let jobs: Vec<(usize, usize)> = (0..scenarios.len())
            .flat_map(|i| (0..opts.runs).map(move |r| (i, r)))
            .collect();
        let runs: Vec<RunOutcome> = jobs
            .par_iter()
            .map(|&(i, r)| {
                let spec = &scenarios[i];
                let seed = run_seed(spec, r);
                let cfg = SadeConfig {
                    seed,
                    ..opts.sade.clone()
                };
                let ctx = || format!("scenario {i} ({}), run {r}, seed {seed}", spec.label());
                let result = sade::run_objective(&objectives[i], *datasets[i].neighborhood(), &cfg)
                    .with_context(ctx)?;
                check_monotone(&result.fitness_trace).with_context(ctx)?;
                let record =
                    RunRecord::from_sade(i, &datasets[i], r, &result, &cfg).with_context(ctx)?;
                let dir = run_dir(&scenario_dir(&opts.out_dir, i, spec), r);
                fs::create_dir_all(&dir).with_context(ctx)?;
                write_json(&dir.join("result.json"), &record).with_context(ctx)?;
                traces::write_run_traces(&result, &dir.join("traces.csv")).with_context(ctx)?;
                Ok(RunOutcome {
                    scenario_index: i,
                    run: r,
                    record,
                    result,
                })
            })
            .collect::<Result<_>>()?;

        let oracle: Vec<Option<RunRecord>> = if opts.oracle {
            objectives
                .par_iter()
                .enumerate()
                .map(|(i, obj)| {
                    let res = solve_projected_subgradient(obj, &opts.oracle_config)?;
                    let rec = RunRecord::from_oracle(i, &datasets[i], &res, &opts.oracle_config)?;
                    write_json(
                        &scenario_dir(&opts.out_dir, i, &scenarios[i]).join("oracle.json"),
                        &rec,
                    )?;
                    Ok(Some(rec))
                })
                .collect::<Result<_>>()?
        } else {
            vec![None; scenarios.len()]
        };

        let mut per_scenario = Vec::with_capacity(scenarios.len());
        for (i, (spec, data)) in scenarios.iter().zip(&datasets).enumerate() {
            let records: Vec<&RunRecord> = runs
                .iter()
                .filter(|o| o.scenario_index == i)
                .map(|o| &o.record)
                .collect();
            per_scenario.push(ScenarioReport::from_records(
                i,
                spec,
                data.truth.len(),
                &records,
                oracle[i].as_ref(),
            )?);
        }
        let report = SuiteReport::new(per_scenario, suite_text, opts, started);
        report.write(&opts.out_dir)?;
        for (i, spec) in scenarios.iter().enumerate() {
            traces::emit_traces(&scenario_dir(&opts.out_dir, i, spec))?;
        }
        Ok(SuiteOutcome {
            report,
            runs,
            oracle,
        })
    })
}
