//! Suite reports: per-scenario NRMSE and objective statistics.
//!
//! `report.csv` holds only quantities derived from the runs, so two suites
//! with the same inputs produce identical bytes. `report.json` adds
//! metadata: a SHA-256 of the suite file and run options, and wall-clock
//! timestamps.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{ensure, Context, Result};
use cam_core::io::format_f64;
use cam_core::sade::SadeConfig;
use cam_core::{ScenarioSpec, Summary};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::suite::{run_dirs_of, RunRecord, SuiteOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub index: usize,
    pub label: String,
    pub spec: ScenarioSpec,
    pub k: usize,
    pub runs: usize,
    pub run_seeds: Vec<u64>,
    pub nrmse: Summary,
    pub fitness: Summary,
    pub oracle_nrmse: Option<f64>,
    pub oracle_fitness: Option<f64>,
}

impl ScenarioReport {
    /// Summarizes `records`, which must be the runs of one scenario in run
    /// order.
    pub fn from_records(
        index: usize,
        spec: &ScenarioSpec,
        k: usize,
        records: &[&RunRecord],
        oracle: Option<&RunRecord>,
    ) -> Result<Self> {
        let nrmse: Vec<f64> = records.iter().map(|r| r.nrmse).collect();
        let fitness: Vec<f64> = records.iter().map(|r| r.best_fitness).collect();
        Ok(Self {
            index,
            label: spec.label(),
            spec: spec.clone(),
            k,
            runs: records.len(),
            run_seeds: records.iter().map(|r| r.seed.unwrap_or_default()).collect(),
            nrmse: Summary::of(&nrmse).context("scenario has no runs")?,
            fitness: Summary::of(&fitness).context("scenario has no runs")?,
            oracle_nrmse: oracle.map(|o| o.nrmse),
            oracle_fitness: oracle.map(|o| o.best_fitness),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Hex SHA-256 over the suite file text and the canonical options JSON.
    pub config_hash: String,
    pub master_seed: u64,
    pub runs_per_scenario: usize,
    pub sade: SadeConfig,
    pub oracle: bool,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub metadata: ReportMetadata,
    pub scenarios: Vec<ScenarioReport>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn config_hash(suite_text: &str, opts: &SuiteOptions) -> String {
    let options = serde_json::json!({
        "runs": opts.runs,
        "master_seed": opts.master_seed,
        "oracle": opts.oracle,
        "oracle_config": opts.oracle_config,
        "sade": opts.sade,
    });
    let mut h = Sha256::new();
    h.update(suite_text.as_bytes());
    h.update([0u8]);
    h.update(options.to_string().as_bytes());
    hex::encode(h.finalize())
}

pub const CSV_HEADER: [&str; 17] = [
    "index",
    "scenario",
    "topology",
    "radius",
    "theta_scheme",
    "k",
    "runs",
    "nrmse_best",
    "nrmse_mean",
    "nrmse_sd",
    "nrmse_max",
    "j_best",
    "j_mean",
    "j_sd",
    "j_max",
    "oracle_nrmse",
    "oracle_j",
];

impl SuiteReport {
    pub fn new(
        scenarios: Vec<ScenarioReport>,
        suite_text: &str,
        opts: &SuiteOptions,
        started_unix: u64,
    ) -> Self {
        Self {
            metadata: ReportMetadata {
                config_hash: config_hash(suite_text, opts),
                master_seed: opts.master_seed,
                runs_per_scenario: opts.runs,
                sade: opts.sade.clone(),
                oracle: opts.oracle,
                started_unix,
                finished_unix: unix_now(),
            },
            scenarios,
        }
    }

    pub fn started_now() -> u64 {
        unix_now()
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for s in &self.scenarios {
            w.write_record([
                s.index.to_string(),
                s.label.clone(),
                s.spec.topology.to_string(),
                s.spec.radius.to_string(),
                s.spec.theta_scheme.to_string(),
                s.k.to_string(),
                s.runs.to_string(),
                format_f64(s.nrmse.best),
                format_f64(s.nrmse.mean),
                format_f64(s.nrmse.sd),
                format_f64(s.nrmse.max),
                format_f64(s.fitness.best),
                format_f64(s.fitness.mean),
                format_f64(s.fitness.sd),
                format_f64(s.fitness.max),
                opt(s.oracle_nrmse),
                opt(s.oracle_fitness),
            ])?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        fs::write(out_dir.join("report.json"), json)?;
        fs::write(out_dir.join("report.csv"), self.to_csv()?)?;
        Ok(())
    }

    pub fn load(out_dir: &Path) -> Result<Self> {
        let path = out_dir.join("report.json");
        let text =
            fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Plain-text table with the mean and spread of NRMSE and J per scenario.
    pub fn render<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{:<24} {:>3} {:>4} {:>9} {:>9} {:>9} {:>9} {:>11} {:>11} {:>11}",
            "scenario",
            "K",
            "runs",
            "nrmse_min",
            "nrmse_avg",
            "nrmse_sd",
            "nrmse_max",
            "j_min",
            "j_avg",
            "j_sd"
        )?;
        for s in &self.scenarios {
            writeln!(
                out,
                "{:<24} {:>3} {:>4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>11.4e} {:>11.4e} {:>11.4e}",
                s.label,
                s.k,
                s.runs,
                s.nrmse.best,
                s.nrmse.mean,
                s.nrmse.sd,
                s.nrmse.max,
                s.fitness.best,
                s.fitness.mean,
                s.fitness.sd,
            )?;
        }
        writeln!(out, "config {}", self.metadata.config_hash)
    }
}

/// Rebuilds every scenario summary from the per-run `result.json` files under
/// `out_dir` and checks it equals what `report.json` recorded.
pub fn verify(out_dir: &Path) -> Result<SuiteReport> {
    let report = SuiteReport::load(out_dir)?;
    for s in &report.scenarios {
        let dirs = run_dirs_of(out_dir, s.index, &s.spec)?;
        ensure!(
            dirs.len() == s.runs && s.runs == report.metadata.runs_per_scenario,
            "{}: report has {} runs, found {} run directories",
            s.label,
            s.runs,
            dirs.len()
        );
        let records: Vec<RunRecord> = dirs
            .iter()
            .map(|d| {
                let text = fs::read_to_string(d.join("result.json"))?;
                Ok(serde_json::from_str(&text)?)
            })
            .collect::<Result<_>>()
            .with_context(|| format!("{}: reading run results", s.label))?;
        let oracle = {
            let path = crate::suite::scenario_dir(out_dir, s.index, &s.spec).join("oracle.json");
            if path.exists() {
                Some(serde_json::from_str::<RunRecord>(&fs::read_to_string(
                    path,
                )?)?)
            } else {
                None
            }
        };
        let refs: Vec<&RunRecord> = records.iter().collect();
        let again = ScenarioReport::from_records(s.index, &s.spec, s.k, &refs, oracle.as_ref())?;
        ensure!(
            &again == s,
            "{}: recomputed statistics differ from report",
            s.label
        );
    }
    Ok(report)
}
