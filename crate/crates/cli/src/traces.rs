//! Per-run trace files and their aggregation across runs.
//!
//! `traces.csv` (one per run) has columns
//! `generation,best_j,p_<s>...,cvr_<s>...,n_<s>...` for the four strategies in
//! pool order, generations numbered from 1. Aggregation writes, per scenario:
//!
//! * `convergence.csv`: mean, min and max best-J across runs;
//! * `strategy_probabilities.csv`: mean selection probability across runs;
//! * `cvr.csv`: violation rate per strategy, pooled over the trials of all
//!   runs (a run that never tried a strategy in some generation contributes
//!   nothing to that cell rather than a zero).

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use cam_core::io::format_f64;
use cam_core::sade::{SadeRunResult, Strategy, POOL_SIZE};

fn header(prefixes: &[&str]) -> Vec<String> {
    let mut h = vec!["generation".to_string()];
    for p in prefixes {
        for s in Strategy::ALL {
            h.push(format!("{p}_{}", s.slug()));
        }
    }
    h
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

/// Parsed `traces.csv` of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub best_j: Vec<f64>,
    pub probabilities: Vec<[f64; POOL_SIZE]>,
    pub cvr: Vec<[f64; POOL_SIZE]>,
    pub trials: Vec<[u32; POOL_SIZE]>,
}

impl RunTrace {
    pub fn from_result(res: &SadeRunResult) -> Self {
        Self {
            best_j: res.fitness_trace.clone(),
            probabilities: res.strategy_prob_trace.clone(),
            cvr: res.cvr_trace.clone(),
            trials: res.trial_trace.clone(),
        }
    }

    pub fn generations(&self) -> usize {
        self.best_j.len()
    }
}

pub fn write_run_traces(res: &SadeRunResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    let mut h = vec!["generation".to_string(), "best_j".to_string()];
    h.extend(header(&["p", "cvr", "n"]).into_iter().skip(1));
    w.write_record(&h)?;
    for g in 0..res.fitness_trace.len() {
        let mut row = vec![(g + 1).to_string(), format_f64(res.fitness_trace[g])];
        row.extend(res.strategy_prob_trace[g].iter().map(|&v| format_f64(v)));
        row.extend(res.cvr_trace[g].iter().map(|&v| format_f64(v)));
        row.extend(res.trial_trace[g].iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_run_traces(path: &Path) -> Result<RunTrace> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = RunTrace::default();
    let width = 2 + 3 * POOL_SIZE;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        ensure!(
            rec.len() == width,
            "{}: row {} has {} fields",
            path.display(),
            line + 1,
            rec.len()
        );
        let gen: usize = rec[0].parse()?;
        ensure!(
            gen == line + 1,
            "{}: generation {gen} out of order",
            path.display()
        );
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        out.best_j.push(f(1)?);
        let mut p = [0.0; POOL_SIZE];
        let mut c = [0.0; POOL_SIZE];
        let mut n = [0u32; POOL_SIZE];
        for s in 0..POOL_SIZE {
            p[s] = f(2 + s)?;
            c[s] = f(2 + POOL_SIZE + s)?;
            n[s] = rec[2 + 2 * POOL_SIZE + s].parse()?;
        }
        out.probabilities.push(p);
        out.cvr.push(c);
        out.trials.push(n);
    }
    Ok(out)
}

/// Per-generation aggregates over a set of runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub mean_j: Vec<f64>,
    pub min_j: Vec<f64>,
    pub max_j: Vec<f64>,
    pub probabilities: Vec<[f64; POOL_SIZE]>,
    /// `None` where no run tried the strategy in that generation.
    pub cvr: Vec<[Option<f64>; POOL_SIZE]>,
}

pub fn aggregate(runs: &[RunTrace]) -> Result<Aggregate> {
    let Some(first) = runs.first() else {
        bail!("no runs to aggregate");
    };
    let g = first.generations();
    ensure!(
        runs.iter().all(|r| r.generations() == g),
        "runs have different generation counts"
    );
    let n = runs.len() as f64;
    let mut agg = Aggregate {
        mean_j: Vec::with_capacity(g),
        min_j: Vec::with_capacity(g),
        max_j: Vec::with_capacity(g),
        probabilities: Vec::with_capacity(g),
        cvr: Vec::with_capacity(g),
    };
    for t in 0..g {
        let js = runs.iter().map(|r| r.best_j[t]);
        agg.mean_j.push(js.clone().sum::<f64>() / n);
        agg.min_j.push(js.clone().fold(f64::INFINITY, f64::min));
        agg.max_j.push(js.fold(f64::NEG_INFINITY, f64::max));
        let mut p = [0.0; POOL_SIZE];
        let mut c = [None; POOL_SIZE];
        for s in 0..POOL_SIZE {
            p[s] = runs.iter().map(|r| r.probabilities[t][s]).sum::<f64>() / n;
            let trials: u64 = runs.iter().map(|r| r.trials[t][s] as u64).sum();
            if trials > 0 {
                let violations: f64 = runs
                    .iter()
                    .map(|r| (r.cvr[t][s] * r.trials[t][s] as f64).round())
                    .sum();
                c[s] = Some(violations / trials as f64);
            }
        }
        agg.probabilities.push(p);
        agg.cvr.push(c);
    }
    Ok(agg)
}

/// Run directories (`run_XX`) under a scenario directory, in run order.
pub fn run_dirs(scenario_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(scenario_dir)
        .with_context(|| format!("listing {}", scenario_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("run_"))
        })
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn write_aggregate(agg: &Aggregate, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut w = writer(&out_dir.join("convergence.csv"))?;
    w.write_record(["generation", "mean_best_j", "min_best_j", "max_best_j"])?;
    for t in 0..agg.mean_j.len() {
        w.write_record([
            (t + 1).to_string(),
            format_f64(agg.mean_j[t]),
            format_f64(agg.min_j[t]),
            format_f64(agg.max_j[t]),
        ])?;
    }
    w.flush()?;

    let mut w = writer(&out_dir.join("strategy_probabilities.csv"))?;
    w.write_record(header(&["p"]))?;
    for (t, p) in agg.probabilities.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(p.iter().map(|&v| format_f64(v)));
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = writer(&out_dir.join("cvr.csv"))?;
    w.write_record(header(&["cvr"]))?;
    for (t, c) in agg.cvr.iter().enumerate() {
        let mut row = vec![(t + 1).to_string()];
        row.extend(c.iter().map(|v| v.map(format_f64).unwrap_or_default()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Aggregates every run under `scenario_dir` and writes the trace CSVs into
/// `out_dir`.
pub fn emit_traces_to(scenario_dir: &Path, out_dir: &Path) -> Result<Aggregate> {
    let runs: Vec<RunTrace> = run_dirs(scenario_dir)?
        .iter()
        .map(|d| read_run_traces(&d.join("traces.csv")))
        .collect::<Result<_>>()?;
    let agg = aggregate(&runs).with_context(|| format!("in {}", scenario_dir.display()))?;
    write_aggregate(&agg, out_dir)?;
    Ok(agg)
}

pub fn emit_traces(scenario_dir: &Path) -> Result<Aggregate> {
    emit_traces_to(scenario_dir, scenario_dir)
}
