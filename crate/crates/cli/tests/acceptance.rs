//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line
//! straight to stdout so the verdicts show up without `--nocapture`.
//!
//! The full-size replication (criterion 5, 12 scenarios x 20 runs at 51x51)
//! takes hours on one core and is `#[ignore]`d; run it with
//! `cargo test --release -p cam-cli --test acceptance -- --ignored`, or point
//! `CAM_FULL_RUN` at the output directory of a finished
//! `cam suite run suites/standard.json --runs 20` to evaluate that instead.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use cam_cli::report::{self, SuiteReport};
use cam_cli::suite::{load_suite, run_suite, SuiteOptions, SuiteOutcome};
use cam_cli::traces::{self, aggregate, RunTrace};
use cam_core::oracle::OracleConfig;
use cam_core::sade::{self, SadeConfig, Strategy};
use cam_core::scenario::{add_noise_unclamped, empirical_snr_db};
use cam_core::seed::{split, STREAM_INIT, STREAM_NOISE};
use cam_core::{
    apply_rule, build_dataset, d_m, d_mk, solve_projected_subgradient, BernoulliParam,
    Configuration, NeighborhoodSpec, Objective, RuleParams, ScenarioSpec, ThetaScheme, Topology,
    WeightScheme,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: &str, pass: bool, detail: String) {
    let line = format!(
        "\ncriterion {n}: {} {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn suites_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suites")
}

fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

const MASTER_SEED: u64 = 2024;

#[test]
fn criterion_1_neighborhood_sizes() {
    let start = Instant::now();
    let expected = [
        (Topology::Manhattan, [5, 13, 25]),
        (Topology::Moore, [9, 25, 49]),
    ];
    let mut got = Vec::new();
    let mut pass = true;
    for (t, ks) in expected {
        for (r, k) in (1..=3).zip(ks) {
            let spec = NeighborhoodSpec::new(t, r).unwrap();
            pass &= spec.size() == k && spec.offsets().len() == k;
            got.push(format!("{spec}={}", spec.size()));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 1.0;
    verdict("1", pass, format!("[{}] in {secs:.3}s", got.join(" ")));
}

#[test]
fn criterion_2_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut worst_dmk = 0.0f64;
    for _ in 0..100_000 {
        let p: f64 = rng.random();
        let q: f64 = rng.random();
        let d = d_mk(
            BernoulliParam::new(p).unwrap(),
            BernoulliParam::new(q).unwrap(),
        );
        worst_dmk = worst_dmk.max((d - (p - q).abs()).abs());
    }

    let mut violations = 0;
    let mut worst_triangle = f64::NEG_INFINITY;
    for i in 0..1000 {
        let h = rng.random_range(1..=21);
        let w = rng.random_range(1..=21);
        let scheme = if i % 2 == 0 {
            WeightScheme::Centered
        } else {
            WeightScheme::Uniform
        };
        let x = Configuration::random(h, w, &mut rng).unwrap();
        let y = Configuration::random(h, w, &mut rng).unwrap();
        let z = Configuration::random(h, w, &mut rng).unwrap();
        let d = |a, b| d_m(a, b, scheme).unwrap();
        let excess = d(&x, &z) - d(&x, &y) - d(&y, &z);
        worst_triangle = worst_triangle.max(excess);
        let ok = d(&x, &x).abs() <= 1e-12
            && d(&x, &y) > 1e-12
            && (d(&x, &y) - d(&y, &x)).abs() <= 1e-12
            && excess <= 1e-12;
        violations += !ok as usize;
    }
    verdict(
        "2",
        worst_dmk <= 1e-15 && violations == 0,
        format!(
            "max |d_mk - |p-q|| = {worst_dmk:.1e} over 1e5 pairs; {violations} axiom violations over 1e3 triples (max triangle excess {worst_triangle:.1e})"
        ),
    );
}

/// Brute-force stencil: loops over the square around each cell and keeps
/// offsets inside the ball, in row-major order.
fn brute_force_step(x: &Configuration, theta: &[f64], topology: Topology, r: usize) -> Vec<f64> {
    let (h, w) = (x.height() as isize, x.width() as isize);
    let r = r as isize;
    let mut out = vec![0.0; (h * w) as usize];
    for row in 0..h {
        for col in 0..w {
            let mut k = 0;
            let mut acc = 0.0;
            for dy in -r..=r {
                for dx in -r..=r {
                    let inside = match topology {
                        Topology::Manhattan => dy.abs() + dx.abs() <= r,
                        Topology::Moore => true,
                    };
                    if !inside {
                        continue;
                    }
                    let rr = (row + dy).rem_euclid(h);
                    let cc = (col + dx).rem_euclid(w);
                    acc += theta[k] * x.get(rr as usize, cc as usize);
                    k += 1;
                }
            }
            out[(row * w + col) as usize] = acc;
        }
    }
    out
}

#[test]
fn criterion_3_forward_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED + 3);
    let mut range_fail = 0;
    let mut fixed_fail = 0;
    let mut worst_brute = 0.0f64;
    for _ in 0..1000 {
        let topology = if rng.random::<bool>() {
            Topology::Moore
        } else {
            Topology::Manhattan
        };
        let r = rng.random_range(1..=3);
        let spec = NeighborhoodSpec::new(topology, r).unwrap();
        let rule = RuleParams::new(spec, random_simplex(&mut rng, spec.size())).unwrap();
        let h = rng.random_range(5..=9);
        let w = rng.random_range(5..=9);
        let x = Configuration::random(h, w, &mut rng).unwrap();
        let y = apply_rule(&x, &rule);
        let (lo, hi) = (x.min(), x.max());
        if !y
            .cells()
            .iter()
            .all(|&v| (0.0..=1.0).contains(&v) && v >= lo - 1e-15 && v <= hi + 1e-15)
        {
            range_fail += 1;
        }
        let c: f64 = rng.random();
        let flat = Configuration::filled(h, w, BernoulliParam::new(c).unwrap()).unwrap();
        if !apply_rule(&flat, &rule)
            .cells()
            .iter()
            .all(|&v| (v - c).abs() <= 1e-14)
        {
            fixed_fail += 1;
        }
        let brute = brute_force_step(&x, rule.weights(), topology, r);
        for (a, b) in y.cells().iter().zip(&brute) {
            worst_brute = worst_brute.max((a - b).abs());
        }
    }
    verdict(
        "3",
        range_fail == 0 && fixed_fail == 0 && worst_brute <= 1e-14,
        format!(
            "1e3 instances: {range_fail} range violations, {fixed_fail} fixed-point violations, max |apply_rule - brute force| = {worst_brute:.1e}"
        ),
    );
}

#[test]
fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let combos = [
        (Topology::Manhattan, 1),
        (Topology::Manhattan, 2),
        (Topology::Manhattan, 3),
        (Topology::Moore, 1),
        (Topology::Moore, 2),
        (Topology::Moore, 3),
    ];
    let init_seed = split(MASTER_SEED, STREAM_INIT);
    let mut worst_theta = 0.0f64;
    let mut worst_gap = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for i in 0..20 {
        let (topology, r) = combos[i % combos.len()];
        let scheme = if (i / combos.len()) % 2 == 0 {
            ThetaScheme::RandomUniform
        } else {
            ThetaScheme::DistanceBased
        };
        let mut spec =
            ScenarioSpec::standard(topology, r, scheme, split(MASTER_SEED, i as u64), init_seed);
        spec.height = 21;
        spec.width = 21;
        spec.snr_db = None;
        let data = build_dataset(&spec).unwrap();
        let objective = Objective::from_dataset(&data, WeightScheme::Centered).unwrap();
        let oracle = solve_projected_subgradient(&objective, &OracleConfig::default()).unwrap();
        let theta_err = oracle
            .theta
            .iter()
            .zip(data.truth.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let res = sade::run_objective(
            &objective,
            *data.neighborhood(),
            &SadeConfig::with_seed(split(spec.seed, 0)),
        )
        .unwrap();
        let gap = res.best_fitness - oracle.objective;
        worst_theta = worst_theta.max(theta_err);
        worst_gap = worst_gap.max(gap);
        if theta_err >= 1e-3 || gap > 1e-4 {
            failures.push(format!(
                "#{i} {} (theta err {theta_err:.1e}, gap {gap:.1e})",
                spec.label()
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "4",
        failures.is_empty() && secs < 600.0,
        format!(
            "20 noiseless 21x21 instances in {secs:.0}s: max oracle theta error {worst_theta:.1e}, max SaDE - oracle J {worst_gap:.1e}; failing: [{}]",
            failures.join(", ")
        ),
    )
}

/// Two executions of the CI suite with the same master seed.
struct CiRuns {
    outcomes: [SuiteOutcome; 2],
    dirs: [tempfile::TempDir; 2],
    seconds: f64,
}

fn ci_runs() -> &'static CiRuns {
    static RUNS: OnceLock<CiRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let path = suites_dir().join("ci.json");
        let text = std::fs::read_to_string(&path).unwrap();
        let scenarios = load_suite(&path, MASTER_SEED).unwrap();
        let run = |dir: &Path| {
            let mut opts = SuiteOptions::new(dir);
            opts.runs = 5;
            opts.master_seed = MASTER_SEED;
            run_suite(&scenarios, &text, &opts).unwrap()
        };
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let start = Instant::now();
        let first = run(dirs[0].path());
        let seconds = start.elapsed().as_secs_f64();
        let second = run(dirs[1].path());
        CiRuns {
            outcomes: [first, second],
            dirs,
            seconds,
        }
    })
}

#[test]
fn criterion_5_ci_replication() {
    let ci = ci_runs();
    let report = &ci.outcomes[0].report;
    let means: Vec<String> = report
        .scenarios
        .iter()
        .map(|s| format!("{}={:.3}%", s.label, s.nrmse.mean))
        .collect();
    let pass = report
        .scenarios
        .iter()
        .all(|s| s.nrmse.mean <= 5.0 && s.runs == 5)
        && ci.seconds < 1800.0;
    verdict(
        "5 (CI: 3 scenarios x 5 runs, 21x21)",
        pass,
        format!(
            "mean NRMSE [{}], limit 5%; {:.0}s",
            means.join(" "),
            ci.seconds
        ),
    );
}

fn check_full_replication(report: &SuiteReport) {
    let mut all = true;
    let mut r1 = None;
    let mut lines = Vec::new();
    for s in &report.scenarios {
        all &= s.nrmse.mean <= 4.0 && s.runs == 20;
        if s.spec.topology == Topology::Manhattan
            && s.spec.radius == 1
            && s.spec.theta_scheme == ThetaScheme::RandomUniform
        {
            r1 = Some(s.nrmse.mean);
        }
        lines.push(format!("{}={:.3}%", s.label, s.nrmse.mean));
    }
    let r1_ok = r1.is_some_and(|m| m <= 2.0);
    verdict(
        "5 (full: 12 scenarios x 20 runs, 51x51)",
        all && r1_ok && report.scenarios.len() == 12,
        format!(
            "manhattan-r1-random mean {:.3}% (limit 2%); all means [{}] (limit 4%)",
            r1.unwrap_or(f64::NAN),
            lines.join(" ")
        ),
    );
}

#[test]
#[ignore = "hours on one core; see module docs"]
fn criterion_5_full_replication() {
    if let Ok(dir) = std::env::var("CAM_FULL_RUN") {
        let report = report::verify(Path::new(&dir)).unwrap();
        check_full_replication(&report);
        return;
    }
    let path = suites_dir().join("standard.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let scenarios = load_suite(&path, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut opts = SuiteOptions::new(dir.path());
    opts.runs = 20;
    let outcome = run_suite(&scenarios, &text, &opts).unwrap();
    check_full_replication(&outcome.report);
}

#[test]
fn criterion_6_monotone_convergence() {
    let ci = ci_runs();
    let mut runs = 0;
    let mut bad = Vec::new();
    for (outcome, dir) in ci.outcomes.iter().zip(&ci.dirs) {
        for o in &outcome.runs {
            runs += 1;
            if o.result.fitness_trace.windows(2).any(|w| w[1] > w[0]) {
                bad.push(format!("{} run {}", o.record.scenario, o.run));
            }
        }
        // The files on disk carry the same traces.
        for (i, s) in outcome.report.scenarios.iter().enumerate() {
            for d in
                traces::run_dirs(&cam_cli::suite::scenario_dir(dir.path(), i, &s.spec)).unwrap()
            {
                let t = traces::read_run_traces(&d.join("traces.csv")).unwrap();
                if t.best_j.windows(2).any(|w| w[1] > w[0]) {
                    bad.push(d.display().to_string());
                }
            }
        }
    }
    verdict(
        "6",
        bad.is_empty() && runs == 30,
        format!(
            "{runs} runs checked, {} non-monotone traces {bad:?}",
            bad.len()
        ),
    );
}

#[test]
fn criterion_7_strategy_dynamics() {
    let spec = ScenarioSpec::standard(
        Topology::Manhattan,
        3,
        ThetaScheme::RandomUniform,
        split(MASTER_SEED, 7),
        split(MASTER_SEED, STREAM_INIT),
    );
    let data = build_dataset(&spec).unwrap();
    let objective = Objective::from_dataset(&data, WeightScheme::Centered).unwrap();
    let runs: Vec<RunTrace> = (0..5)
        .map(|r| {
            let cfg = SadeConfig::with_seed(split(spec.seed, r));
            RunTrace::from_result(
                &sade::run_objective(&objective, *data.neighborhood(), &cfg).unwrap(),
            )
        })
        .collect();
    let agg = aggregate(&runs).unwrap();
    let g = agg.probabilities.len();
    let window = g.saturating_sub(100)..g;
    let mean_p = |s: Strategy| {
        window
            .clone()
            .map(|t| agg.probabilities[t][s.index()])
            .sum::<f64>()
            / window.len() as f64
    };
    // Pooled over every trial in the window.
    let pooled_cvr = |s: Strategy| {
        let (mut bad, mut total) = (0.0, 0u64);
        for run in &runs {
            for t in window.clone() {
                let n = run.trials[t][s.index()];
                bad += (run.cvr[t][s.index()] * n as f64).round();
                total += n as u64;
            }
        }
        bad / total.max(1) as f64
    };
    let dominant = mean_p(Strategy::RandToBest2) + mean_p(Strategy::CurrentToRand1);
    let other = mean_p(Strategy::Rand1) + mean_p(Strategy::Rand2);
    let cvr_ctr = pooled_cvr(Strategy::CurrentToRand1);
    let cvr_r2 = pooled_cvr(Strategy::Rand2);
    verdict(
        "7",
        dominant > other && cvr_ctr < cvr_r2,
        format!(
            "manhattan-r3-random 51x51, 5 runs, last 100 generations: p(rand-to-best/2)+p(current-to-rand/1) = {dominant:.3} vs {other:.3}; CVR current-to-rand/1 {cvr_ctr:.3} vs rand/2 {cvr_r2:.3}"
        ),
    );
}

#[test]
fn criterion_8_determinism() {
    let ci = ci_runs();
    let a = std::fs::read(ci.dirs[0].path().join("report.csv")).unwrap();
    let b = std::fs::read(ci.dirs[1].path().join("report.csv")).unwrap();
    let verified = ci.dirs.iter().all(|d| report::verify(d.path()).is_ok());
    verdict(
        "8",
        a == b && !a.is_empty() && verified,
        format!(
            "report.csv {} bytes, identical = {}; statistics recomputed from per-run files match = {verified}",
            a.len(),
            a == b
        ),
    );
}

#[test]
fn criterion_9_noise_calibration() {
    let scenarios = load_suite(&suites_dir().join("standard.json"), MASTER_SEED).unwrap();
    let mut worst = 0.0f64;
    let mut consistent = true;
    for spec in &scenarios {
        let data = build_dataset(spec).unwrap();
        let snr = spec.snr_db.unwrap();
        let noisy = add_noise_unclamped(&data.clean, snr, split(spec.seed, STREAM_NOISE)).unwrap();
        // The observations are exactly these draws clamped to [0, 1].
        consistent &= noisy.iter().zip(&data.observed).all(|(n, o)| {
            n.iter()
                .zip(o.cells())
                .all(|(a, b)| a.clamp(0.0, 1.0) == *b)
        });
        worst = worst.max((empirical_snr_db(&data.clean, &noisy) - snr).abs());
    }
    verdict(
        "9",
        worst <= 0.5 && consistent && scenarios.len() == 12,
        format!("12 scenarios at 51x51x11: max |empirical SNR - 40 dB| = {worst:.4} dB; observations match pre-clamp draws = {consistent}"),
    );
}
