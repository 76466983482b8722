use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use cam_cli::report::{self, SuiteReport};
use cam_cli::suite::{load_suite, run_suite, scenario_dir, SuiteOptions};
use cam_cli::traces;
use cam_core::io::write_dataset;
use cam_core::sade::Replacement;
use cam_core::{build_dataset, ScenarioSpec, ThetaScheme, Topology, WeightScheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cam",
    version,
    about = "Rule identification for Bernoulli-measure cellular automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario suite.
    #[command(subcommand)]
    Suite(SuiteCmd),
    /// Generate observation datasets.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Aggregate per-run traces.
    #[command(subcommand)]
    Traces(TracesCmd),
    /// Inspect suite reports.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Subcommand)]
enum SuiteCmd {
    Run(SuiteRun),
}

#[derive(Clone, Copy, ValueEnum)]
enum Weighting {
    Centered,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReplacementArg {
    Immediate,
    Generational,
}

#[derive(Args)]
struct SuiteRun {
    /// Suite file: JSON array of scenario specs.
    suite: PathBuf,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    master_seed: u64,
    /// Also solve each scenario with the projected-subgradient reference.
    #[arg(long)]
    oracle: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "CAM_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    learning_period: Option<usize>,
    #[arg(long, value_enum)]
    weighting: Option<Weighting>,
    #[arg(long, value_enum)]
    replacement: Option<ReplacementArg>,
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Write the clean and noisy trajectories of one scenario as CSV grids.
    Gen(ScenarioGen),
}

#[derive(Args)]
struct ScenarioGen {
    #[arg(long, value_parser = parse_topology)]
    topology: Topology,
    #[arg(long)]
    radius: usize,
    #[arg(long, value_parser = parse_scheme)]
    theta: ThetaScheme,
    #[arg(long, default_value_t = 51)]
    height: usize,
    #[arg(long, default_value_t = 51)]
    width: usize,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Observation SNR in dB; omit with --noiseless.
    #[arg(long, default_value_t = 40.0)]
    snr: f64,
    #[arg(long)]
    noiseless: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum TracesCmd {
    /// Write convergence, probability and CVR traces for one scenario
    /// directory of a suite run.
    Emit {
        scenario_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Print the summary table of a suite output directory.
    Show {
        dir: PathBuf,
        /// Recompute the statistics from the per-run files first.
        #[arg(long)]
        verify: bool,
    },
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_scheme(s: &str) -> Result<ThetaScheme, String> {
    match s {
        "random" | "random-uniform" => Ok(ThetaScheme::RandomUniform),
        "distance" | "distance-based" => Ok(ThetaScheme::DistanceBased),
        _ => Err(format!(
            "unknown theta scheme {s:?}; expected random or distance"
        )),
    }
}

fn suite_run(args: SuiteRun) -> Result<()> {
    let text = fs::read_to_string(&args.suite)
        .with_context(|| format!("reading {}", args.suite.display()))?;
    let scenarios = load_suite(&args.suite, args.master_seed)?;
    let mut opts = SuiteOptions::new(&args.out);
    opts.runs = args.runs;
    opts.master_seed = args.master_seed;
    opts.oracle = args.oracle;
    opts.threads = args.threads;
    if let Some(g) = args.generations {
        opts.sade.generations = g;
    }
    if let Some(p) = args.population {
        opts.sade.population = p;
    }
    if let Some(lp) = args.learning_period {
        opts.sade.learning_period = lp;
    }
    if let Some(w) = args.weighting {
        opts.sade.weighting = match w {
            Weighting::Centered => WeightScheme::Centered,
            Weighting::Uniform => WeightScheme::Uniform,
        };
    }
    if let Some(r) = args.replacement {
        opts.sade.replacement = match r {
            ReplacementArg::Immediate => Replacement::Immediate,
            ReplacementArg::Generational => Replacement::Generational,
        };
    }
    let outcome = run_suite(&scenarios, &text, &opts)?;
    outcome.report.render(std::io::stdout().lock())?;
    for (i, s) in scenarios.iter().enumerate() {
        eprintln!("traces: {}", scenario_dir(&args.out, i, s).display());
    }
    Ok(())
}

fn scenario_gen(args: ScenarioGen) -> Result<()> {
    let spec = ScenarioSpec {
        topology: args.topology,
        radius: args.radius,
        theta_scheme: args.theta,
        height: args.height,
        width: args.width,
        steps: args.steps,
        snr_db: (!args.noiseless).then_some(args.snr),
        seed: args.seed,
        init_seed: args.init_seed,
    };
    let data = build_dataset(&spec)?;
    let manifest = write_dataset(&data, &args.out)?;
    println!(
        "{}: {} steps, K = {}, written to {}",
        spec.label(),
        manifest.steps,
        data.truth.len(),
        args.out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Suite(SuiteCmd::Run(args)) => suite_run(args),
        Command::Scenario(ScenarioCmd::Gen(args)) => scenario_gen(args),
        Command::Traces(TracesCmd::Emit { scenario_dir, out }) => {
            let out = out.unwrap_or_else(|| scenario_dir.clone());
            let agg = traces::emit_traces_to(&scenario_dir, &out)?;
            println!(
                "{} generations written to {}",
                agg.mean_j.len(),
                out.display()
            );
            Ok(())
        }
        Command::Report(ReportCmd::Show { dir, verify }) => {
            let report = if verify {
                let r = report::verify(&dir)?;
                eprintln!("statistics match per-run results");
                r
            } else {
                SuiteReport::load(&dir)?
            };
            report.render(std::io::stdout().lock())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
