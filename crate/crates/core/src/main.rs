use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wlsubspace::ambiguity::Scenario;
use wlsubspace::analysis::{theory_mse, Estimator, TheoryQuery, TheoryVariant};
use wlsubspace::channel::sigma2_from_snr_db;
use wlsubspace::harness::adjudicate::{
    adjudicate_lmag_bounds, adjudicate_sign_error, bounds_verdict, default_sign_error_grid, sign_error_verdict,
};
use wlsubspace::harness::{
    load_config, preset, run_mse_sweep, run_prob_sweep, run_theory_table, with_threads, ExperimentConfig, HarnessError,
    Report,
};

#[derive(Parser)]
#[command(name = "wlsubspace", version, about = "Subspace channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration name.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when neither this nor the config sets one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. Affects speed only.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Conventional,
    Wl,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Optimal,
    Suboptimal,
    LargestMagnitude,
    Training,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_enum, default_value = "conventional")]
    estimator: EstimatorArg,
    #[arg(long, value_enum, default_value = "optimal")]
    scenario: ScenarioArg,
    #[arg(long, default_value_t = 5)]
    j: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Channel energy ‖g‖².
    #[arg(long, default_value_t = 5.0)]
    g_norm2: f64,
    /// Squared magnitude of the known (or largest) normalized coefficient.
    #[arg(long)]
    h_mag2: Option<f64>,
    /// Pilot count for the training scenario.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed forms for one operating point, or a theory_table config.
    Theory {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Run an MSE sweep.
    Simulate(RunArgs),
    /// Run a probability sweep.
    Prob(RunArgs),
    /// Settle the two competing closed forms by Monte Carlo.
    Adjudicate {
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        draws: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load(run: &RunArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match (&run.config, &run.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(HarnessError::Config("one of --config or --preset is required".into())),
    };
    if let Some(seed) = run.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &run.out {
        cfg.output_path = Some(out.clone());
    }
    Ok(cfg)
}

fn write_report(report: &Report, cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    match &cfg.output_path {
        Some(path) => report.write_csv(BufWriter::new(File::create(path)?)),
        None => report.write_csv(io::stdout().lock()),
    }
}

fn run_config<F>(run: &RunArgs, runner: F) -> Result<(), HarnessError>
where
    F: Fn(&ExperimentConfig) -> Result<Report, HarnessError> + Send + Sync,
{
    let cfg = load(run)?;
    let report = with_threads(run.threads, || runner(&cfg))??;
    write_report(&report, &cfg)
}

fn theory_point(q: &QueryArgs) -> Result<(), HarnessError> {
    let scenario = match q.scenario {
        ScenarioArg::Optimal => Scenario::Optimal,
        ScenarioArg::Suboptimal => Scenario::Suboptimal { ell: 0 },
        ScenarioArg::LargestMagnitude => Scenario::LargestMagnitude,
        ScenarioArg::Training => Scenario::Training { k: q.k },
    };
    let query = TheoryQuery {
        estimator: match q.estimator {
            EstimatorArg::Conventional => Estimator::Conventional,
            EstimatorArg::Wl => Estimator::Wl,
        },
        scenario,
        antennas: q.j,
        samples: q.n,
        sigma2: sigma2_from_snr_db(q.snr_db),
        g_norm2: q.g_norm2,
        h_ell_mag2: matches!(scenario, Scenario::Suboptimal { .. })
            .then_some(q.h_mag2)
            .flatten(),
        h_max_mag2: matches!(scenario, Scenario::LargestMagnitude)
            .then_some(q.h_mag2)
            .flatten(),
    };
    let mut out = io::stdout().lock();
    for (name, variant) in [
        ("exact", TheoryVariant::Exact),
        ("approx", TheoryVariant::Approx),
        ("taylor", TheoryVariant::Taylor),
    ] {
        match theory_mse(&query, variant) {
            Ok(v) => writeln!(out, "{name}={v}")?,
            Err(wlsubspace::analysis::AnalysisError::UnsupportedVariant { .. }) => {}
            Err(e) => return Err(HarnessError::Config(e.to_string())),
        }
    }
    Ok(())
}

fn adjudicate(seed: u64, draws: usize) -> Result<(), HarnessError> {
    let mut out = io::stdout().lock();
    let cases = adjudicate_sign_error(seed, draws, 1.0, &default_sign_error_grid())?;
    writeln!(
        out,
        "channel-averaged training sign-error probability ({draws} draws per case)"
    )?;
    for c in &cases {
        writeln!(out, "  {c}")?;
    }
    match sign_error_verdict(&cases) {
        Some(v) => writeln!(out, "  verdict: {} matches every case", v.name())?,
        None => writeln!(out, "  verdict: no single variant matches every case")?,
    }
    let bounds = adjudicate_lmag_bounds(seed, draws, &[0.1, 0.5, 1.0])?;
    writeln!(out, "two-antenna largest-magnitude bounds ({draws} draws per case)")?;
    for b in &bounds {
        writeln!(out, "  {b}")?;
    }
    match bounds_verdict(&bounds) {
        Some(v) => writeln!(out, "  verdict: {} holds in every case", v.name())?,
        None => writeln!(out, "  verdict: no single bound pair holds in every case")?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Theory { run, query } => {
            if run.config.is_some() || run.preset.is_some() {
                run_config(run, |cfg| run_theory_table(cfg).map(Report::Mse))
            } else {
                theory_point(query)
            }
        }
        Command::Simulate(run) => run_config(run, |cfg| run_mse_sweep(cfg).map(Report::Mse)),
        Command::Prob(run) => run_config(run, |cfg| run_prob_sweep(cfg).map(Report::Prob)),
        Command::Adjudicate { seed, draws, threads } => {
            with_threads(*threads, || adjudicate(*seed, *draws)).and_then(|r| r)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
