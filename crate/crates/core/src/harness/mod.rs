//! Experiment runner: configuration, Monte Carlo sweeps, CSV output and the
//! adjudication runs.

pub mod adjudicate;
pub mod config;
pub mod output;
pub mod sweep;

use std::io::Write;

use thiserror::Error;

pub use config::{load_config, preset, Experiment, ExperimentConfig, ScenarioKind, PRESET_NAMES};
pub use output::{emit_csv, emit_prob_csv, write_mse_csv, write_prob_csv};
pub use sweep::{run_mse_sweep, run_prob_sweep, run_theory_table, ProbRow, SummaryRow, SweepReport};

use crate::ambiguity::AmbiguityError;
use crate::analysis::AnalysisError;
use crate::channel::ChannelError;
use crate::estimators::EstimatorError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("experiment `{}` is not handled here; use the `{}` subcommand", .0.name(), .0.subcommand())]
    WrongExperiment(Experiment),
    #[error("{count} eigensolver failures exceed the limit of {max}")]
    EigenFailures { count: usize, max: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::WrongExperiment(_) => 2,
            HarnessError::EigenFailures { .. } => 3,
            _ => 1,
        }
    }
}

/// Output of any experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Mse(SweepReport<SummaryRow>),
    Prob(SweepReport<ProbRow>),
}

impl Report {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        match self {
            Report::Mse(r) => write_mse_csv(&r.rows, out),
            Report::Prob(r) => write_prob_csv(&r.rows, out),
        }
    }
}

/// Dispatches on the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    match cfg.experiment {
        Experiment::MseVsSnr | Experiment::MseVsN => run_mse_sweep(cfg).map(Report::Mse),
        Experiment::TheoryTable => run_theory_table(cfg).map(Report::Mse),
        Experiment::ProbOptimalVsJ | Experiment::ProbLmagVsJ => run_prob_sweep(cfg).map(Report::Prob),
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
/// Results never depend on the pool size.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T, HarnessError>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
