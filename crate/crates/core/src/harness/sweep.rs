//! Monte Carlo sweeps over SNR, sample size and antenna count.
//!
//! Every random draw comes from a [`SeedTree`] substream keyed by channel and
//! block index, so results do not depend on how rayon schedules the work.
//! Per-channel tallies are collected in index order and reduced sequentially.

use rand::Rng;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig, ScenarioKind};
use super::HarnessError;
use crate::ambiguity::{apply, make_pilots, squared_error, PilotBlock};
use crate::analysis::{
    delta_mse_lmag_simplified, delta_mse_optimal, lmag_bounds, prob_wl_wins_optimal, theory_mse, BoundsVariant,
    Estimator, TheoryQuery, TheoryVariant,
};
use crate::channel::{complex_normal, draw_block_split, draw_channel, sigma2_from_snr_db, ChannelRealization};
use crate::estimators::{conventional_estimate, wl_estimate, EstimatorError, RawEstimate};
use crate::rng::{Purpose, SeedTree};

/// Channel draws per substream in probability sweeps.
const DRAW_CHUNK: usize = 4096;

/// One line of an MSE sweep or theory table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// SNR in dB or sample count, depending on the experiment.
    pub x: f64,
    pub estimator: Estimator,
    pub scenario: ScenarioKind,
    pub k: Option<u32>,
    pub empirical_mse: Option<f64>,
    pub theory_exact: f64,
    pub theory_approx: f64,
    pub std_error: Option<f64>,
    pub trials: u64,
}

/// One line of a probability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbRow {
    pub j: usize,
    pub snr_db: f64,
    pub p_empirical: f64,
    pub p_theory: Option<f64>,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub bound_loose: Option<f64>,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<R> {
    pub rows: Vec<R>,
    pub eigen_failures: usize,
    /// Corrections that hit a measure-zero fallback.
    pub degenerate: usize,
}

/// An (estimator, scenario, pilot count) combination reported as one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowKey {
    pub estimator: Estimator,
    pub kind: ScenarioKind,
    pub k: Option<u32>,
}

pub fn row_keys(cfg: &ExperimentConfig) -> Vec<RowKey> {
    let mut keys = Vec::new();
    for estimator in [Estimator::Conventional, Estimator::Wl] {
        for &kind in &cfg.scenarios {
            if kind == ScenarioKind::Training {
                keys.extend(cfg.k_list.iter().map(|&k| RowKey {
                    estimator,
                    kind,
                    k: Some(k),
                }));
            } else {
                keys.push(RowKey {
                    estimator,
                    kind,
                    k: None,
                });
            }
        }
    }
    keys
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub samples: usize,
    pub sigma2: f64,
}

pub fn grid(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    match cfg.experiment {
        Experiment::MseVsN => cfg
            .n
            .iter()
            .map(|&n| GridPoint {
                x: n as f64,
                samples: n,
                sigma2: sigma2_from_snr_db(cfg.snr_db[0]),
            })
            .collect(),
        _ => cfg
            .snr_db
            .iter()
            .map(|&s| GridPoint {
                x: s,
                samples: cfg.n[0],
                sigma2: sigma2_from_snr_db(s),
            })
            .collect(),
    }
}

/// A channel realization together with its randomly chosen known coefficient.
#[derive(Debug, Clone)]
pub struct SweepChannel {
    pub realization: ChannelRealization,
    pub ell: usize,
}

pub fn sweep_channel(tree: &SeedTree, index: u64, antennas: usize, gamma2: f64) -> Result<SweepChannel, HarnessError> {
    let mut rng = tree.stream(index, 0, Purpose::Channel);
    let realization = draw_channel(antennas, gamma2, &mut rng)?;
    let ell = rng.random_range(0..antennas);
    Ok(SweepChannel { realization, ell })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Squared error per row key, in key order.
    pub errors: Vec<f64>,
    pub degenerate: usize,
}

/// One paired trial: both estimators see the same block, and every
/// training row sees the same pilot stream.
pub fn run_trial(
    tree: &SeedTree,
    channel: &SweepChannel,
    channel_index: u64,
    block_index: u64,
    samples: usize,
    sigma2: f64,
    keys: &[RowKey],
) -> Result<Trial, HarnessError> {
    let ch = &channel.realization;
    let block = draw_block_split(
        ch,
        samples,
        sigma2,
        &mut tree.stream(channel_index, block_index, Purpose::Symbols),
        &mut tree.stream(channel_index, block_index, Purpose::Noise),
    )?;
    let conventional = conventional_estimate(&block)?;
    let wl = wl_estimate(&block)?;
    let mut pilots: Vec<(u32, PilotBlock)> = Vec::new();
    let mut errors = Vec::with_capacity(keys.len());
    let mut degenerate = 0;
    for key in keys {
        let k = key.k.unwrap_or(1);
        let pilot = match key.kind {
            ScenarioKind::Training => Some(pilot_block(
                &mut pilots,
                tree,
                ch,
                channel_index,
                block_index,
                k,
                sigma2,
            )?),
            _ => None,
        };
        let raw: &RawEstimate = match key.estimator {
            Estimator::Conventional => &conventional,
            Estimator::Wl => &wl,
        };
        let corrected = apply(raw, key.kind.resolve(channel.ell, k), ch, pilot)?;
        degenerate += usize::from(corrected.degenerate);
        errors.push(squared_error(&corrected, ch));
    }
    Ok(Trial { errors, degenerate })
}

fn pilot_block<'a>(
    cache: &'a mut Vec<(u32, PilotBlock)>,
    tree: &SeedTree,
    ch: &ChannelRealization,
    channel_index: u64,
    block_index: u64,
    k: u32,
    sigma2: f64,
) -> Result<&'a PilotBlock, HarnessError> {
    let pos = match cache.iter().position(|(kk, _)| *kk == k) {
        Some(pos) => pos,
        None => {
            let mut rng = tree.stream(channel_index, block_index, Purpose::Pilots);
            cache.push((k, make_pilots(ch, k, sigma2, &mut rng)?));
            cache.len() - 1
        }
    };
    Ok(&cache[pos].1)
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    fn std_error(&self) -> Option<f64> {
        if self.count < 2 {
            return (self.count == 1).then_some(0.0);
        }
        let n = self.count as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        Some((var / n).sqrt())
    }
}

/// Sums for one channel, laid out `[point][key]`.
struct ChannelTally {
    moments: Vec<Moments>,
    theory_exact: Vec<f64>,
    theory_approx: Vec<f64>,
    eigen_failures: usize,
    degenerate: usize,
}

fn theory_pair(query: &TheoryQuery) -> Result<(f64, f64), HarnessError> {
    Ok((
        theory_mse(query, TheoryVariant::Exact)?,
        theory_mse(query, TheoryVariant::Approx)?,
    ))
}

fn query_for(key: &RowKey, channel: &SweepChannel, point: &GridPoint) -> TheoryQuery {
    TheoryQuery::for_channel(
        key.estimator,
        key.kind.resolve(channel.ell, key.k.unwrap_or(1)),
        &channel.realization,
        point.samples,
        point.sigma2,
    )
}

fn tally_channel(
    cfg: &ExperimentConfig,
    tree: &SeedTree,
    keys: &[RowKey],
    points: &[GridPoint],
    index: u64,
) -> Result<ChannelTally, HarnessError> {
    let channel = sweep_channel(tree, index, cfg.j[0], cfg.gamma2)?;
    let cells = points.len() * keys.len();
    let mut tally = ChannelTally {
        moments: vec![Moments::default(); cells],
        theory_exact: vec![0.0; cells],
        theory_approx: vec![0.0; cells],
        eigen_failures: 0,
        degenerate: 0,
    };
    for (p, point) in points.iter().enumerate() {
        let cell = &mut tally.moments[p * keys.len()..(p + 1) * keys.len()];
        let mut completed = 0u64;
        for b in 0..cfg.blocks_per_channel as u64 {
            match run_trial(tree, &channel, index, b, point.samples, point.sigma2, keys) {
                Ok(trial) => {
                    for (m, e) in cell.iter_mut().zip(&trial.errors) {
                        m.push(*e);
                    }
                    tally.degenerate += trial.degenerate;
                    completed += 1;
                }
                Err(HarnessError::Estimator(EstimatorError::NoConvergence { iterations })) => {
                    log::warn!("eigensolver gave up after {iterations} sweeps (channel {index}, block {b})");
                    tally.eigen_failures += 1;
                }
                Err(e) => return Err(e),
            }
        }
        for (i, key) in keys.iter().enumerate() {
            let (exact, approx) = theory_pair(&query_for(key, &channel, point))?;
            tally.theory_exact[p * keys.len() + i] = exact * completed as f64;
            tally.theory_approx[p * keys.len() + i] = approx * completed as f64;
        }
    }
    Ok(tally)
}

/// Paired conventional/WL Monte Carlo over the configured grid.
pub fn run_mse_sweep(cfg: &ExperimentConfig) -> Result<SweepReport<SummaryRow>, HarnessError> {
    if !matches!(cfg.experiment, Experiment::MseVsSnr | Experiment::MseVsN) {
        return Err(HarnessError::WrongExperiment(cfg.experiment));
    }
    let tree = SeedTree::new(cfg.master_seed);
    let keys = row_keys(cfg);
    let points = grid(cfg);
    let tallies: Vec<Result<ChannelTally, HarnessError>> = (0..cfg.channels as u64)
        .into_par_iter()
        .map(|c| tally_channel(cfg, &tree, &keys, &points, c))
        .collect();

    let cells = points.len() * keys.len();
    let mut moments = vec![Moments::default(); cells];
    let mut exact = vec![0.0; cells];
    let mut approx = vec![0.0; cells];
    let mut eigen_failures = 0;
    let mut degenerate = 0;
    for tally in tallies {
        let tally = tally?;
        for i in 0..cells {
            moments[i].merge(&tally.moments[i]);
            exact[i] += tally.theory_exact[i];
            approx[i] += tally.theory_approx[i];
        }
        eigen_failures += tally.eigen_failures;
        degenerate += tally.degenerate;
    }
    if eigen_failures > cfg.max_eigen_failures {
        return Err(HarnessError::EigenFailures {
            count: eigen_failures,
            max: cfg.max_eigen_failures,
        });
    }
    if degenerate > 0 {
        log::info!("{degenerate} corrections used the degenerate fallback");
    }

    let mut rows = Vec::with_capacity(cells);
    for (p, point) in points.iter().enumerate() {
        for (i, key) in keys.iter().enumerate() {
            let m = &moments[p * keys.len() + i];
            let n = m.count.max(1) as f64;
            rows.push(SummaryRow {
                x: point.x,
                estimator: key.estimator,
                scenario: key.kind,
                k: key.k,
                empirical_mse: m.mean(),
                theory_exact: exact[p * keys.len() + i] / n,
                theory_approx: approx[p * keys.len() + i] / n,
                std_error: m.std_error(),
                trials: m.count,
            });
        }
    }
    Ok(SweepReport {
        rows,
        eigen_failures,
        degenerate,
    })
}

/// Closed-form values averaged over the configured channel draws, without simulation.
pub fn run_theory_table(cfg: &ExperimentConfig) -> Result<SweepReport<SummaryRow>, HarnessError> {
    if cfg.experiment != Experiment::TheoryTable {
        return Err(HarnessError::WrongExperiment(cfg.experiment));
    }
    let tree = SeedTree::new(cfg.master_seed);
    let keys = row_keys(cfg);
    let points = grid(cfg);
    let per_channel: Vec<Result<Vec<(f64, f64)>, HarnessError>> = (0..cfg.channels as u64)
        .into_par_iter()
        .map(|c| {
            let channel = sweep_channel(&tree, c, cfg.j[0], cfg.gamma2)?;
            let mut out = Vec::with_capacity(points.len() * keys.len());
            for point in &points {
                for key in &keys {
                    out.push(theory_pair(&query_for(key, &channel, point))?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut sums = vec![(0.0, 0.0); points.len() * keys.len()];
    for values in per_channel {
        for (s, v) in sums.iter_mut().zip(values?) {
            s.0 += v.0;
            s.1 += v.1;
        }
    }
    let n = cfg.channels as f64;
    let mut rows = Vec::with_capacity(sums.len());
    for (p, point) in points.iter().enumerate() {
        for (i, key) in keys.iter().enumerate() {
            let (e, a) = sums[p * keys.len() + i];
            rows.push(SummaryRow {
                x: point.x,
                estimator: key.estimator,
                scenario: key.kind,
                k: key.k,
                empirical_mse: None,
                theory_exact: e / n,
                theory_approx: a / n,
                std_error: None,
                trials: 0,
            });
        }
    }
    Ok(SweepReport {
        rows,
        eigen_failures: 0,
        degenerate: 0,
    })
}

/// Fills `powers` with `|g_i|²` for a fresh `CN(0, γ²)` channel and returns `‖g‖²`.
pub(crate) fn draw_gain_powers<R: Rng + ?Sized>(rng: &mut R, gamma2: f64, powers: &mut [f64]) -> f64 {
    loop {
        for p in powers.iter_mut() {
            *p = complex_normal(rng, gamma2).norm_sqr();
        }
        let total: f64 = powers.iter().sum();
        if total > 0.0 {
            return total;
        }
    }
}

/// Counts draws satisfying `event(‖g‖², max|g_i|², J)` over `draws` channels,
/// in chunks keyed by `(chunk, tag)`.
pub(crate) fn count_channel_events<F>(
    tree: &SeedTree,
    tag: u64,
    antennas: usize,
    gamma2: f64,
    draws: usize,
    event: F,
) -> u64
where
    F: Fn(f64, f64) -> bool + Sync,
{
    let chunks = draws.div_ceil(DRAW_CHUNK);
    let counts: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = tree.stream(chunk as u64, tag, Purpose::Channel);
            let mut powers = vec![0.0; antennas];
            let len = DRAW_CHUNK.min(draws - chunk * DRAW_CHUNK);
            let mut count = 0;
            for _ in 0..len {
                let total = draw_gain_powers(&mut rng, gamma2, &mut powers);
                let peak = powers.iter().cloned().fold(0.0, f64::max);
                count += u64::from(event(total, peak));
            }
            count
        })
        .collect();
    counts.iter().sum()
}

/// Empirical probability that WL beats conventional, from the closed-form
/// MSEs evaluated per channel draw.
pub fn run_prob_sweep(cfg: &ExperimentConfig) -> Result<SweepReport<ProbRow>, HarnessError> {
    let optimal = match cfg.experiment {
        Experiment::ProbOptimalVsJ => true,
        Experiment::ProbLmagVsJ => false,
        other => return Err(HarnessError::WrongExperiment(other)),
    };
    let tree = SeedTree::new(cfg.master_seed);
    let samples = cfg.n[0];
    let mut rows = Vec::new();
    for &j in &cfg.j {
        for &snr in &cfg.snr_db {
            let sigma2 = sigma2_from_snr_db(snr);
            let wins = count_channel_events(&tree, j as u64, j, cfg.gamma2, cfg.channels, |g2, peak| {
                if optimal {
                    delta_mse_optimal(j, samples, sigma2, g2) > 0.0
                } else {
                    delta_mse_lmag_simplified(j, samples, sigma2, g2, peak / g2) > 0.0
                }
            });
            let mut row = ProbRow {
                j,
                snr_db: snr,
                p_empirical: wins as f64 / cfg.channels as f64,
                p_theory: None,
                bound_lower: None,
                bound_upper: None,
                bound_loose: None,
                trials: cfg.channels as u64,
            };
            if optimal {
                row.p_theory = Some(prob_wl_wins_optimal(j, sigma2, cfg.gamma2)?);
            } else {
                let bounds = lmag_bounds(j, sigma2, cfg.gamma2)?;
                let stated = bounds
                    .iter()
                    .find(|b| b.variant == BoundsVariant::TheoremStatement)
                    .expect("theorem-statement bounds are always present");
                row.bound_lower = Some(stated.lower);
                row.bound_upper = stated.upper;
                row.bound_loose = (j >= 3).then_some(stated.looser_lower);
            }
            rows.push(row);
        }
    }
    Ok(SweepReport {
        rows,
        eigen_failures: 0,
        degenerate: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::parse("experiment = \"mse_vs_snr\"\nmaster_seed = 11\n").unwrap();
        cfg.channels = 6;
        cfg.blocks_per_channel = 2;
        cfg.n = vec![40];
        cfg.snr_db = vec![5.0, 15.0];
        cfg.k_list = vec![1, 3];
        cfg
    }

    #[test]
    fn keys_expand_training() {
        let keys = row_keys(&small_cfg());
        assert_eq!(keys.len(), 2 * 5);
        assert_eq!(keys[3].k, Some(1));
        assert_eq!(keys[4].k, Some(3));
    }

    #[test]
    fn noiseless_sweep_is_exact() {
        let mut cfg = small_cfg();
        cfg.snr_db = vec![f64::INFINITY];
        let report = run_mse_sweep(&cfg).unwrap();
        for row in &report.rows {
            assert!(row.empirical_mse.unwrap() < 1e-24, "{row:?}");
            assert_eq!(row.theory_exact, 0.0);
            assert_eq!(row.trials, 12);
        }
    }

    #[test]
    fn sweep_matches_serial_recomputation() {
        let cfg = small_cfg();
        let report = run_mse_sweep(&cfg).unwrap();
        let tree = SeedTree::new(cfg.master_seed);
        let keys = row_keys(&cfg);
        let point = grid(&cfg)[1];
        let mut sums = vec![0.0; keys.len()];
        for c in 0..cfg.channels as u64 {
            let ch = sweep_channel(&tree, c, 5, 1.0).unwrap();
            for b in 0..cfg.blocks_per_channel as u64 {
                let t = run_trial(&tree, &ch, c, b, point.samples, point.sigma2, &keys).unwrap();
                for (s, e) in sums.iter_mut().zip(t.errors) {
                    *s += e;
                }
            }
        }
        for (i, s) in sums.iter().enumerate() {
            let row = &report.rows[keys.len() + i];
            assert!((row.empirical_mse.unwrap() - s / 12.0).abs() <= 1e-15 * s.abs());
        }
    }

    #[test]
    fn wrong_experiment_rejected() {
        let cfg = small_cfg();
        assert!(matches!(run_prob_sweep(&cfg), Err(HarnessError::WrongExperiment(_))));
        assert!(run_theory_table(&cfg).is_err());
    }

    #[test]
    fn theory_table_has_no_empirical_columns() {
        let mut cfg = small_cfg();
        cfg.experiment = Experiment::TheoryTable;
        let report = run_theory_table(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.empirical_mse.is_none() && r.trials == 0));
        assert!(report.rows.iter().all(|r| r.theory_exact > 0.0));
    }

    #[test]
    fn prob_rows_have_expected_columns() {
        let mut cfg = small_cfg();
        cfg.experiment = Experiment::ProbLmagVsJ;
        cfg.j = vec![2, 4];
        cfg.channels = 5000;
        let report = run_prob_sweep(&cfg).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows[0].bound_upper.is_some() && report.rows[0].bound_loose.is_none());
        assert!(report.rows[2].bound_upper.is_none() && report.rows[2].bound_loose == Some(0.5));
        cfg.experiment = Experiment::ProbOptimalVsJ;
        let report = run_prob_sweep(&cfg).unwrap();
        assert!(report.rows.iter().all(|r| r.p_theory.is_some()));
    }
}
