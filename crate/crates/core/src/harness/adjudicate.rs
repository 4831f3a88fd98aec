//! Monte Carlo checks that pick between two candidate versions of two
//! closed-form results: the channel-averaged training sign-error probability
//! and the two-antenna largest-magnitude bounds.

use std::fmt;

use rayon::prelude::*;

use super::sweep::draw_gain_powers;
use super::HarnessError;
use crate::analysis::{
    delta_mse_lmag_simplified, lmag_bounds, prob_sign_error_training, prob_sign_error_unconditional, BoundsRecord,
    BoundsVariant, Flagged, SumVariant,
};
use crate::rng::{Purpose, SeedTree};

const CHUNK: usize = 4096;
/// Agreement window, in Monte Carlo standard errors.
pub const STD_ERRORS: f64 = 3.0;
/// Sample count used for the MSE difference; its sign does not depend on it.
const SAMPLES: usize = 100;

fn tag(base: u64, case: usize) -> u64 {
    (base << 32) | case as u64
}

/// Mean and standard error of `f(‖g‖², max|g_i|²)` over `draws` channel draws.
fn channel_average<F>(tree: &SeedTree, tag: u64, antennas: usize, gamma2: f64, draws: usize, f: F) -> (f64, f64)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = tree.stream(chunk as u64, tag, Purpose::Channel);
            let mut powers = vec![0.0; antennas];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..CHUNK.min(draws - chunk * CHUNK) {
                let total = draw_gain_powers(&mut rng, gamma2, &mut powers);
                let peak = powers.iter().cloned().fold(0.0, f64::max);
                let v = f(total, peak);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = parts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let n = draws as f64;
    let mean = s / n;
    let var = ((s2 - s * s / n) / (n - 1.0).max(1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignErrorCase {
    pub antennas: usize,
    pub k: u32,
    pub gamma2: f64,
    pub sigma2: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub as_printed: Flagged,
    pub power_corrected: Flagged,
}

impl SignErrorCase {
    pub fn value(&self, variant: SumVariant) -> f64 {
        match variant {
            SumVariant::AsPrinted => self.as_printed.value,
            SumVariant::PowerCorrected => self.power_corrected.value,
        }
    }

    pub fn z_score(&self, variant: SumVariant) -> f64 {
        (self.value(variant) - self.empirical) / self.std_error
    }

    pub fn matches(&self, variant: SumVariant) -> bool {
        self.z_score(variant).abs() <= STD_ERRORS
    }
}

impl fmt::Display for SignErrorCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "J={} K={} gamma2={} sigma2={}: monte_carlo={:.6e} (se {:.2e}); as_printed={:.6e} (z {:+.1}{}); power_corrected={:.6e} (z {:+.1}{})",
            self.antennas,
            self.k,
            self.gamma2,
            self.sigma2,
            self.empirical,
            self.std_error,
            self.as_printed.value,
            self.z_score(SumVariant::AsPrinted),
            if self.as_printed.valid { "" } else { ", outside validity region" },
            self.power_corrected.value,
            self.z_score(SumVariant::PowerCorrected),
            if self.power_corrected.valid { "" } else { ", outside validity region" },
        )
    }
}

/// `(J, K, σ²)` grid for the sign-error check at `γ² = 1`.
pub fn default_sign_error_grid() -> Vec<(usize, u32, f64)> {
    let mut grid = Vec::new();
    for j in 1..=3 {
        for k in 1..=2 {
            for sigma2 in [0.25, 0.5] {
                grid.push((j, k, sigma2));
            }
        }
    }
    grid
}

/// Averages the per-channel sign-error probability over channel draws and
/// sets it against both forms of the closed-form average.
pub fn adjudicate_sign_error(
    seed: u64,
    draws: usize,
    gamma2: f64,
    grid: &[(usize, u32, f64)],
) -> Result<Vec<SignErrorCase>, HarnessError> {
    let tree = SeedTree::new(seed);
    grid.iter()
        .enumerate()
        .map(|(case, &(antennas, k, sigma2))| {
            prob_sign_error_training(1.0, k, sigma2)?;
            let (empirical, std_error) = channel_average(&tree, tag(38, case), antennas, gamma2, draws, |g2, _| {
                prob_sign_error_training(g2, k, sigma2).expect("arguments validated above")
            });
            Ok(SignErrorCase {
                antennas,
                k,
                gamma2,
                sigma2,
                empirical,
                std_error,
                as_printed: prob_sign_error_unconditional(antennas, k, gamma2, sigma2, SumVariant::AsPrinted)?,
                power_corrected: prob_sign_error_unconditional(
                    antennas,
                    k,
                    gamma2,
                    sigma2,
                    SumVariant::PowerCorrected,
                )?,
            })
        })
        .collect()
}

/// The variant that matches every case, if exactly one does.
pub fn sign_error_verdict(cases: &[SignErrorCase]) -> Option<SumVariant> {
    let winners: Vec<SumVariant> = [SumVariant::AsPrinted, SumVariant::PowerCorrected]
        .into_iter()
        .filter(|&v| cases.iter().all(|c| c.matches(v)))
        .collect();
    match winners.as_slice() {
        [only] => Some(*only),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsCase {
    /// `σ²/γ²`.
    pub ratio: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub records: Vec<BoundsRecord>,
}

impl BoundsCase {
    pub fn record(&self, variant: BoundsVariant) -> Option<&BoundsRecord> {
        self.records.iter().find(|r| r.variant == variant)
    }

    /// Whether the empirical probability lies within the pair, allowing
    /// [`STD_ERRORS`] standard errors of slack.
    pub fn holds(&self, variant: BoundsVariant) -> bool {
        let slack = STD_ERRORS * self.std_error;
        self.record(variant)
            .is_some_and(|r| self.empirical + slack >= r.lower && r.upper.is_none_or(|u| self.empirical - slack <= u))
    }
}

impl fmt::Display for BoundsCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sigma2/gamma2={}: monte_carlo={:.5} (se {:.1e})",
            self.ratio, self.empirical, self.std_error
        )?;
        for r in &self.records {
            write!(
                f,
                "; {}=({:.5}, {:.5}) {}",
                r.variant.name(),
                r.lower,
                r.upper.unwrap_or(f64::NAN),
                if self.holds(r.variant) { "holds" } else { "violated" }
            )?;
        }
        Ok(())
    }
}

/// Empirical probability that WL beats conventional under largest-magnitude
/// correction at two antennas, against both candidate bound pairs.
pub fn adjudicate_lmag_bounds(seed: u64, draws: usize, ratios: &[f64]) -> Result<Vec<BoundsCase>, HarnessError> {
    let tree = SeedTree::new(seed);
    let gamma2 = 1.0;
    ratios
        .iter()
        .enumerate()
        .map(|(case, &ratio)| {
            let sigma2 = ratio * gamma2;
            let records = lmag_bounds(2, sigma2, gamma2)?;
            let (empirical, std_error) = channel_average(&tree, tag(41, case), 2, gamma2, draws, |g2, peak| {
                f64::from(u8::from(
                    delta_mse_lmag_simplified(2, SAMPLES, sigma2, g2, peak / g2) > 0.0,
                ))
            });
            Ok(BoundsCase {
                ratio,
                empirical,
                std_error,
                records,
            })
        })
        .collect()
}

/// The bound pair that holds in every case, if exactly one does.
pub fn bounds_verdict(cases: &[BoundsCase]) -> Option<BoundsVariant> {
    let winners: Vec<BoundsVariant> = [BoundsVariant::TheoremStatement, BoundsVariant::AppendixDerivation]
        .into_iter()
        .filter(|&v| cases.iter().all(|c| c.holds(v)))
        .collect();
    match winners.as_slice() {
        [only] => Some(*only),
        _ => None,
    }
}
