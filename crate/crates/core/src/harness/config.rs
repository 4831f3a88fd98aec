//! Experiment configuration: a flat TOML key/value file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::ambiguity::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    MseVsSnr,
    MseVsN,
    ProbOptimalVsJ,
    ProbLmagVsJ,
    TheoryTable,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MseVsSnr => "mse_vs_snr",
            Experiment::MseVsN => "mse_vs_n",
            Experiment::ProbOptimalVsJ => "prob_optimal_vs_j",
            Experiment::ProbLmagVsJ => "prob_lmag_vs_j",
            Experiment::TheoryTable => "theory_table",
        }
    }

    /// CLI subcommand that runs this experiment.
    pub fn subcommand(self) -> &'static str {
        match self {
            Experiment::MseVsSnr | Experiment::MseVsN => "simulate",
            Experiment::ProbOptimalVsJ | Experiment::ProbLmagVsJ => "prob",
            Experiment::TheoryTable => "theory",
        }
    }

    pub fn is_probability(self) -> bool {
        matches!(self, Experiment::ProbOptimalVsJ | Experiment::ProbLmagVsJ)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Optimal,
    Suboptimal,
    LargestMagnitude,
    Training,
}

impl ScenarioKind {
    /// Concrete scenario given the per-channel coefficient index and pilot count.
    pub fn resolve(self, ell: usize, k: u32) -> Scenario {
        match self {
            ScenarioKind::Optimal => Scenario::Optimal,
            ScenarioKind::Suboptimal => Scenario::Suboptimal { ell },
            ScenarioKind::LargestMagnitude => Scenario::LargestMagnitude,
            ScenarioKind::Training => Scenario::Training { k },
        }
    }
}

fn default_j() -> Vec<usize> {
    vec![5]
}
fn default_gamma2() -> f64 {
    1.0
}
fn default_channels() -> usize {
    1000
}
fn default_blocks() -> usize {
    1
}
fn default_n() -> Vec<usize> {
    vec![100]
}
fn default_snr() -> Vec<f64> {
    vec![10.0]
}
fn default_scenarios() -> Vec<ScenarioKind> {
    vec![
        ScenarioKind::Optimal,
        ScenarioKind::Suboptimal,
        ScenarioKind::LargestMagnitude,
        ScenarioKind::Training,
    ]
}
fn default_k() -> Vec<u32> {
    vec![1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Antenna counts. MSE sweeps and theory tables use exactly one.
    #[serde(default = "default_j")]
    pub j: Vec<usize>,
    #[serde(default = "default_gamma2")]
    pub gamma2: f64,
    /// Channel realizations (MSE sweeps) or channel draws per grid point
    /// (probability sweeps).
    #[serde(default = "default_channels")]
    pub channels: usize,
    #[serde(default = "default_blocks")]
    pub blocks_per_channel: usize,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_scenarios")]
    pub scenarios: Vec<ScenarioKind>,
    #[serde(default = "default_k")]
    pub k_list: Vec<u32>,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Eigensolver failures tolerated before a sweep is declared failed.
    #[serde(default)]
    pub max_eigen_failures: usize,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate().map_err(|(key, reason)| {
            let line = line_of(text, key).map_or(String::new(), |l| format!("line {l}: "));
            HarnessError::Config(format!("{line}invalid `{key}`: {reason}"))
        })?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let nonempty = |key: &'static str, len: usize| {
            if len == 0 {
                Err((key, "list must not be empty".to_string()))
            } else {
                Ok(())
            }
        };
        nonempty("j", self.j.len())?;
        nonempty("n", self.n.len())?;
        nonempty("snr_db", self.snr_db.len())?;
        nonempty("scenarios", self.scenarios.len())?;
        nonempty("k_list", self.k_list.len())?;
        if self.j.contains(&0) {
            return Err(("j", "antenna counts must be >= 1".into()));
        }
        if self.experiment.is_probability() && self.j.iter().any(|&j| j < 2) {
            return Err(("j", "probability sweeps need J >= 2".into()));
        }
        if !self.experiment.is_probability() && self.j.len() != 1 {
            return Err(("j", "MSE sweeps and theory tables take exactly one J".into()));
        }
        if self.experiment == Experiment::MseVsSnr && self.n.len() != 1 {
            return Err(("n", "mse_vs_snr takes exactly one N".into()));
        }
        if self.experiment == Experiment::MseVsN && self.snr_db.len() != 1 {
            return Err(("snr_db", "mse_vs_n takes exactly one SNR".into()));
        }
        if !(self.gamma2 > 0.0 && self.gamma2.is_finite()) {
            return Err(("gamma2", "must be finite and > 0".into()));
        }
        if self.channels == 0 {
            return Err(("channels", "must be >= 1".into()));
        }
        if self.blocks_per_channel == 0 {
            return Err(("blocks_per_channel", "must be >= 1".into()));
        }
        if self.n.contains(&0) {
            return Err(("n", "sample counts must be >= 1".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(("snr_db", "values must be numbers below +inf or +inf itself".into()));
        }
        if self.k_list.contains(&0) {
            return Err(("k_list", "pilot counts must be >= 1".into()));
        }
        Ok(())
    }
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|line| {
            line.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

pub const PRESET_NAMES: [&str; 6] = [
    "fig_mse_snr",
    "fig_mse_n",
    "fig_training_snr",
    "fig_training_n",
    "fig_prob_optimal",
    "fig_prob_lmag",
];

pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig_mse_snr" => include_str!("../../presets/fig_mse_snr.toml"),
        "fig_mse_n" => include_str!("../../presets/fig_mse_n.toml"),
        "fig_training_snr" => include_str!("../../presets/fig_training_snr.toml"),
        "fig_training_n" => include_str!("../../presets/fig_training_n.toml"),
        "fig_prob_optimal" => include_str!("../../presets/fig_prob_optimal.toml"),
        "fig_prob_lmag" => include_str!("../../presets/fig_prob_lmag.toml"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig, HarnessError> {
    let text = preset_text(name)
        .ok_or_else(|| HarnessError::Config(format!("unknown preset `{name}` (known: {})", PRESET_NAMES.join(", "))))?;
    ExperimentConfig::parse(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "experiment = \"mse_vs_snr\"\nmaster_seed = 7\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.j, vec![5]);
        assert_eq!(cfg.scenarios.len(), 4);
        assert_eq!(cfg.output_path, None);
    }

    #[test]
    fn missing_seed_is_named() {
        let err = ExperimentConfig::parse("experiment = \"mse_vs_n\"\n").unwrap_err();
        assert!(err.to_string().contains("master_seed"), "{err}");
    }

    #[test]
    fn unknown_key_cites_line_and_key() {
        let err = ExperimentConfig::parse(&format!("{MINIMAL}# note\nbogus = 3\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn validation_cites_line() {
        let err = ExperimentConfig::parse(&format!("{MINIMAL}channels = 0\n")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("channels"), "{msg}");
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}j = [2, 3]\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{MINIMAL}k_list = []\n")).is_err());
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        cfg.output_path = Some(PathBuf::from("out.csv"));
        cfg.snr_db = vec![0.0, 2.5, f64::INFINITY];
        let back = ExperimentConfig::parse(&cfg.to_text().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn presets_parse() {
        for name in PRESET_NAMES {
            preset(name).unwrap();
        }
        assert!(preset("nope").is_err());
    }
}
