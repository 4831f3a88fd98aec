//! CSV emission. Floats use Rust's shortest round-trip formatting; absent
//! values are empty cells.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::sweep::{ProbRow, SummaryRow};
use super::HarnessError;
use crate::harness::config::ScenarioKind;

pub const MSE_HEADER: [&str; 9] = [
    "x",
    "estimator",
    "scenario",
    "K",
    "empirical_mse",
    "theory_exact",
    "theory_approx",
    "std_error",
    "trials",
];

pub const PROB_HEADER: [&str; 8] = [
    "J",
    "snr_db",
    "p_empirical",
    "p_theory",
    "bound_lower",
    "bound_upper",
    "bound_loose",
    "trials",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn scenario_label(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::Optimal => "optimal",
        ScenarioKind::Suboptimal => "suboptimal",
        ScenarioKind::LargestMagnitude => "largest_magnitude",
        ScenarioKind::Training => "training",
    }
}

pub fn write_mse_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MSE_HEADER)?;
    for r in rows {
        w.write_record([
            r.x.to_string(),
            r.estimator.name().to_string(),
            scenario_label(r.scenario).to_string(),
            cell(r.k),
            cell(r.empirical_mse),
            r.theory_exact.to_string(),
            r.theory_approx.to_string(),
            cell(r.std_error),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_prob_csv<W: Write>(rows: &[ProbRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROB_HEADER)?;
    for r in rows {
        w.write_record([
            r.j.to_string(),
            r.snr_db.to_string(),
            r.p_empirical.to_string(),
            cell(r.p_theory),
            cell(r.bound_lower),
            cell(r.bound_upper),
            cell(r.bound_loose),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(rows: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    write_mse_csv(rows, File::create(path)?)
}

pub fn emit_prob_csv(rows: &[ProbRow], path: &Path) -> Result<(), HarnessError> {
    write_prob_csv(rows, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Estimator;

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_mse_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,estimator,scenario,K,empirical_mse,theory_exact,theory_approx,std_error,trials\n"
        );
        let mut buf = Vec::new();
        write_prob_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "J,snr_db,p_empirical,p_theory,bound_lower,bound_upper,bound_loose,trials\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        let row = SummaryRow {
            x: 12.5,
            estimator: Estimator::Wl,
            scenario: ScenarioKind::Training,
            k: Some(5),
            empirical_mse: Some(0.1 + 0.2),
            theory_exact: 1.0 / 3.0,
            theory_approx: 2e-17,
            std_error: None,
            trials: 10,
        };
        let mut buf = Vec::new();
        write_mse_csv(std::slice::from_ref(&row), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[1], "wl");
        assert_eq!(fields[2], "training");
        assert_eq!(fields[3], "5");
        assert_eq!(fields[4].parse::<f64>().unwrap(), row.empirical_mse.unwrap());
        assert_eq!(fields[5].parse::<f64>().unwrap(), row.theory_exact);
        assert_eq!(fields[7], "");
    }
}
