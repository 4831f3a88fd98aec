//! Special functions and Ricean phase statistics.
//!
//! Everything here is pure and reentrant. The checked entry points validate
//! their arguments and return [`NumericsError`]; the closed-form predictors in
//! [`crate::analysis`] call them on every evaluation.

mod bessel;
mod erf;
mod gamma;
mod ricean;

pub use bessel::{bessel_i, bessel_i_scaled, BesselOrder};
pub(crate) use erf::q_unchecked;
pub use erf::{erf, erfc, gaussian_q};
pub use gamma::{ln_gamma, reg_lower_gamma, reg_upper_gamma};
pub use ricean::{expected_cos, ricean_phase_pdf, CosineMode, RiceanParam};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("non-finite argument {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("argument {name} = {value} outside the domain ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("result overflows f64 for argument {value}")]
    Overflow { value: f64 },
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64, NumericsError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(NumericsError::NonFinite { name, value })
    }
}
