//! Phase (conventional) and sign (widely linear) ambiguity resolution.
//!
//! Each scheme produces a correction relative to the raw eigenvector:
//! a phase `θ` applied as `e^{jθ} û`, or a sign `b` applied as `b û̄`.
//! Measure-zero degeneracies (orthogonal vectors, zero coefficients) fall back
//! to `θ = 0` / `b = +1` and are flagged instead of aborting a sweep.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::channel::{complex_normal, to_real, CVector, ChannelError, ChannelRealization, RVector};
use crate::estimators::{Domain, EstimateVector, RawEstimate};

pub use crate::channel::largest_magnitude_index as largest_mag_index;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbiguityError {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("coefficient index {index} out of range for {len} antennas")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("coefficient {index} is zero, its phase is undefined")]
    ZeroCoefficient { index: usize },
    #[error("training scenario requires a pilot block")]
    MissingPilots,
    #[error("pilot count must be at least 1")]
    InvalidPilotCount,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Which side information resolves the ambiguity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Full knowledge of `h`: the distance-minimizing correction.
    Optimal,
    /// One known coefficient, zero-based index `ell`.
    Suboptimal { ell: usize },
    /// The largest-magnitude coefficient is known.
    LargestMagnitude,
    /// `k` unit pilots.
    Training { k: u32 },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Optimal => "optimal",
            Scenario::Suboptimal { .. } => "suboptimal",
            Scenario::LargestMagnitude => "largest_magnitude",
            Scenario::Training { .. } => "training",
        }
    }

    pub fn validate(&self, antennas: usize) -> Result<(), AmbiguityError> {
        match *self {
            Scenario::Suboptimal { ell } if ell >= antennas => Err(AmbiguityError::IndexOutOfRange {
                index: ell,
                len: antennas,
            }),
            Scenario::Training { k: 0 } => Err(AmbiguityError::InvalidPilotCount),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correction {
    /// Angle in `[0, 2π)`.
    Phase(f64),
    Sign(i8),
}

/// A correction value plus whether it came from a degenerate fallback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved<T> {
    pub value: T,
    pub degenerate: bool,
}

impl<T> Resolved<T> {
    fn ok(value: T) -> Self {
        Resolved {
            value,
            degenerate: false,
        }
    }

    fn fallback(value: T) -> Self {
        Resolved {
            value,
            degenerate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectedEstimate {
    pub vector: EstimateVector,
    pub correction: Correction,
    pub scenario: Scenario,
    pub degenerate: bool,
}

/// Averaged training observation `z_m = g + (1/K) Σ n_k` from `K` pilots set to +1.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotBlock {
    averaged: CVector,
    k: u32,
    sigma2: f64,
}

impl PilotBlock {
    pub fn averaged(&self) -> &CVector {
        &self.averaged
    }

    /// `z̄_m`, the real representation used for sign training.
    pub fn real_view(&self) -> RVector {
        to_real(&self.averaged)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), AmbiguityError> {
    if expected == actual {
        Ok(())
    } else {
        Err(AmbiguityError::LengthMismatch { expected, actual })
    }
}

fn phase_of(z: Complex64) -> Resolved<f64> {
    if z.norm_sqr() == 0.0 {
        Resolved::fallback(0.0)
    } else {
        Resolved::ok(wrap_angle(z.arg()))
    }
}

fn sign_of(x: f64) -> Resolved<i8> {
    if x > 0.0 {
        Resolved::ok(1)
    } else if x < 0.0 {
        Resolved::ok(-1)
    } else {
        Resolved::fallback(1)
    }
}

/// `θ_o = ∠(ûᴴ h)`, the phase minimizing `‖e^{jθ} û - h‖²`.
pub fn optimal_phase(raw: &CVector, h: &CVector) -> Result<Resolved<f64>, AmbiguityError> {
    check_len(h.len(), raw.len())?;
    Ok(phase_of(raw.dotc(h)))
}

/// `θ_s = ∠(û_ℓ* h_ℓ)`: aligns the phase of one known coefficient.
pub fn suboptimal_phase(raw: &CVector, h_ell: Complex64, ell: usize) -> Result<f64, AmbiguityError> {
    if ell >= raw.len() {
        return Err(AmbiguityError::IndexOutOfRange {
            index: ell,
            len: raw.len(),
        });
    }
    let z = raw[ell].conj() * h_ell;
    if z.norm_sqr() == 0.0 {
        return Err(AmbiguityError::ZeroCoefficient { index: ell });
    }
    Ok(wrap_angle(z.arg()))
}

/// Averages `k` pilot observations `z_k = g + n_k`.
pub fn make_pilots<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    k: u32,
    sigma2: f64,
    rng: &mut R,
) -> Result<PilotBlock, AmbiguityError> {
    if k == 0 {
        return Err(AmbiguityError::InvalidPilotCount);
    }
    if sigma2 < 0.0 || !sigma2.is_finite() {
        return Err(ChannelError::InvalidParameter {
            name: "sigma2",
            value: sigma2,
            requirement: "finite and >= 0",
        }
        .into());
    }
    let j = ch.antennas();
    let mut noise_sum = CVector::zeros(j);
    if sigma2 > 0.0 {
        for _ in 0..k {
            for z in noise_sum.iter_mut() {
                *z += complex_normal(rng, sigma2);
            }
        }
    }
    let averaged = ch.g() + noise_sum / Complex64::from(f64::from(k));
    Ok(PilotBlock { averaged, k, sigma2 })
}

/// `θ̂_o = ∠(ûᴴ z_m)`.
pub fn training_phase(raw: &CVector, pilots: &PilotBlock) -> Result<Resolved<f64>, AmbiguityError> {
    check_len(pilots.averaged.len(), raw.len())?;
    Ok(phase_of(raw.dotc(&pilots.averaged)))
}

/// `b_o = sgn(û̄ᵀ h̄)`.
pub fn optimal_sign(raw: &RVector, h_bar: &RVector) -> Result<Resolved<i8>, AmbiguityError> {
    check_len(h_bar.len(), raw.len())?;
    Ok(sign_of(raw.dot(h_bar)))
}

/// `b_s = sgn(h̄_ℓ û̄_ℓ + h̄_{J+ℓ} û̄_{J+ℓ})`, with zero-based `ell < J`.
pub fn suboptimal_sign(raw: &RVector, h_bar: &RVector, ell: usize) -> Result<Resolved<i8>, AmbiguityError> {
    check_len(h_bar.len(), raw.len())?;
    let j = raw.len() / 2;
    if ell >= j {
        return Err(AmbiguityError::IndexOutOfRange { index: ell, len: j });
    }
    Ok(sign_of(h_bar[ell] * raw[ell] + h_bar[j + ell] * raw[j + ell]))
}

/// `b̂_o = sgn(û̄ᵀ z̄_m)`.
pub fn training_sign(raw: &RVector, pilots_real: &RVector) -> Result<Resolved<i8>, AmbiguityError> {
    check_len(pilots_real.len(), raw.len())?;
    Ok(sign_of(raw.dot(pilots_real)))
}

/// Resolves the ambiguity of a raw estimate under `scenario`.
pub fn apply(
    raw: &RawEstimate,
    scenario: Scenario,
    ch: &ChannelRealization,
    pilots: Option<&PilotBlock>,
) -> Result<CorrectedEstimate, AmbiguityError> {
    scenario.validate(ch.antennas())?;
    let pilots = match scenario {
        Scenario::Training { .. } => Some(pilots.ok_or(AmbiguityError::MissingPilots)?),
        _ => None,
    };
    match &raw.vector {
        EstimateVector::Complex(u) => {
            let theta = match scenario {
                Scenario::Optimal => optimal_phase(u, ch.h())?,
                Scenario::Suboptimal { ell } => coefficient_phase(u, ch, ell),
                Scenario::LargestMagnitude => coefficient_phase(u, ch, ch.strongest()),
                Scenario::Training { .. } => training_phase(u, pilots.expect("checked above"))?,
            };
            Ok(CorrectedEstimate {
                vector: EstimateVector::Complex(u * Complex64::from_polar(1.0, theta.value)),
                correction: Correction::Phase(theta.value),
                scenario,
                degenerate: theta.degenerate,
            })
        }
        EstimateVector::Real(u) => {
            let sign = match scenario {
                Scenario::Optimal => optimal_sign(u, ch.h_bar())?,
                Scenario::Suboptimal { ell } => suboptimal_sign(u, ch.h_bar(), ell)?,
                Scenario::LargestMagnitude => suboptimal_sign(u, ch.h_bar(), ch.strongest())?,
                Scenario::Training { .. } => training_sign(u, &pilots.expect("checked above").real_view())?,
            };
            Ok(CorrectedEstimate {
                vector: EstimateVector::Real(u * f64::from(sign.value)),
                correction: Correction::Sign(sign.value),
                scenario,
                degenerate: sign.degenerate,
            })
        }
    }
}

fn coefficient_phase(u: &CVector, ch: &ChannelRealization, ell: usize) -> Resolved<f64> {
    match suboptimal_phase(u, ch.h()[ell], ell) {
        Ok(theta) => Resolved::ok(theta),
        Err(_) => Resolved::fallback(0.0),
    }
}

/// `‖corrected - truth‖²`, against `h` or `h̄` depending on the domain.
pub fn squared_error(corrected: &CorrectedEstimate, ch: &ChannelRealization) -> f64 {
    match &corrected.vector {
        EstimateVector::Complex(v) => (v - ch.h()).norm_squared(),
        EstimateVector::Real(v) => (v - ch.h_bar()).norm_squared(),
    }
}

/// Domain of the truth vector an estimate is compared against.
pub fn truth_domain(corrected: &CorrectedEstimate) -> Domain {
    corrected.vector.domain()
}
