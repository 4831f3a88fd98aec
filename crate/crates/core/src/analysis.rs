//! Closed-form MSE predictions, estimator-comparison probabilities and the
//! first-order perturbation quantities behind them.
//!
//! Two scale factors recur everywhere:
//! `c = (σ²‖g‖² + σ⁴) / (N‖g‖⁴)` for the conventional estimator and
//! `c_r = (σ²‖g‖²/2 + σ⁴/4) / (N‖g‖⁴)` for the widely linear one.

use num_complex::Complex64;
use thiserror::Error;

use crate::ambiguity::{CorrectedEstimate, Scenario};
use crate::channel::{CMatrix, ChannelRealization, RMatrix};
use crate::estimators::EstimateVector;
use crate::numerics::{expected_cos, q_unchecked, reg_lower_gamma, CosineMode, NumericsError, RiceanParam};

/// Tolerance for the unit-norm and real-inner-product checks on corrected estimates.
const DECOMPOSITION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{scenario} scenario requires `{name}`")]
    MissingParameter { scenario: &'static str, name: &'static str },
    #[error("invalid {name} = {value}: must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("variant {variant:?} is not defined for {estimator:?}/{scenario}")]
    UnsupportedVariant {
        variant: TheoryVariant,
        estimator: Estimator,
        scenario: &'static str,
    },
    #[error("queries do not describe the same operating point: {0}")]
    MismatchedQueries(&'static str),
    #[error("estimate norm {norm} is not 1")]
    NonUnit { norm: f64 },
    #[error("estimate is not optimally corrected: inner product with truth is {re}{im:+}i")]
    NotOptimallyCorrected { re: f64, im: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

fn invalid(name: &'static str, value: f64, requirement: &'static str) -> AnalysisError {
    AnalysisError::InvalidParameter {
        name,
        value,
        requirement,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Conventional,
    Wl,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Conventional => "conventional",
            Estimator::Wl => "wl",
        }
    }
}

/// Which approximation layer to evaluate. `Exact` uses the Bessel form of
/// `E[cos]`, `Approx` the `e^{-1/(4ρ)}` form, and `Taylor` the linearized
/// largest-magnitude expression. Scenarios without an `E[cos]` term give the
/// same value for `Exact` and `Approx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoryVariant {
    Exact,
    Approx,
    Taylor,
}

/// Operating point for a closed-form MSE evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryQuery {
    pub estimator: Estimator,
    pub scenario: Scenario,
    pub antennas: usize,
    pub samples: usize,
    pub sigma2: f64,
    pub g_norm2: f64,
    /// `|h_ℓ|²`, needed by the suboptimal scenario.
    pub h_ell_mag2: Option<f64>,
    /// `|h_L|²`, needed by the largest-magnitude scenario.
    pub h_max_mag2: Option<f64>,
}

impl TheoryQuery {
    /// Fills every channel functional from a realization.
    pub fn for_channel(
        estimator: Estimator,
        scenario: Scenario,
        ch: &ChannelRealization,
        samples: usize,
        sigma2: f64,
    ) -> Self {
        let h_ell_mag2 = match scenario {
            Scenario::Suboptimal { ell } if ell < ch.antennas() => Some(ch.h_mag2(ell)),
            _ => None,
        };
        TheoryQuery {
            estimator,
            scenario,
            antennas: ch.antennas(),
            samples,
            sigma2,
            g_norm2: ch.g_norm2(),
            h_ell_mag2,
            h_max_mag2: Some(ch.h_mag2(ch.strongest())),
        }
    }

    pub fn with_estimator(self, estimator: Estimator) -> Self {
        TheoryQuery { estimator, ..self }
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        if self.antennas == 0 {
            return Err(invalid("antennas", 0.0, ">= 1"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", 0.0, ">= 1"));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(invalid("sigma2", self.sigma2, "finite and >= 0"));
        }
        if !(self.g_norm2 > 0.0 && self.g_norm2.is_finite()) {
            return Err(invalid("g_norm2", self.g_norm2, "finite and > 0"));
        }
        for (name, value) in [("h_ell_mag2", self.h_ell_mag2), ("h_max_mag2", self.h_max_mag2)] {
            if let Some(v) = value {
                if !(v > 0.0 && v <= 1.0 + 1e-12) {
                    return Err(invalid(name, v, "in (0, 1]"));
                }
            }
        }
        if let Some(v) = self.h_max_mag2 {
            if v < 1.0 / self.antennas as f64 - 1e-12 {
                return Err(invalid("h_max_mag2", v, ">= 1/J"));
            }
        }
        Ok(())
    }

    fn required(&self, value: Option<f64>, name: &'static str) -> Result<f64, AnalysisError> {
        value.ok_or(AnalysisError::MissingParameter {
            scenario: self.scenario.name(),
            name,
        })
    }
}

/// `c` or `c_r`: the per-dimension error scale of the optimally corrected estimate.
pub fn perturbation_scale(estimator: Estimator, samples: usize, sigma2: f64, g_norm2: f64) -> f64 {
    let n = samples as f64;
    let s4 = sigma2 * sigma2;
    match estimator {
        Estimator::Conventional => (sigma2 * g_norm2 + s4) / (n * g_norm2 * g_norm2),
        Estimator::Wl => (sigma2 * g_norm2 / 2.0 + s4 / 4.0) / (n * g_norm2 * g_norm2),
    }
}

fn optimal_mse(q: &TheoryQuery) -> f64 {
    let j = q.antennas as f64;
    let scale = perturbation_scale(q.estimator, q.samples, q.sigma2, q.g_norm2);
    match q.estimator {
        Estimator::Conventional => (j - 1.0) * scale,
        Estimator::Wl => (2.0 * j - 1.0) * scale,
    }
}

/// `2 - 2 E[cos ϑ]` for a Ricean phase with parameter `rho`; zero in the
/// `rho → ∞` limit.
fn phase_penalty(rho: f64, variant: TheoryVariant) -> Result<f64, AnalysisError> {
    if rho.is_infinite() {
        return Ok(0.0);
    }
    let e = match variant {
        TheoryVariant::Approx => return Ok(-2.0 * (-0.25 / rho).exp_m1()),
        _ => expected_cos(RiceanParam::new(rho)?, CosineMode::Exact)?,
    };
    Ok(2.0 - 2.0 * e)
}

/// Ricean parameter of the coefficient-based phase error.
fn coefficient_rho(scale: f64, mag2: f64) -> f64 {
    if mag2 >= 1.0 || scale == 0.0 {
        f64::INFINITY
    } else {
        mag2 / (scale * (1.0 - mag2))
    }
}

/// `4 - 4Q(-√x)`, evaluated as `4Q(√x)` to keep precision in the tail.
fn sign_penalty(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        4.0 * q_unchecked(x.sqrt())
    }
}

/// Closed-form MSE of one estimator under one ambiguity-resolution scenario.
/// Penalty terms vanish when `|h|² = 1` or `σ² = 0`, returning the optimal value.
pub fn theory_mse(q: &TheoryQuery, variant: TheoryVariant) -> Result<f64, AnalysisError> {
    q.validate()?;
    let base = optimal_mse(q);
    let scale = perturbation_scale(q.estimator, q.samples, q.sigma2, q.g_norm2);
    let unsupported = || AnalysisError::UnsupportedVariant {
        variant,
        estimator: q.estimator,
        scenario: q.scenario.name(),
    };
    let taylor_ok = matches!(
        (q.estimator, q.scenario),
        (Estimator::Conventional, Scenario::LargestMagnitude)
    );
    if variant == TheoryVariant::Taylor && !taylor_ok {
        return Err(unsupported());
    }

    match (q.estimator, q.scenario) {
        (_, Scenario::Optimal) => Ok(base),
        (Estimator::Conventional, Scenario::Suboptimal { .. }) => {
            let mag2 = q.required(q.h_ell_mag2, "h_ell_mag2")?;
            Ok(base + phase_penalty(coefficient_rho(scale, mag2), variant)?)
        }
        (Estimator::Conventional, Scenario::LargestMagnitude) => {
            let mag2 = q.required(q.h_max_mag2, "h_max_mag2")?;
            if variant == TheoryVariant::Taylor {
                let j = q.antennas as f64;
                return Ok(scale * (j + 0.5 / mag2 - 1.5));
            }
            Ok(base + phase_penalty(coefficient_rho(scale, mag2), variant)?)
        }
        (Estimator::Conventional, Scenario::Training { k }) => {
            let rho = training_rho(k, q.g_norm2, q.sigma2)?;
            Ok(base + phase_penalty(rho, variant)?)
        }
        (Estimator::Wl, Scenario::Suboptimal { .. }) => {
            let mag2 = q.required(q.h_ell_mag2, "h_ell_mag2")?;
            Ok(base + sign_penalty(coefficient_rho(scale, mag2)))
        }
        (Estimator::Wl, Scenario::LargestMagnitude) => {
            let mag2 = q.required(q.h_max_mag2, "h_max_mag2")?;
            Ok(base + sign_penalty(coefficient_rho(scale, mag2)))
        }
        (Estimator::Wl, Scenario::Training { k }) => Ok(base + 4.0 * prob_sign_error_training(q.g_norm2, k, q.sigma2)?),
    }
}

fn training_rho(k: u32, g_norm2: f64, sigma2: f64) -> Result<f64, AnalysisError> {
    if k == 0 {
        return Err(invalid("K", 0.0, ">= 1"));
    }
    if sigma2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(RiceanParam::from_training(k, g_norm2, sigma2)?.rho())
}

/// Split of an optimally corrected estimate: `estimate = truth + q + alpha·truth`
/// with `q ⟂ truth` and `alpha` real.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    pub q: EstimateVector,
    pub alpha: f64,
}

pub fn error_decomposition(
    corrected: &CorrectedEstimate,
    ch: &ChannelRealization,
) -> Result<ErrorDecomposition, AnalysisError> {
    let norm = corrected.vector.norm();
    if (norm - 1.0).abs() > DECOMPOSITION_TOL {
        return Err(AnalysisError::NonUnit { norm });
    }
    match &corrected.vector {
        EstimateVector::Complex(v) => {
            let h = ch.h();
            let inner = h.dotc(v);
            if inner.im.abs() > DECOMPOSITION_TOL || inner.re < -DECOMPOSITION_TOL {
                return Err(AnalysisError::NotOptimallyCorrected {
                    re: inner.re,
                    im: inner.im,
                });
            }
            let q = v - h * Complex64::from(inner.re);
            Ok(ErrorDecomposition {
                q: EstimateVector::Complex(q),
                alpha: inner.re - 1.0,
            })
        }
        EstimateVector::Real(v) => {
            let h = ch.h_bar();
            let inner = h.dot(v);
            if inner < -DECOMPOSITION_TOL {
                return Err(AnalysisError::NotOptimallyCorrected { re: inner, im: 0.0 });
            }
            Ok(ErrorDecomposition {
                q: EstimateVector::Real(v - h * inner),
                alpha: inner - 1.0,
            })
        }
    }
}

/// `E[q qᴴ] ≈ c (I - h hᴴ)`.
pub fn conventional_error_covariance(ch: &ChannelRealization, samples: usize, sigma2: f64) -> CMatrix {
    let j = ch.antennas();
    let scale = perturbation_scale(Estimator::Conventional, samples, sigma2, ch.g_norm2());
    let h = ch.h();
    (CMatrix::identity(j, j) - h * h.adjoint()) * Complex64::from(scale)
}

/// `E[q̄ q̄ᵀ] ≈ c_r (I - h̄ h̄ᵀ)`.
pub fn wl_error_covariance(ch: &ChannelRealization, samples: usize, sigma2: f64) -> RMatrix {
    let j = 2 * ch.antennas();
    let scale = perturbation_scale(Estimator::Wl, samples, sigma2, ch.g_norm2());
    let h = ch.h_bar();
    (RMatrix::identity(j, j) - h * h.transpose()) * scale
}

/// `E[|q_ℓ|²] ≈ c (1 - |h_ℓ|²)`.
pub fn coefficient_error_variance(ch: &ChannelRealization, samples: usize, sigma2: f64, ell: usize) -> f64 {
    perturbation_scale(Estimator::Conventional, samples, sigma2, ch.g_norm2()) * (1.0 - ch.h_mag2(ell))
}

/// `E[q̃_ℓ²] ≈ c_r (|h_ℓ|² - |h_ℓ|⁴)` for `q̃_ℓ = q̄_ℓ h̄_ℓ + q̄_{J+ℓ} h̄_{J+ℓ}`.
pub fn projected_error_variance(ch: &ChannelRealization, samples: usize, sigma2: f64, ell: usize) -> f64 {
    let m = ch.h_mag2(ell);
    perturbation_scale(Estimator::Wl, samples, sigma2, ch.g_norm2()) * (m - m * m)
}

/// Which MSE difference to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaForm {
    Optimal,
    /// Conventional Taylor form minus the WL largest-magnitude form.
    LargestMagnitudeFull,
    /// Same, with the WL sign-error term dropped.
    LargestMagnitudeSimplified,
}

/// `(-σ²‖g‖²/2 + σ⁴(J/2 - 3/4)) / (N‖g‖⁴)`.
pub fn delta_mse_optimal(antennas: usize, samples: usize, sigma2: f64, g_norm2: f64) -> f64 {
    let j = antennas as f64;
    let n = samples as f64;
    (-sigma2 * g_norm2 / 2.0 + sigma2 * sigma2 * (j / 2.0 - 0.75)) / (n * g_norm2 * g_norm2)
}

/// `σ²/(N‖g‖²)·(1/(2|h_L|²) - 1) + σ⁴/(N‖g‖⁴)·(J/2 + 1/(2|h_L|²) - 5/4)`.
pub fn delta_mse_lmag_simplified(antennas: usize, samples: usize, sigma2: f64, g_norm2: f64, h_max_mag2: f64) -> f64 {
    let j = antennas as f64;
    let n = samples as f64;
    let inv = 0.5 / h_max_mag2;
    sigma2 / (n * g_norm2) * (inv - 1.0) + sigma2 * sigma2 / (n * g_norm2 * g_norm2) * (j / 2.0 + inv - 1.25)
}

/// Conventional minus WL MSE for a matched pair of queries.
pub fn delta_mse(conventional: &TheoryQuery, wl: &TheoryQuery, form: DeltaForm) -> Result<f64, AnalysisError> {
    conventional.validate()?;
    wl.validate()?;
    if conventional.estimator != Estimator::Conventional || wl.estimator != Estimator::Wl {
        return Err(AnalysisError::MismatchedQueries(
            "estimators must be (conventional, wl)",
        ));
    }
    if conventional.antennas != wl.antennas
        || conventional.samples != wl.samples
        || conventional.sigma2 != wl.sigma2
        || conventional.g_norm2 != wl.g_norm2
    {
        return Err(AnalysisError::MismatchedQueries("J, N, sigma2 and g_norm2 must agree"));
    }
    let (j, n, s2, g2) = (
        conventional.antennas,
        conventional.samples,
        conventional.sigma2,
        conventional.g_norm2,
    );
    match form {
        DeltaForm::Optimal => {
            if conventional.scenario != Scenario::Optimal || wl.scenario != Scenario::Optimal {
                return Err(AnalysisError::MismatchedQueries("both scenarios must be optimal"));
            }
            Ok(delta_mse_optimal(j, n, s2, g2))
        }
        DeltaForm::LargestMagnitudeFull | DeltaForm::LargestMagnitudeSimplified => {
            if conventional.scenario != Scenario::LargestMagnitude || wl.scenario != Scenario::LargestMagnitude {
                return Err(AnalysisError::MismatchedQueries(
                    "both scenarios must be largest-magnitude",
                ));
            }
            if conventional.h_max_mag2 != wl.h_max_mag2 {
                return Err(AnalysisError::MismatchedQueries("h_max_mag2 must agree"));
            }
            let mag2 = conventional.required(conventional.h_max_mag2, "h_max_mag2")?;
            let simplified = delta_mse_lmag_simplified(j, n, s2, g2, mag2);
            if form == DeltaForm::LargestMagnitudeSimplified {
                return Ok(simplified);
            }
            let scale = perturbation_scale(Estimator::Wl, n, s2, g2);
            Ok(simplified - sign_penalty(coefficient_rho(scale, mag2)))
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<f64, AnalysisError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(name, value, "finite and > 0"))
    }
}

/// Probability over channel draws that WL beats conventional under optimal
/// correction: `G((σ²/γ²)(J - 3/2), J)`.
pub fn prob_wl_wins_optimal(antennas: usize, sigma2: f64, gamma2: f64) -> Result<f64, AnalysisError> {
    if antennas < 2 {
        return Err(invalid("antennas", antennas as f64, ">= 2"));
    }
    check_positive("sigma2", sigma2)?;
    check_positive("gamma2", gamma2)?;
    let j = antennas as f64;
    Ok(reg_lower_gamma(sigma2 / gamma2 * (j - 1.5), j)?)
}

/// `Q(√(2K‖g‖²/σ²))`: sign error of pilot-based correction for a fixed channel.
pub fn prob_sign_error_training(g_norm2: f64, k: u32, sigma2: f64) -> Result<f64, AnalysisError> {
    if k == 0 {
        return Err(invalid("K", 0.0, ">= 1"));
    }
    check_positive("g_norm2", g_norm2)?;
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(invalid("sigma2", sigma2, "finite and >= 0"));
    }
    if sigma2 == 0.0 {
        return Ok(0.0);
    }
    Ok(q_unchecked((2.0 * f64::from(k) * g_norm2 / sigma2).sqrt()))
}

/// Exponent pattern in the channel-averaged sign-error sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SumVariant {
    /// Every summand carries `t` to the first power.
    AsPrinted,
    /// Summand `l` carries `t^l`.
    PowerCorrected,
}

impl SumVariant {
    pub fn name(self) -> &'static str {
        match self {
            SumVariant::AsPrinted => "as_printed",
            SumVariant::PowerCorrected => "power_corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    /// Whether `Kγ²/σ² > 1`, the stated validity region of the expression.
    pub valid: bool,
}

/// `½[1 - μ Σ_{l<J} C(2l,l) t^{p(l)}]` with `μ = √(Kγ²/(Kγ²+σ²))` and
/// `t = σ²/(4(Kγ²+σ²))`.
pub fn prob_sign_error_unconditional(
    antennas: usize,
    k: u32,
    gamma2: f64,
    sigma2: f64,
    variant: SumVariant,
) -> Result<Flagged, AnalysisError> {
    if antennas == 0 {
        return Err(invalid("antennas", 0.0, ">= 1"));
    }
    if k == 0 {
        return Err(invalid("K", 0.0, ">= 1"));
    }
    check_positive("gamma2", gamma2)?;
    check_positive("sigma2", sigma2)?;
    let kg = f64::from(k) * gamma2;
    let mu = (kg / (kg + sigma2)).sqrt();
    let t = sigma2 / (4.0 * (kg + sigma2));
    let mut binom = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for l in 0..antennas {
        sum += binom
            * match variant {
                SumVariant::AsPrinted => t,
                SumVariant::PowerCorrected => power,
            };
        let lf = l as f64;
        binom *= 2.0 * (2.0 * lf + 1.0) / (lf + 1.0);
        power *= t;
    }
    Ok(Flagged {
        value: 0.5 * (1.0 - mu * sum),
        valid: kg / sigma2 > 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundsVariant {
    /// The two-antenna pair `(1 - e^{-σ²/2γ²}, 1 - e^{-σ²/γ²})`, and the
    /// single lower bound for three or more antennas.
    TheoremStatement,
    /// The two-antenna pair `(1 - e^{-σ²/γ²}, 1 - e^{-2σ²/γ²})`.
    AppendixDerivation,
}

impl BoundsVariant {
    pub fn name(self) -> &'static str {
        match self {
            BoundsVariant::TheoremStatement => "theorem_statement",
            BoundsVariant::AppendixDerivation => "appendix_derivation",
        }
    }
}

/// Bounds on the probability that WL beats conventional under
/// largest-magnitude correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRecord {
    pub variant: BoundsVariant,
    pub lower: f64,
    pub upper: Option<f64>,
    /// `1 - J(½)^{J-1}`, independent of SNR.
    pub looser_lower: f64,
}

pub fn lmag_bounds(antennas: usize, sigma2: f64, gamma2: f64) -> Result<Vec<BoundsRecord>, AnalysisError> {
    if antennas < 2 {
        return Err(invalid("antennas", antennas as f64, ">= 2"));
    }
    check_positive("sigma2", sigma2)?;
    check_positive("gamma2", gamma2)?;
    let ratio = sigma2 / gamma2;
    let j = antennas as f64;
    let spread = j * 0.5f64.powi(antennas as i32 - 1);
    let looser_lower = 1.0 - spread;
    if antennas == 2 {
        return Ok(vec![
            BoundsRecord {
                variant: BoundsVariant::TheoremStatement,
                lower: -(-ratio / 2.0).exp_m1(),
                upper: Some(-(-ratio).exp_m1()),
                looser_lower,
            },
            BoundsRecord {
                variant: BoundsVariant::AppendixDerivation,
                lower: -(-ratio).exp_m1(),
                upper: Some(-(-2.0 * ratio).exp_m1()),
                looser_lower,
            },
        ]);
    }
    Ok(vec![BoundsRecord {
        variant: BoundsVariant::TheoremStatement,
        lower: 1.0 - spread * (-ratio).exp(),
        upper: None,
        looser_lower,
    }])
}
