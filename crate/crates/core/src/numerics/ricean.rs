use std::f64::consts::PI;

use super::bessel::{scaled_unchecked, BesselOrder};
use super::erf::erfc_unchecked;
use super::{finite, NumericsError};

/// Concentration parameter of a Ricean phase law: squared mean over variance
/// of the underlying proper complex Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiceanParam(f64);

impl RiceanParam {
    pub fn new(rho: f64) -> Result<Self, NumericsError> {
        finite("rho", rho)?;
        if rho < 0.0 {
            return Err(NumericsError::Domain {
                name: "rho",
                value: rho,
                requirement: "rho >= 0",
            });
        }
        Ok(RiceanParam(rho))
    }

    /// Parameter of the phase error left after averaging `k` unit pilots
    /// through a channel of power `g_norm2` in noise of variance `sigma2`.
    pub fn from_training(k: u32, g_norm2: f64, sigma2: f64) -> Result<Self, NumericsError> {
        if sigma2 <= 0.0 {
            return Err(NumericsError::Domain {
                name: "sigma2",
                value: sigma2,
                requirement: "sigma2 > 0",
            });
        }
        Self::new(f64::from(k) * g_norm2 / sigma2)
    }

    pub fn rho(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CosineMode {
    /// Bessel-function expression.
    Exact,
    /// `exp(-1/(4 rho))`.
    Approx,
}

/// Density of the phase of `m + w`, `m > 0` real and `w` proper complex
/// Gaussian with `m^2 / E|w|^2 = rho`:
///
/// `f(t) = e^{-rho}/(2 pi) * (1 + sqrt(pi rho) cos t e^{rho cos^2 t} [1 + erf(sqrt(rho) cos t)])`.
///
/// The exponentials are folded together so large `rho` neither overflows nor
/// loses the tail.
pub fn ricean_phase_pdf(theta: f64, param: RiceanParam) -> Result<f64, NumericsError> {
    finite("theta", theta)?;
    let rho = param.rho();
    let c = theta.cos();
    let s2 = theta.sin().powi(2);
    let lead = (-rho).exp();
    // 1 + erf(y) = erfc(-y)
    let tail = (PI * rho).sqrt() * c * (-rho * s2).exp() * erfc_unchecked(-rho.sqrt() * c);
    Ok(((lead + tail) / (2.0 * PI)).max(0.0))
}

/// Mean of `cos` under the Ricean phase law.
///
/// The exact mode evaluates `sqrt(pi rho)/2 * [e^{-rho/2}(I0(rho/2) + I1(rho/2))]`
/// through exponentially scaled Bessel functions, so it is valid for every
/// finite `rho`.
pub fn expected_cos(param: RiceanParam, mode: CosineMode) -> Result<f64, NumericsError> {
    let rho = param.rho();
    match mode {
        CosineMode::Exact => Ok(expected_cos_exact(rho)),
        CosineMode::Approx => {
            if rho == 0.0 {
                return Err(NumericsError::Domain {
                    name: "rho",
                    value: rho,
                    requirement: "rho > 0 for the exponential approximation",
                });
            }
            Ok((-0.25 / rho).exp())
        }
    }
}

pub(crate) fn expected_cos_exact(rho: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    if rho.is_infinite() {
        return 1.0;
    }
    let half = 0.5 * rho;
    let v = 0.5
        * (PI * rho).sqrt()
        * (scaled_unchecked(BesselOrder::Zero, half) + scaled_unchecked(BesselOrder::One, half));
    v.min(1.0)
}
