use std::f64::consts::{FRAC_2_SQRT_PI, SQRT_2};

use super::{finite, NumericsError};

// Below this the positive-term series is used; above it the continued
// fraction for erfc converges in a few dozen steps.
const SERIES_LIMIT: f64 = 3.0;

/// Error function, absolute error below 1e-15 on the whole real line.
pub fn erf(x: f64) -> Result<f64, NumericsError> {
    finite("x", x)?;
    Ok(erf_unchecked(x))
}

/// Complementary error function with relative accuracy in the upper tail.
pub fn erfc(x: f64) -> Result<f64, NumericsError> {
    finite("x", x)?;
    Ok(erfc_unchecked(x))
}

/// Gaussian tail probability `Q(x) = P{Z > x}` for a standard normal `Z`.
pub fn gaussian_q(x: f64) -> Result<f64, NumericsError> {
    finite("x", x)?;
    Ok(q_unchecked(x))
}

pub(crate) fn q_unchecked(x: f64) -> f64 {
    0.5 * erfc_unchecked(x / SQRT_2)
}

pub(crate) fn erf_unchecked(x: f64) -> f64 {
    let a = x.abs();
    let v = if a < SERIES_LIMIT {
        erf_series(a)
    } else {
        1.0 - erfc_continued_fraction(a)
    };
    v.copysign(x)
}

pub(crate) fn erfc_unchecked(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_unchecked(-x)
    } else if x < SERIES_LIMIT {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

/// erf(x) = 2/sqrt(pi) * exp(-x^2) * sum 2^n x^(2n+1) / (2n+1)!!, x >= 0.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= 2.0 * x2 / f64::from(2 * n + 1);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Modified Lentz evaluation of
/// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), x >= 3.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = f64::from(k) * 0.5;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    0.5 * FRAC_2_SQRT_PI * (-x * x).exp() / f
}
