use std::f64::consts::PI;

use super::{finite, NumericsError};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for `s > 0`.
pub fn ln_gamma(s: f64) -> Result<f64, NumericsError> {
    finite("s", s)?;
    if s <= 0.0 {
        return Err(NumericsError::Domain {
            name: "s",
            value: s,
            requirement: "s > 0",
        });
    }
    Ok(ln_gamma_unchecked(s))
}

fn ln_gamma_unchecked(s: f64) -> f64 {
    if s < 0.5 {
        // reflection
        return (PI / (PI * s).sin()).ln() - ln_gamma_unchecked(1.0 - s);
    }
    let z = s - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma `G(x, s) = P(s, x)`.
pub fn reg_lower_gamma(x: f64, s: f64) -> Result<f64, NumericsError> {
    check(x, s)?;
    Ok(lower_unchecked(x, s))
}

/// Regularized upper incomplete gamma `1 - G(x, s)`, accurate in the tail.
pub fn reg_upper_gamma(x: f64, s: f64) -> Result<f64, NumericsError> {
    check(x, s)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < s + 1.0 {
        Ok(1.0 - lower_series(x, s))
    } else {
        Ok(upper_continued_fraction(x, s))
    }
}

fn check(x: f64, s: f64) -> Result<(), NumericsError> {
    finite("x", x)?;
    finite("s", s)?;
    if x < 0.0 {
        return Err(NumericsError::Domain {
            name: "x",
            value: x,
            requirement: "x >= 0",
        });
    }
    if s <= 0.0 {
        return Err(NumericsError::Domain {
            name: "s",
            value: s,
            requirement: "s > 0",
        });
    }
    Ok(())
}

pub(crate) fn lower_unchecked(x: f64, s: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < s + 1.0 {
        lower_series(x, s)
    } else {
        1.0 - upper_continued_fraction(x, s)
    }
}

fn prefactor(x: f64, s: f64) -> f64 {
    (s * x.ln() - x - ln_gamma_unchecked(s)).exp()
}

fn lower_series(x: f64, s: f64) -> f64 {
    let mut a = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..10_000 {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (sum * prefactor(x, s)).min(1.0)
}

fn upper_continued_fraction(x: f64, s: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -f64::from(i) * (f64::from(i) - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (h * prefactor(x, s)).clamp(0.0, 1.0)
}
