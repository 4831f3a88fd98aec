use std::f64::consts::PI;

use super::{finite, NumericsError};

// Power series below, Hankel asymptotic expansion above. At 30 the smallest
// asymptotic term is ~1e-26 relative, well past double precision.
const ASYMPTOTIC_FROM: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = NumericsError;

    fn try_from(order: u32) -> Result<Self, Self::Error> {
        match order {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            _ => Err(NumericsError::Domain {
                name: "order",
                value: f64::from(order),
                requirement: "order must be 0 or 1",
            }),
        }
    }
}

/// Modified Bessel function of the first kind, `I_0(x)` or `I_1(x)`, for `x >= 0`.
///
/// Returns [`NumericsError::Overflow`] once the value leaves the f64 range
/// (x slightly above 713).
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64, NumericsError> {
    let scaled = bessel_i_scaled(order, x)?;
    let v = scaled * x.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericsError::Overflow { value: x })
    }
}

/// Exponentially scaled `e^{-x} I_k(x)`; never overflows.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64, NumericsError> {
    finite("x", x)?;
    if x < 0.0 {
        return Err(NumericsError::Domain {
            name: "x",
            value: x,
            requirement: "x >= 0",
        });
    }
    Ok(scaled_unchecked(order, x))
}

pub(crate) fn scaled_unchecked(order: BesselOrder, x: f64) -> f64 {
    if x < ASYMPTOTIC_FROM {
        series(order, x) * (-x).exp()
    } else {
        asymptotic_scaled(order, x)
    }
}

fn series(order: BesselOrder, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, shift) = match order {
        BesselOrder::Zero => (1.0, 0.0),
        BesselOrder::One => (0.5 * x, 1.0),
    };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + shift));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    sum
}

fn asymptotic_scaled(order: BesselOrder, x: f64) -> f64 {
    let mu = 4.0 * order.nu() * order.nu();
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}
