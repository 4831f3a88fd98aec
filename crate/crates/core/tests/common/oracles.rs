//! Independent reference evaluations: quadrature and plain power series.

use std::f64::consts::PI;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Trapezoid rule over `[-π, π)`, spectrally accurate for smooth periodic integrands.
pub fn periodic_trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    (0..n).map(|i| f(-PI + i as f64 * h)).sum::<f64>() * h
}

pub fn erf_quadrature(x: f64) -> f64 {
    let steps = 2 * ((x.abs() * 4000.0).ceil() as usize).max(1);
    2.0 / PI.sqrt() * simpson(|t| (-t * t).exp(), 0.0, x, steps)
}

/// `2/√π Σ (-1)^n x^{2n+1} / (n! (2n+1))`, `terms` terms.
pub fn erf_maclaurin(x: f64, terms: usize) -> f64 {
    let mut power = x;
    let mut sum = 0.0;
    for n in 0..terms {
        sum += power / (2 * n + 1) as f64;
        power *= -x * x / (n + 1) as f64;
    }
    2.0 / PI.sqrt() * sum
}

pub fn q_quadrature(x: f64) -> f64 {
    let pdf = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
    if x >= 0.0 {
        simpson(pdf, x, x + 40.0, 200_000)
    } else {
        1.0 - simpson(pdf, -x, -x + 40.0, 200_000)
    }
}

/// `e^{-x} I_n(x) = (1/π) ∫_0^π e^{x(cos t - 1)} cos(nt) dt`.
pub fn bessel_scaled_quadrature(order: u32, x: f64) -> f64 {
    let f = |t: f64| (x * (t.cos() - 1.0)).exp() * (order as f64 * t).cos();
    periodic_trapezoid(f, 8192) / (2.0 * PI)
}

/// `Σ (x/2)^{2k+n} / (k! (k+n)!)`, `terms` terms.
pub fn bessel_series(order: u32, x: f64, terms: usize) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let mut sum = 0.0;
    for k in 0..terms {
        sum += term;
        term *= half * half / ((k + 1) as f64 * (k + 1 + order as usize) as f64);
    }
    sum
}

/// `G(x, s) = 1 - e^{-x} Σ_{k<s} x^k / k!` for integer `s`.
pub fn gamma_integer(x: f64, s: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..s {
        term *= x / k as f64;
        sum += term;
    }
    1.0 - (-x).exp() * sum
}

/// `Γ(s)^{-1} ∫_0^x t^{s-1} e^{-t} dt` by Simpson after `t = u²`, which keeps
/// the integrand smooth at the origin for half-integer `s ≥ 1/2`.
pub fn gamma_quadrature(x: f64, s: f64) -> f64 {
    let f = |u: f64| 2.0 * u.powf(2.0 * s - 1.0) * (-u * u).exp();
    let gamma_s = simpson(f, 0.0, (80.0 + 4.0 * s).sqrt(), 400_000);
    simpson(f, 0.0, x.sqrt(), 200_000) / gamma_s
}
