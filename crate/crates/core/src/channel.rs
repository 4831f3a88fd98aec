//! SIMO flat-fading channel, BPSK received blocks, and the exact second-order
//! statistics of the received signal in complex, real and augmented form.

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;
pub type RVector = DVector<f64>;
pub type RMatrix = DMatrix<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("number of antennas must be at least 1, got {0}")]
    InvalidAntennas(usize),
    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("channel vector is identically zero")]
    ZeroChannel,
    #[error("block length must be at least 1")]
    EmptyBlock,
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// One draw of the fading vector `g` together with the quantities derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    g: CVector,
    gamma2: f64,
    g_norm2: f64,
    h: CVector,
    g_bar: RVector,
    h_bar: RVector,
    strongest: usize,
}

impl ChannelRealization {
    /// Wraps a given coefficient vector. `gamma2` is the per-coefficient
    /// variance of the ensemble it was drawn from.
    pub fn new(g: CVector, gamma2: f64) -> Result<Self, ChannelError> {
        if g.is_empty() {
            return Err(ChannelError::InvalidAntennas(0));
        }
        check_positive("gamma2", gamma2)?;
        if g.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ChannelError::InvalidParameter {
                name: "g",
                value: f64::NAN,
                requirement: "finite",
            });
        }
        let g_norm2 = g.norm_squared();
        if g_norm2 == 0.0 {
            return Err(ChannelError::ZeroChannel);
        }
        let h = &g / Complex64::from(g_norm2.sqrt());
        let g_bar = to_real(&g);
        let h_bar = to_real(&h);
        let strongest = largest_magnitude_index(&h);
        Ok(ChannelRealization {
            g,
            gamma2,
            g_norm2,
            h,
            g_bar,
            h_bar,
            strongest,
        })
    }

    pub fn antennas(&self) -> usize {
        self.g.len()
    }

    pub fn g(&self) -> &CVector {
        &self.g
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    /// `‖g‖²`.
    pub fn g_norm2(&self) -> f64 {
        self.g_norm2
    }

    /// Unit-norm direction `h = g/‖g‖`.
    pub fn h(&self) -> &CVector {
        &self.h
    }

    pub fn g_bar(&self) -> &RVector {
        &self.g_bar
    }

    pub fn h_bar(&self) -> &RVector {
        &self.h_bar
    }

    /// Zero-based index of the largest-magnitude coefficient (lowest index on ties).
    pub fn strongest(&self) -> usize {
        self.strongest
    }

    /// `|h_l|²` for a zero-based index.
    pub fn h_mag2(&self, index: usize) -> f64 {
        self.h[index].norm_sqr()
    }
}

/// One estimation window: `r(i) = b(i) g + n(i)`, `i = 1..N`, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    samples: CMatrix,
    symbols: Vec<i8>,
    sigma2: f64,
}

impl ReceivedBlock {
    pub fn new(samples: CMatrix, symbols: Vec<i8>, sigma2: f64) -> Result<Self, ChannelError> {
        if samples.ncols() == 0 {
            return Err(ChannelError::EmptyBlock);
        }
        if symbols.len() != samples.ncols() {
            return Err(ChannelError::LengthMismatch {
                expected: samples.ncols(),
                actual: symbols.len(),
            });
        }
        if sigma2 < 0.0 || !sigma2.is_finite() {
            return Err(ChannelError::InvalidParameter {
                name: "sigma2",
                value: sigma2,
                requirement: "finite and >= 0",
            });
        }
        Ok(ReceivedBlock {
            samples,
            symbols,
            sigma2,
        })
    }

    /// `J × N` matrix of received vectors.
    pub fn samples(&self) -> &CMatrix {
        &self.samples
    }

    /// `2J × N` real representation (real parts stacked over imaginary parts).
    pub fn real_samples(&self) -> RMatrix {
        let j = self.samples.nrows();
        let n = self.samples.ncols();
        RMatrix::from_fn(2 * j, n, |r, c| {
            if r < j {
                self.samples[(r, c)].re
            } else {
                self.samples[(r - j, c)].im
            }
        })
    }

    /// `2J × N` augmented vectors `[r; r*]`.
    pub fn augmented_samples(&self) -> CMatrix {
        let j = self.samples.nrows();
        CMatrix::from_fn(2 * j, self.len(), |r, c| {
            if r < j {
                self.samples[(r, c)]
            } else {
                self.samples[(r - j, c)].conj()
            }
        })
    }

    pub fn symbols(&self) -> &[i8] {
        &self.symbols
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn snr_db(&self) -> f64 {
        snr_db_from_sigma2(self.sigma2)
    }

    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    pub fn antennas(&self) -> usize {
        self.samples.nrows()
    }
}

/// Noise variance for a transmit SNR in dB, `σ² = 10^{-SNR/10}`.
pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn snr_db_from_sigma2(sigma2: f64) -> f64 {
    -10.0 * sigma2.log10()
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InvalidParameter {
            name,
            value,
            requirement: "finite and > 0",
        })
    }
}

/// Circularly symmetric complex Gaussian sample of total variance `variance`.
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Draws `g` with i.i.d. `CN(0, γ²)` entries.
pub fn draw_channel<R: Rng + ?Sized>(
    antennas: usize,
    gamma2: f64,
    rng: &mut R,
) -> Result<ChannelRealization, ChannelError> {
    if antennas == 0 {
        return Err(ChannelError::InvalidAntennas(antennas));
    }
    check_positive("gamma2", gamma2)?;
    loop {
        let g = CVector::from_fn(antennas, |_, _| complex_normal(rng, gamma2));
        match ChannelRealization::new(g, gamma2) {
            Err(ChannelError::ZeroChannel) => warn!("degenerate all-zero channel draw, redrawing"),
            other => return other,
        }
    }
}

/// Equiprobable BPSK symbols.
pub fn draw_symbols<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// `antennas × n` matrix of `CN(0, σ²)` noise, filled column by column so a
/// longer block extends a shorter one drawn from the same stream.
pub fn draw_noise<R: Rng + ?Sized>(antennas: usize, n: usize, sigma2: f64, rng: &mut R) -> CMatrix {
    CMatrix::from_iterator(antennas, n, (0..antennas * n).map(|_| complex_normal(rng, sigma2)))
}

fn assemble(
    ch: &ChannelRealization,
    symbols: Vec<i8>,
    mut samples: CMatrix,
    sigma2: f64,
) -> Result<ReceivedBlock, ChannelError> {
    for (mut col, &b) in samples.column_iter_mut().zip(&symbols) {
        let b = f64::from(b);
        for (s, g) in col.iter_mut().zip(ch.g().iter()) {
            *s += g * b;
        }
    }
    ReceivedBlock::new(samples, symbols, sigma2)
}

fn check_block_args(n: usize, sigma2: f64) -> Result<(), ChannelError> {
    if n == 0 {
        return Err(ChannelError::EmptyBlock);
    }
    if sigma2 < 0.0 || !sigma2.is_finite() {
        return Err(ChannelError::InvalidParameter {
            name: "sigma2",
            value: sigma2,
            requirement: "finite and >= 0",
        });
    }
    Ok(())
}

fn noise_or_zero<R: Rng + ?Sized>(antennas: usize, n: usize, sigma2: f64, rng: &mut R) -> CMatrix {
    if sigma2 > 0.0 {
        draw_noise(antennas, n, sigma2, rng)
    } else {
        CMatrix::zeros(antennas, n)
    }
}

/// Draws a block with symbols and noise taken from separate streams.
pub fn draw_block_split<R1, R2>(
    ch: &ChannelRealization,
    n: usize,
    sigma2: f64,
    symbol_rng: &mut R1,
    noise_rng: &mut R2,
) -> Result<ReceivedBlock, ChannelError>
where
    R1: Rng + ?Sized,
    R2: Rng + ?Sized,
{
    check_block_args(n, sigma2)?;
    let symbols = draw_symbols(n, symbol_rng);
    let noise = noise_or_zero(ch.antennas(), n, sigma2, noise_rng);
    assemble(ch, symbols, noise, sigma2)
}

/// Draws `r(i) = b(i) g + n(i)` for `i = 1..n` from a single stream
/// (all symbols first, then all noise).
pub fn draw_block<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    n: usize,
    sigma2: f64,
    rng: &mut R,
) -> Result<ReceivedBlock, ChannelError> {
    check_block_args(n, sigma2)?;
    let symbols = draw_symbols(n, rng);
    let noise = noise_or_zero(ch.antennas(), n, sigma2, rng);
    assemble(ch, symbols, noise, sigma2)
}

/// Zero-based `argmax_j |v_j|`, lowest index on ties.
pub fn largest_magnitude_index(v: &CVector) -> usize {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (i, c) in v.iter().enumerate() {
        let m = c.norm_sqr();
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    best
}

/// `R = ‖g‖² h hᴴ + σ² I`.
pub fn true_covariance(ch: &ChannelRealization, sigma2: f64) -> CMatrix {
    let j = ch.antennas();
    ch.g() * ch.g().adjoint() + CMatrix::identity(j, j) * Complex64::from(sigma2)
}

/// Pseudo-covariance `C = E[r rᵀ] = ‖g‖² h hᵀ`; circular noise does not contribute.
pub fn pseudo_covariance(ch: &ChannelRealization) -> CMatrix {
    ch.g() * ch.g().transpose()
}

/// Covariance of the real representation, `‖g‖² h̄ h̄ᵀ + (σ²/2) I`.
pub fn true_real_covariance(ch: &ChannelRealization, sigma2: f64) -> RMatrix {
    let n = 2 * ch.antennas();
    ch.g_bar() * ch.g_bar().transpose() + RMatrix::identity(n, n) * (0.5 * sigma2)
}

/// Covariance of the augmented vector `[r; r*]`, in block form `[R, C; C*, R*]`.
pub fn augmented_covariance(ch: &ChannelRealization, sigma2: f64) -> CMatrix {
    let j = ch.antennas();
    let r = true_covariance(ch, sigma2);
    let c = pseudo_covariance(ch);
    let mut out = CMatrix::zeros(2 * j, 2 * j);
    out.view_mut((0, 0), (j, j)).copy_from(&r);
    out.view_mut((0, j), (j, j)).copy_from(&c);
    out.view_mut((j, 0), (j, j)).copy_from(&c.map(|z| z.conj()));
    out.view_mut((j, j), (j, j)).copy_from(&r.map(|z| z.conj()));
    out
}

/// Stacks real parts over imaginary parts.
pub fn to_real(v: &CVector) -> RVector {
    let j = v.len();
    RVector::from_fn(2 * j, |i, _| if i < j { v[i].re } else { v[i - j].im })
}

pub fn from_real(v: &RVector) -> Result<CVector, ChannelError> {
    if !v.len().is_multiple_of(2) {
        return Err(ChannelError::LengthMismatch {
            expected: v.len() + 1,
            actual: v.len(),
        });
    }
    let j = v.len() / 2;
    Ok(CVector::from_fn(j, |i, _| Complex64::new(v[i], v[i + j])))
}

/// `[v; v*]`.
pub fn augment(v: &CVector) -> CVector {
    let j = v.len();
    CVector::from_fn(2 * j, |i, _| if i < j { v[i] } else { v[i - j].conj() })
}

/// The map `Ψ = [I, jI; I, -jI]` taking real representations to augmented vectors.
pub fn psi_matrix(antennas: usize) -> CMatrix {
    let j = antennas;
    let i = Complex64::i();
    CMatrix::from_fn(2 * j, 2 * j, |r, c| {
        let (rb, cb) = (r / j, c / j);
        if r % j != c % j {
            return Complex64::new(0.0, 0.0);
        }
        match (rb, cb) {
            (_, 0) => Complex64::new(1.0, 0.0),
            (0, 1) => i,
            _ => -i,
        }
    })
}

/// `Ψ v` for a real vector of length `2J`.
pub fn psi_apply(v: &RVector) -> Result<CVector, ChannelError> {
    Ok(augment(&from_real(v)?))
}

/// `Ψᴴ w` for a complex vector of length `2J`.
pub fn psi_adjoint(w: &CVector) -> Result<CVector, ChannelError> {
    if !w.len().is_multiple_of(2) {
        return Err(ChannelError::LengthMismatch {
            expected: w.len() + 1,
            actual: w.len(),
        });
    }
    let j = w.len() / 2;
    let i = Complex64::i();
    Ok(CVector::from_fn(2 * j, |k, _| {
        if k < j {
            w[k] + w[k + j]
        } else {
            -i * w[k - j] + i * w[k]
        }
    }))
}
