//! Sample covariances and the principal-eigenvector channel estimates.
//!
//! The conventional estimator works on `R̂ = (1/N) Σ r rᴴ`; the widely linear
//! one on the real-representation covariance `(1/N) Σ r̄ r̄ᵀ`, which carries the
//! same information as the augmented covariance. Both return a unit-norm
//! principal eigenvector in a canonical orientation: the largest-magnitude
//! entry is made real and positive. Ambiguity corrections are applied on top
//! of that.

pub mod eigen;

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{largest_magnitude_index, CMatrix, CVector, RMatrix, RVector, ReceivedBlock};
use eigen::jacobi_eigen;

const SELF_ADJOINT_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("received block is empty")]
    EmptyBlock,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not self-adjoint (max deviation {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },
    #[error("eigensolver did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Complex,
    Real,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    Complex(CMatrix),
    Real(RMatrix),
}

impl Covariance {
    pub fn domain(&self) -> Domain {
        match self {
            Covariance::Complex(_) => Domain::Complex,
            Covariance::Real(_) => Domain::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EstimateVector {
    Complex(CVector),
    Real(RVector),
}

impl EstimateVector {
    pub fn domain(&self) -> Domain {
        match self {
            EstimateVector::Complex(_) => Domain::Complex,
            EstimateVector::Real(_) => Domain::Real,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            EstimateVector::Complex(v) => v.norm(),
            EstimateVector::Real(v) => v.norm(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            EstimateVector::Complex(v) => v.len(),
            EstimateVector::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_complex(&self) -> Option<&CVector> {
        match self {
            EstimateVector::Complex(v) => Some(v),
            EstimateVector::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&RVector> {
        match self {
            EstimateVector::Real(v) => Some(v),
            EstimateVector::Complex(_) => None,
        }
    }
}

/// Unit-norm principal eigenvector before any ambiguity correction.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEstimate {
    pub vector: EstimateVector,
    /// Largest eigenvalue `λ̂₁`.
    pub eigenvalue: f64,
    /// `λ̂₁ - λ̂₂` (infinite for a 1×1 problem).
    pub eigen_gap: f64,
    /// `‖M v - λ̂₁ v‖`.
    pub residual: f64,
}

impl RawEstimate {
    pub fn domain(&self) -> Domain {
        self.vector.domain()
    }
}

/// `(1/N) Σ r rᴴ` or `(1/N) Σ r̄ r̄ᵀ`, with no bias correction.
pub fn sample_covariance(block: &ReceivedBlock, domain: Domain) -> Result<Covariance, EstimatorError> {
    if block.is_empty() {
        return Err(EstimatorError::EmptyBlock);
    }
    let inv_n = 1.0 / block.len() as f64;
    Ok(match domain {
        Domain::Complex => {
            let x = block.samples();
            let mut r = x * x.adjoint() * Complex64::from(inv_n);
            hermitize(&mut r);
            Covariance::Complex(r)
        }
        Domain::Real => {
            let x = block.real_samples();
            let mut r = &x * x.transpose() * inv_n;
            symmetrize(&mut r);
            Covariance::Real(r)
        }
    })
}

fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

fn symmetrize(m: &mut RMatrix) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            m[(j, i)] = m[(i, j)];
        }
    }
}

/// Unit-norm eigenvector of the largest eigenvalue of a self-adjoint matrix.
pub fn principal_eigenvector(m: &Covariance) -> Result<RawEstimate, EstimatorError> {
    match m {
        Covariance::Real(a) => principal_real(a),
        Covariance::Complex(a) => principal_complex(a),
    }
}

fn check_square(rows: usize, cols: usize) -> Result<(), EstimatorError> {
    if rows != cols || rows == 0 {
        Err(EstimatorError::NotSquare { rows, cols })
    } else {
        Ok(())
    }
}

fn principal_real(a: &RMatrix) -> Result<RawEstimate, EstimatorError> {
    check_square(a.nrows(), a.ncols())?;
    let deviation = (a - a.transpose()).amax();
    if deviation > SELF_ADJOINT_TOL * a.amax().max(1.0) {
        return Err(EstimatorError::NotSelfAdjoint { deviation });
    }
    let eig = jacobi_eigen(a).map_err(|iterations| EstimatorError::NoConvergence { iterations })?;
    let lambda = eig.values[0];
    let gap = eig.values.get(1).map_or(f64::INFINITY, |l2| lambda - l2);
    let mut v: RVector = eig.vectors.column(0).into_owned();
    v.normalize_mut();
    let k = v.iamax();
    if v[k] < 0.0 {
        v.neg_mut();
    }
    let residual = (a * &v - &v * lambda).norm();
    check_residual(residual, lambda)?;
    Ok(RawEstimate {
        vector: EstimateVector::Real(v),
        eigenvalue: lambda,
        eigen_gap: gap,
        residual,
    })
}

fn max_modulus<'a>(it: impl Iterator<Item = &'a Complex64>) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

// A Hermitian `A + iB` acts on `x + iy` as the real symmetric `[A, -B; B, A]`
// acts on `[x; y]`. Each eigenvalue appears twice in the embedding and any
// vector of the top pair maps back to a complex eigenvector.
fn principal_complex(a: &CMatrix) -> Result<RawEstimate, EstimatorError> {
    check_square(a.nrows(), a.ncols())?;
    let deviation = max_modulus((a - a.adjoint()).iter());
    if deviation > SELF_ADJOINT_TOL * max_modulus(a.iter()).max(1.0) {
        return Err(EstimatorError::NotSelfAdjoint { deviation });
    }
    let j = a.nrows();
    let embed = RMatrix::from_fn(2 * j, 2 * j, |r, c| {
        let z = a[(r % j, c % j)];
        match (r < j, c < j) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = jacobi_eigen(&embed).map_err(|iterations| EstimatorError::NoConvergence { iterations })?;
    let lambda = eig.values[0];
    let gap = eig.values.get(2).map_or(f64::INFINITY, |l2| lambda - l2);
    let col = eig.vectors.column(0);
    let mut v = CVector::from_fn(j, |i, _| Complex64::new(col[i], col[i + j]));
    v.normalize_mut();
    let k = largest_magnitude_index(&v);
    let phase = v[k].conj() / v[k].norm();
    v *= phase;
    v[k].im = 0.0;
    let residual = (a * &v - &v * Complex64::from(lambda)).norm();
    check_residual(residual, lambda)?;
    Ok(RawEstimate {
        vector: EstimateVector::Complex(v),
        eigenvalue: lambda,
        eigen_gap: gap,
        residual,
    })
}

fn check_residual(residual: f64, lambda: f64) -> Result<(), EstimatorError> {
    if residual <= RESIDUAL_TOL * lambda.abs().max(f64::MIN_POSITIVE) || residual == 0.0 {
        Ok(())
    } else {
        Err(EstimatorError::NoConvergence {
            iterations: eigen::MAX_SWEEPS,
        })
    }
}

/// Principal eigenvector of `R̂`.
pub fn conventional_estimate(block: &ReceivedBlock) -> Result<RawEstimate, EstimatorError> {
    principal_eigenvector(&sample_covariance(block, Domain::Complex)?)
}

/// Principal eigenvector of the real-representation sample covariance.
pub fn wl_estimate(block: &ReceivedBlock) -> Result<RawEstimate, EstimatorError> {
    principal_eigenvector(&sample_covariance(block, Domain::Real)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_block, draw_channel, to_real, true_covariance};
    use crate::rng::{Purpose, SeedTree};

    #[test]
    fn diagonal_case() {
        let m = RMatrix::from_diagonal(&RVector::from_vec(vec![3.0, 2.0, 1.0]));
        let e = principal_eigenvector(&Covariance::Real(m)).unwrap();
        assert_eq!(e.vector.as_real().unwrap(), &RVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(e.eigenvalue, 3.0);
        assert_eq!(e.eigen_gap, 1.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(3, 3);
        m[(0, 1)] = Complex64::new(0.0, 1.0);
        assert!(matches!(
            principal_eigenvector(&Covariance::Complex(m)),
            Err(EstimatorError::NotSelfAdjoint { .. })
        ));
        let r = RMatrix::from_row_slice(2, 3, &[1.0; 6]);
        assert!(matches!(
            principal_eigenvector(&Covariance::Real(r)),
            Err(EstimatorError::NotSquare { .. })
        ));
    }

    #[test]
    fn exact_covariance_recovers_direction() {
        let tree = SeedTree::new(3);
        for c in 0..20 {
            let ch = draw_channel(5, 1.0, &mut tree.stream(c, 0, Purpose::Channel)).unwrap();
            let r = true_covariance(&ch, 0.2);
            let e = principal_eigenvector(&Covariance::Complex(r)).unwrap();
            let u = e.vector.as_complex().unwrap();
            assert!(((u.dotc(ch.h())).norm() - 1.0).abs() < 1e-10);
            assert!((e.eigenvalue - (ch.g_norm2() + 0.2)).abs() < 1e-10);
            assert!((e.eigen_gap - ch.g_norm2()).abs() < 1e-10);
        }
    }

    #[test]
    fn noiseless_blocks() {
        let tree = SeedTree::new(4);
        let ch = draw_channel(4, 1.0, &mut tree.stream(0, 0, Purpose::Channel)).unwrap();
        let block = draw_block(&ch, 10, 0.0, &mut tree.stream(0, 0, Purpose::Noise)).unwrap();
        let conv = conventional_estimate(&block).unwrap();
        let u = conv.vector.as_complex().unwrap();
        assert!((u.dotc(ch.h()).norm() - 1.0).abs() < 1e-10);
        let wl = wl_estimate(&block).unwrap();
        let ub = wl.vector.as_real().unwrap();
        assert_eq!(ub.len(), 8);
        let d = (ub - ch.h_bar()).norm().min((ub + ch.h_bar()).norm());
        assert!(d < 1e-10);
        assert_eq!(to_real(u).len(), ub.len());
    }

    #[test]
    fn canonical_orientation() {
        let tree = SeedTree::new(5);
        let ch = draw_channel(5, 1.0, &mut tree.stream(0, 0, Purpose::Channel)).unwrap();
        let block = draw_block(&ch, 30, 0.5, &mut tree.stream(0, 0, Purpose::Noise)).unwrap();
        let u = conventional_estimate(&block).unwrap();
        let u = u.vector.as_complex().unwrap();
        let k = largest_magnitude_index(u);
        assert!(u[k].re > 0.0 && u[k].im == 0.0);
        let w = wl_estimate(&block).unwrap();
        let w = w.vector.as_real().unwrap();
        assert!(w[w.iamax()] > 0.0);
    }

    #[test]
    fn single_sample_covariance_is_rank_one() {
        let tree = SeedTree::new(6);
        let ch = draw_channel(3, 1.0, &mut tree.stream(0, 0, Purpose::Channel)).unwrap();
        let block = draw_block(&ch, 1, 0.3, &mut tree.stream(0, 0, Purpose::Noise)).unwrap();
        let Covariance::Complex(r) = sample_covariance(&block, Domain::Complex).unwrap() else {
            unreachable!()
        };
        let x = block.samples().column(0);
        assert!((&r - x * x.adjoint()).norm() < 1e-14);
        assert!(max_modulus((&r - r.adjoint()).iter()) == 0.0);
    }
}
