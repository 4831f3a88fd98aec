//! Cyclic Jacobi eigensolver for small dense real symmetric matrices.

use crate::channel::RMatrix;

pub const MAX_SWEEPS: usize = 64;
const OFF_DIAGONAL_TOL: f64 = 1e-15;

/// Eigenpairs sorted by descending eigenvalue; column `i` of the matrix pairs
/// with entry `i` of the vector.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: RMatrix,
}

/// Full eigendecomposition of a symmetric matrix. Only the upper triangle is
/// trusted. Returns the number of sweeps spent on failure.
pub fn jacobi_eigen(m: &RMatrix) -> Result<SymmetricEigen, usize> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "square matrix required");
    let mut a = RMatrix::from_fn(n, n, |i, j| if i <= j { m[(i, j)] } else { m[(j, i)] });
    let mut v = RMatrix::identity(n, n);
    let scale = a.norm();

    let mut converged = n < 2 || scale == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(sweeps);
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
        converged = off_diagonal(&a) <= OFF_DIAGONAL_TOL * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = RMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal(a: &RMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[(p, q)] * a[(p, q)];
        }
    }
    (2.0 * s).sqrt()
}

fn rotate(a: &mut RMatrix, v: &mut RMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = RMatrix::from_diagonal(&crate::channel::RVector::from_vec(vec![1.0, 3.0, 2.0]));
        let e = jacobi_eigen(&m).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(e.vectors[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn reconstructs_matrix() {
        let m = RMatrix::from_fn(6, 6, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            (i + 1.0) * 0.3 - (j * 0.7).sin()
        });
        let e = jacobi_eigen(&m).unwrap();
        let d = RMatrix::from_diagonal(&crate::channel::RVector::from_vec(e.values.clone()));
        let back = &e.vectors * d * e.vectors.transpose();
        assert!((back - &m).norm() < 1e-12 * m.norm());
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - RMatrix::identity(6, 6)).norm() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
