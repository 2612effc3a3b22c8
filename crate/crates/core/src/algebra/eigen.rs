//! Cyclic Jacobi diagonalization of small symmetric matrices.

use crate::algebra::matrix::{Dense, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAX_SWEEPS: usize = 50;

/// Eigen-decomposition `M = Q diag(eigenvalues) Q^T` with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub eigenvalues: Vec<T>,
    /// Column `j` is the unit eigenvector for `eigenvalues[j]`.
    pub eigenvectors: Dense<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> T {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Rebuilds `Q diag(lambda) Q^T`.
    pub fn reconstruct(&self) -> SymMatrix<T> {
        let lam = SymMatrix::from_diagonal(&self.eigenvalues);
        lam.conjugate(&self.eigenvectors)
    }
}

/// Diagonalizes `m` with cyclic Jacobi rotations (at most [`MAX_SWEEPS`] sweeps).
pub fn eigen_sym<T: Real>(m: &SymMatrix<T>) -> Result<Spectrum<T>> {
    m.check_finite()?;
    let n = m.dim();
    let mut a = m.to_dense();
    let mut v = Dense::identity(n);

    let off = |a: &Dense<T>| -> T {
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s = s + a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };
    let scale = m.norm_max().max(T::min_positive_value());
    let tol = T::epsilon() * scale;

    let mut sweeps = 0;
    while off(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                sweeps,
                off_diagonal: off(&a).to_f64().unwrap_or(f64::NAN),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, T::zero());
                a.set(q, p, T::zero());
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .partial_cmp(&a.get(j, j))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| a.get(i, i)).collect();
    let eigenvectors = Dense::from_fn(n, |r, c| v.get(r, order[c]));
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Smallest eigenvalue, convenience wrapper.
pub fn min_eigenvalue<T: Real>(m: &SymMatrix<T>) -> Result<T> {
    eigen_sym(m).map(|s| s.min())
}
