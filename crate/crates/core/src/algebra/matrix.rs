//! Dense symmetric and square matrices for desk-scale dimensions.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest dimension the dense algorithms are meant for.
pub const MAX_DIM: usize = 8;

/// Symmetric `n x n` matrix stored as its packed upper triangle.
///
/// `get(i, j)` and `get(j, i)` read the same slot, so symmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

#[inline]
fn packed(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i <= j { (i, j) } else { (j, i) };
    r * n - r * (r + 1) / 2 + c
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, T::one())
    }

    /// `s * I`.
    pub fn scalar(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, s);
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Reads a row-major `n x n` array. Fails unless the input is symmetric
    /// to within `1e-12` relative.
    pub fn from_row_major(n: usize, rows: &[T]) -> Result<Self> {
        if rows.len() != n * n {
            return Err(Error::domain(format!(
                "expected {} row-major entries for n = {n}, got {}",
                n * n,
                rows.len()
            )));
        }
        let tol = T::lit(1e-12);
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (rows[i * n + j], rows[j * n + i]);
                if (a - b).abs() > tol * (T::one() + a.abs().max(b.abs())) {
                    return Err(Error::domain(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        let m = Self::from_fn(n, |i, j| rows[i * n + j]);
        m.check_finite()?;
        Ok(m)
    }

    pub fn to_row_major(&self) -> Vec<T> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::domain("matrix has non-finite entries"))
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[packed(self.n, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = packed(self.n, i, j);
        self.data[k] = v;
    }

    /// Packed upper triangle, row by row.
    pub fn packed(&self) -> &[T] {
        &self.data
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn norm_max(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn frobenius_dot(&self, other: &Self) -> T {
        let n = self.n;
        let mut s = T::zero();
        for i in 0..n {
            s = s + self.get(i, i) * other.get(i, i);
            for j in (i + 1)..n {
                s = s + T::lit(2.0) * self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &Self, s: T) -> Self {
        debug_assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + s * b)
                .collect(),
        }
    }

    /// Elementary symmetric direction `E_ij + E_ji` (or `E_ii` on the diagonal).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.set(i, j, T::one());
        m
    }

    pub fn to_dense(&self) -> Dense<T> {
        Dense::from_fn(self.n, |i, j| self.get(i, j))
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> T {
        self.to_dense().det()
    }

    /// `Q M Q^T`.
    pub fn conjugate(&self, q: &Dense<T>) -> Self {
        let qm = q.matmul(&self.to_dense());
        let full = qm.matmul(&q.transpose());
        Self::from_fn(self.n, |i, j| {
            (full.get(i, j) + full.get(j, i)) * T::lit(0.5)
        })
    }

    /// `Q^T M Q`, i.e. `M` expressed in the basis of the columns of `Q`.
    pub fn in_basis(&self, q: &Dense<T>) -> Self {
        self.conjugate(&q.transpose())
    }

    /// Cholesky-based positive definiteness test.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) {
                return false;
            }
            let djj = d.sqrt();
            l[j * n + j] = djj;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / djj;
            }
        }
        true
    }
}

impl<T: Real> Add for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn add(self, rhs: Self) -> SymMatrix<T> {
        self.add_scaled(rhs, T::one())
    }
}

impl<T: Real> Sub for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn sub(self, rhs: Self) -> SymMatrix<T> {
        self.add_scaled(rhs, -T::one())
    }
}

impl<T: Real> Neg for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn neg(self) -> SymMatrix<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &SymMatrix<T> {
    type Output = SymMatrix<T>;
    fn mul(self, rhs: T) -> SymMatrix<T> {
        self.scale(rhs)
    }
}

/// Row-major square matrix; used for eigenvectors and intermediate products.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn norm_max(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) - other.get(i, j))
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs()
                        .partial_cmp(&a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            let p = a[pivot * n + col];
            if p == T::zero() {
                return T::zero();
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                det = -det;
            }
            det = det * p;
            for r in (col + 1)..n {
                let factor = a[r * n + col] / p;
                if factor != T::zero() {
                    for k in col..n {
                        a[r * n + k] = a[r * n + k] - factor * a[col * n + k];
                    }
                }
            }
        }
        det
    }
}

/// Solves the square system `a x = b` (row-major `a`) by Gaussian elimination
/// with partial pivoting. Returns `None` on an exactly singular pivot.
pub(crate) fn solve_dense<T: Real>(n: usize, mut a: Vec<T>, mut b: Vec<T>) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r * n + col]
                .abs()
                .partial_cmp(&a[s * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot * n + col] == T::zero() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] = a[r * n + k] - factor * a[col * n + k];
            }
            b[r] = b[r] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_storage_is_structural() {
        let mut m = SymMatrix::<f64>::zeros(3);
        m.set(2, 0, 5.0);
        assert_eq!(m.get(0, 2), 5.0);
        assert_eq!(m.packed().len(), 6);
    }

    #[test]
    fn row_major_round_trip() {
        let rows = [2.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 4.0];
        let m = SymMatrix::from_row_major(3, &rows).unwrap();
        assert_eq!(m.to_row_major(), rows.to_vec());
        assert!(SymMatrix::from_row_major(2, &[1.0, 2.0, 0.0, 1.0]).is_err());
        assert!(SymMatrix::from_row_major(2, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn determinant_and_trace() {
        let m = SymMatrix::from_row_major(2, &[2.0f64, 1.0, 1.0, 3.0]).unwrap();
        assert!((m.det() - 5.0).abs() < 1e-14);
        assert_eq!(m.trace(), 5.0);
        let id = SymMatrix::<f64>::identity(5);
        assert_eq!(id.det(), 1.0);
    }

    #[test]
    fn frobenius_matches_dense_sum() {
        let a = SymMatrix::from_row_major(2, &[1.0, 2.0, 2.0, 3.0]).unwrap();
        let b = SymMatrix::from_row_major(2, &[4.0, -1.0, -1.0, 0.5]).unwrap();
        assert_eq!(a.frobenius_dot(&b), 4.0 - 2.0 - 2.0 + 1.5);
    }

    #[test]
    fn positive_definiteness() {
        assert!(SymMatrix::<f64>::identity(4).is_positive_definite());
        let m = SymMatrix::from_row_major(2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(!m.is_positive_definite());
    }

    #[test]
    fn dense_solve() {
        let a = vec![4.0f64, 1.0, 2.0, 3.0];
        let x = solve_dense(2, a, vec![1.0, 2.0]).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(solve_dense(2, vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn works_in_single_precision() {
        let m = SymMatrix::<f32>::from_row_major(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        assert!((m.det() - 5.0).abs() < 1e-5);
    }
}
