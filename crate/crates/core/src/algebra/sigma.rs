//! `sigma_{k,B}(M)`: the coefficient of `t^k` in `det(B + t M)`.

use crate::algebra::matrix::{solve_dense, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Chebyshev points of the first kind on `[-1, 1]`, `count` of them.
pub fn chebyshev_nodes<T: Real>(count: usize) -> Vec<T> {
    let m = T::from_usize_lossy(count);
    (0..count)
        .map(|j| {
            let num = T::from_usize_lossy(2 * j + 1) * T::PI();
            (num / (T::lit(2.0) * m)).cos()
        })
        .collect()
}

/// Coefficients `c_0..c_n` of `det(B + t M) = sum_k c_k t^k`, recovered by
/// interpolating the determinant at `n + 1` Chebyshev nodes.
pub fn det_pencil_coefficients<T: Real>(b: &SymMatrix<T>, m: &SymMatrix<T>) -> Result<Vec<T>> {
    let n = m.dim();
    if b.dim() != n {
        return Err(Error::domain(format!(
            "dimension mismatch: B is {}x{}, M is {n}x{n}",
            b.dim(),
            b.dim()
        )));
    }
    interpolate_pencil(b, m, &chebyshev_nodes(n + 1))
}

/// Solves the Vandermonde system for the pencil coefficients at `nodes`.
pub(crate) fn interpolate_pencil<T: Real>(
    b: &SymMatrix<T>,
    m: &SymMatrix<T>,
    nodes: &[T],
) -> Result<Vec<T>> {
    let deg = m.dim();
    let count = deg + 1;
    if nodes.len() != count {
        return Err(Error::Internal(format!(
            "pencil interpolation needs {count} nodes, got {}",
            nodes.len()
        )));
    }
    let mut vander = Vec::with_capacity(count * count);
    let mut values = Vec::with_capacity(count);
    for &t in nodes {
        let mut p = T::one();
        for _ in 0..count {
            vander.push(p);
            p = p * t;
        }
        values.push(b.add_scaled(m, t).det());
    }
    solve_dense(count, vander, values)
        .ok_or_else(|| Error::Internal("singular pencil interpolation (duplicate nodes)".into()))
}

/// `sigma_{k,B}(M)`, the `t^k` coefficient of `det(B + t M)`.
pub fn sigma_kb<T: Real>(k: usize, b: &SymMatrix<T>, m: &SymMatrix<T>) -> Result<T> {
    let n = m.dim();
    if k > n {
        return Err(Error::domain(format!("order k = {k} exceeds n = {n}")));
    }
    Ok(det_pencil_coefficients(b, m)?[k])
}
