//! Finite-difference derivatives of scalar functions of symmetric matrices.
//!
//! The gradient convention is `G_ij = dF/dM_ij` with `M_ij` and `M_ji`
//! treated as independent, so `d/ds F(M + sP) = <G, P>` in the Frobenius
//! pairing.

use crate::algebra::matrix::SymMatrix;
use crate::scalar::Real;

/// Relative gradient step: `h = GRADIENT_STEP * (1 + |M|_max)`.
pub const GRADIENT_STEP: f64 = 1e-6;
/// Relative step of the 5-point second directional derivative.
pub const HESSIAN_STEP: f64 = 1e-4;

/// A scalar function of a symmetric matrix with first and second derivatives.
///
/// Derivatives default to central finite differences; linear or otherwise
/// simple functions override them with exact formulas.
pub trait MatrixFunction<T: Real>: Sync {
    fn value(&self, m: &SymMatrix<T>) -> T;

    fn gradient(&self, m: &SymMatrix<T>) -> SymMatrix<T> {
        fd_gradient(|x| self.value(x), m)
    }

    /// `d^2/ds^2 F(M + sP)` at `s = 0`.
    fn hessian_form(&self, m: &SymMatrix<T>, p: &SymMatrix<T>) -> T {
        fd_hessian_form(|x| self.value(x), m, p)
    }

    /// Symmetric bilinear form `D^2F(M)[P, Q]`, by polarization.
    fn hessian_bilinear(&self, m: &SymMatrix<T>, p: &SymMatrix<T>, q: &SymMatrix<T>) -> T {
        let plus = self.hessian_form(m, &(p + q));
        let minus = self.hessian_form(m, &(p - q));
        (plus - minus) * T::lit(0.25)
    }
}

impl<T: Real, F: MatrixFunction<T> + ?Sized> MatrixFunction<T> for &F {
    fn value(&self, m: &SymMatrix<T>) -> T {
        (**self).value(m)
    }
    fn gradient(&self, m: &SymMatrix<T>) -> SymMatrix<T> {
        (**self).gradient(m)
    }
    fn hessian_form(&self, m: &SymMatrix<T>, p: &SymMatrix<T>) -> T {
        (**self).hessian_form(m, p)
    }
}

/// Central-difference gradient with step `1e-6 * (1 + |M|_max)`.
///
/// Off-diagonal entries are perturbed symmetrically, which moves both
/// `M_ij` and `M_ji`; the difference quotient is halved accordingly.
pub fn fd_gradient<T: Real>(f: impl Fn(&SymMatrix<T>) -> T, m: &SymMatrix<T>) -> SymMatrix<T> {
    let n = m.dim();
    let h = T::lit(GRADIENT_STEP) * (T::one() + m.norm_max());
    SymMatrix::from_fn(n, |i, j| {
        let mut plus = m.clone();
        let mut minus = m.clone();
        plus.set(i, j, m.get(i, j) + h);
        minus.set(i, j, m.get(i, j) - h);
        let d = f(&plus) - f(&minus);
        if i == j {
            d / (T::lit(2.0) * h)
        } else {
            d / (T::lit(4.0) * h)
        }
    })
}

/// Five-point second directional derivative with step `1e-4 * (1 + |M|_max)`.
pub fn fd_hessian_form<T: Real>(
    f: impl Fn(&SymMatrix<T>) -> T,
    m: &SymMatrix<T>,
    p: &SymMatrix<T>,
) -> T {
    let h = T::lit(HESSIAN_STEP) * (T::one() + m.norm_max());
    let at = |s: T| f(&m.add_scaled(p, s * h));
    let two = T::lit(2.0);
    let f0 = at(T::zero());
    let near = at(T::one()) + at(-T::one()) - two * f0;
    let far = at(two) + at(-two) - two * f0;
    let num = T::lit(16.0) * near - far;
    num / (T::lit(12.0) * h * h)
}

/// `det(M)` with its analytic adjugate, the reference for finite differences.
#[derive(Debug, Clone, Copy, Default)]
pub struct Determinant;

impl Determinant {
    /// Adjugate (transpose of the cofactor matrix), the exact gradient of `det`.
    pub fn adjugate<T: Real>(m: &SymMatrix<T>) -> SymMatrix<T> {
        let n = m.dim();
        if n == 1 {
            return SymMatrix::identity(1);
        }
        SymMatrix::from_fn(n, |i, j| {
            let minor = crate::algebra::matrix::Dense::from_fn(n - 1, |r, c| {
                let rr = if r < j { r } else { r + 1 };
                let cc = if c < i { c } else { c + 1 };
                m.get(rr, cc)
            });
            let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
            sign * minor.det()
        })
    }
}

impl<T: Real> MatrixFunction<T> for Determinant {
    fn value(&self, m: &SymMatrix<T>) -> T {
        m.det()
    }
}

/// Wraps a closure as a [`MatrixFunction`] with finite-difference derivatives.
pub struct FnMatrixFunction<F>(pub F);

impl<T: Real, F: Fn(&SymMatrix<T>) -> T + Sync> MatrixFunction<T> for FnMatrixFunction<F> {
    fn value(&self, m: &SymMatrix<T>) -> T {
        (self.0)(m)
    }
}
