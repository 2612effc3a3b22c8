//! Operators `F(M) = F_convex(M) + sum_a f_a * sigma_{k_a, B_a}(M)` with a
//! common concavifying transform `G`.

use crate::algebra::derivative::{fd_gradient, MatrixFunction};
use crate::algebra::eigen::eigen_sym;
use crate::algebra::matrix::{SymMatrix, MAX_DIM};
use crate::algebra::sigma::sigma_kb;
use crate::concavity::transform::ScalarTransform;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Linear (hence convex) uniformly elliptic part.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexPart<T> {
    /// `tr(A M)` with `A` symmetric positive definite.
    Trace(SymMatrix<T>),
    /// `tr(M)`, the Laplacian.
    Laplacian,
    /// Identically zero; the operator is a pure sum of symmetric-polynomial terms.
    Zero,
}

impl<T: Real> ConvexPart<T> {
    /// The coefficient matrix `A` (identity for the Laplacian, zero for `Zero`).
    pub fn matrix(&self, n: usize) -> SymMatrix<T> {
        match self {
            ConvexPart::Trace(a) => a.clone(),
            ConvexPart::Laplacian => SymMatrix::identity(n),
            ConvexPart::Zero => SymMatrix::zeros(n),
        }
    }

    /// Ellipticity constants `(lambda, Lambda)`: extreme eigenvalues of `A`.
    /// `None` for the zero part.
    pub fn ellipticity(&self) -> Result<Option<(T, T)>> {
        match self {
            ConvexPart::Zero => Ok(None),
            ConvexPart::Laplacian => Ok(Some((T::one(), T::one()))),
            ConvexPart::Trace(a) => {
                let s = eigen_sym(a)?;
                Ok(Some((s.min(), s.max())))
            }
        }
    }
}

impl<T: Real> MatrixFunction<T> for ConvexPart<T> {
    fn value(&self, m: &SymMatrix<T>) -> T {
        match self {
            ConvexPart::Trace(a) => a.frobenius_dot(m),
            ConvexPart::Laplacian => m.trace(),
            ConvexPart::Zero => T::zero(),
        }
    }

    fn gradient(&self, m: &SymMatrix<T>) -> SymMatrix<T> {
        self.matrix(m.dim())
    }

    fn hessian_form(&self, _m: &SymMatrix<T>, _p: &SymMatrix<T>) -> T {
        T::zero()
    }
}

/// One term `weight * sigma_{k,B}(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveTerm<T> {
    pub k: usize,
    pub weight: T,
    pub b: SymMatrix<T>,
}

impl<T: Real> ConcaveTerm<T> {
    /// `S_k` of the eigenvalues: unit weight, `B = I`.
    pub fn elementary(n: usize, k: usize) -> Self {
        Self {
            k,
            weight: T::one(),
            b: SymMatrix::identity(n),
        }
    }
}

impl<T: Real> MatrixFunction<T> for ConcaveTerm<T> {
    fn value(&self, m: &SymMatrix<T>) -> T {
        // k <= n and matching dimensions are validated by `OperatorSpec::new`
        self.weight * sigma_kb(self.k, &self.b, m).unwrap_or_else(|_| T::nan())
    }
}

/// A generalized twisted-type operator: convex part, concave terms, transform.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec<T> {
    n: usize,
    convex: ConvexPart<T>,
    terms: Vec<ConcaveTerm<T>>,
    transform: ScalarTransform<T>,
}

impl<T: Real> OperatorSpec<T> {
    pub fn new(
        n: usize,
        convex: ConvexPart<T>,
        terms: Vec<ConcaveTerm<T>>,
        transform: ScalarTransform<T>,
    ) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::domain(format!(
                "dimension n = {n} outside supported range 2..={MAX_DIM}"
            )));
        }
        if let ConvexPart::Trace(a) = &convex {
            if a.dim() != n {
                return Err(Error::domain("convex matrix A has wrong dimension"));
            }
            a.check_finite()?;
            if !a.is_positive_definite() {
                return Err(Error::domain("convex matrix A must be positive definite"));
            }
        }
        for (idx, t) in terms.iter().enumerate() {
            if !(2..=n).contains(&t.k) {
                return Err(Error::domain(format!(
                    "term {idx}: order k = {} outside 2..={n}",
                    t.k
                )));
            }
            if !(t.weight >= T::zero()) || !t.weight.is_finite() {
                return Err(Error::domain(format!(
                    "term {idx}: weight must be finite and >= 0, got {}",
                    t.weight
                )));
            }
            if t.b.dim() != n {
                return Err(Error::domain(format!("term {idx}: B has wrong dimension")));
            }
            t.b.check_finite()?;
            if !t.b.is_positive_definite() {
                return Err(Error::domain(format!(
                    "term {idx}: B must be positive definite"
                )));
            }
        }
        Ok(Self {
            n,
            convex,
            terms,
            transform,
        })
    }

    /// `det(D^2 u) + Delta u` with `G = x^(1/n)`.
    pub fn det_plus_laplacian(n: usize) -> Result<Self> {
        Self::new(
            n,
            ConvexPart::Laplacian,
            vec![ConcaveTerm::elementary(n, n)],
            ScalarTransform::power_root(T::from_usize_lossy(n))?,
        )
    }

    /// `sum_{k=2}^n S_k(D^2 u)`, the determinant appearing once (as `S_n`).
    pub fn sum_of_hessians(n: usize) -> Result<Self> {
        Self::new(
            n,
            ConvexPart::Zero,
            (2..=n).map(|k| ConcaveTerm::elementary(n, k)).collect(),
            ScalarTransform::power_root(T::from_usize_lossy(n))?,
        )
    }

    /// `tr(A D^2 u) + sum_{k=2}^n f_k sigma_{k,B_k}(D^2 u)` with `G = x^(1/n)`.
    /// `weights` and `bs` are indexed by `k - 2`.
    pub fn weighted_pencil(n: usize, a: SymMatrix<T>, weights: &[T], bs: Vec<SymMatrix<T>>) -> Result<Self> {
        if weights.len() != n - 1 || bs.len() != n - 1 {
            return Err(Error::domain(format!(
                "expected {} weights and B matrices for k = 2..={n}",
                n - 1
            )));
        }
        let terms = bs
            .into_iter()
            .zip(weights)
            .enumerate()
            .map(|(i, (b, &w))| ConcaveTerm { k: i + 2, weight: w, b })
            .collect();
        Self::new(
            n,
            ConvexPart::Trace(a),
            terms,
            ScalarTransform::power_root(T::from_usize_lossy(n))?,
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn convex(&self) -> &ConvexPart<T> {
        &self.convex
    }

    pub fn terms(&self) -> &[ConcaveTerm<T>] {
        &self.terms
    }

    pub fn transform(&self) -> &ScalarTransform<T> {
        &self.transform
    }

    pub fn with_transform(&self, transform: ScalarTransform<T>) -> Self {
        Self {
            transform,
            ..self.clone()
        }
    }

    pub fn ellipticity(&self) -> Result<Option<(T, T)>> {
        self.convex.ellipticity()
    }

    /// Value of every concave term, in order.
    pub fn term_values(&self, m: &SymMatrix<T>) -> Vec<T> {
        self.terms.iter().map(|t| t.value(m)).collect()
    }

    /// Ellipticity-cone membership; see [`ConeStatus`].
    pub fn cone_check(&self, m: &SymMatrix<T>, margin: T) -> Result<ConeStatus<T>> {
        cone_check_with(self, m, margin)
    }
}

impl<T: Real> MatrixFunction<T> for OperatorSpec<T> {
    fn value(&self, m: &SymMatrix<T>) -> T {
        self.convex.value(m) + self.terms.iter().map(|t| t.value(m)).sum::<T>()
    }

    fn gradient(&self, m: &SymMatrix<T>) -> SymMatrix<T> {
        let linear = self.convex.matrix(self.n);
        if self.terms.is_empty() {
            return linear;
        }
        let nonlinear = fd_gradient(|x| self.terms.iter().map(|t| t.value(x)).sum::<T>(), m);
        &linear + &nonlinear
    }

    fn hessian_form(&self, m: &SymMatrix<T>, p: &SymMatrix<T>) -> T {
        self.terms.iter().map(|t| t.hessian_form(m, p)).sum()
    }
}

/// Result of an ellipticity-cone test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeStatus<T> {
    pub inside: bool,
    /// `min(lambda_min(M) + 1, min_i (Q^T grad F Q)_ii)`, in absolute terms.
    pub margin_attained: T,
    pub min_eigenvalue: T,
    pub min_eigen_derivative: T,
}

/// Tests `lambda_min(M) > -1 + margin` and that every eigen-direction derivative
/// `(Q^T grad F(M) Q)_ii` exceeds `margin`.
pub fn cone_check_with<T: Real, F: MatrixFunction<T> + ?Sized>(
    f: &F,
    m: &SymMatrix<T>,
    margin: T,
) -> Result<ConeStatus<T>> {
    if !(margin >= T::zero()) {
        return Err(Error::precondition(format!("cone margin must be >= 0, got {margin}")));
    }
    let spec = eigen_sym(m)?;
    let g = f.gradient(m).in_basis(&spec.eigenvectors);
    let min_eigen_derivative = (0..m.dim())
        .map(|i| g.get(i, i))
        .fold(T::infinity(), |a, b| a.min(b));
    let shifted = spec.min() + T::one();
    let inside = shifted > margin && min_eigen_derivative > margin;
    Ok(ConeStatus {
        inside,
        margin_attained: shifted.min(min_eigen_derivative),
        min_eigenvalue: spec.min(),
        min_eigen_derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::derivative::Determinant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det_laplacian() -> OperatorSpec<f64> {
        OperatorSpec::det_plus_laplacian(2).unwrap()
    }

    #[test]
    fn det_plus_laplacian_values() {
        let op = det_laplacian();
        assert_eq!(op.value(&SymMatrix::zeros(2)).abs(), 0.0);
        assert!((op.value(&SymMatrix::identity(2)) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn convex_only_operator_is_trace_form() {
        let a = SymMatrix::from_row_major(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let op = OperatorSpec::new(
            2,
            ConvexPart::Trace(a.clone()),
            vec![],
            ScalarTransform::power_root(2.0).unwrap(),
        )
        .unwrap();
        let m = SymMatrix::from_row_major(2, &[-1.0f64, 3.0, 3.0, 0.25]).unwrap();
        assert_eq!(op.value(&m), a.frobenius_dot(&m));
        assert_eq!(op.gradient(&m), a);
        assert!(op.hessian_form(&m, &m).abs() < 1e-6);
    }

    #[test]
    fn gradients_match_analytic_forms() {
        let op = det_laplacian();
        let g = op.gradient(&SymMatrix::identity(2));
        assert!((&g - &SymMatrix::scalar(2, 2.0)).norm_max() < 1e-8);
        let det_only = ConcaveTerm::<f64>::elementary(2, 2);
        let g = det_only.gradient(&SymMatrix::from_diagonal(&[2.0, 3.0]));
        assert!((&g - &SymMatrix::from_diagonal(&[3.0, 2.0])).norm_max() < 1e-8);
        let m = SymMatrix::from_row_major(2, &[1.5, 0.2, 0.2, 0.7]).unwrap();
        let g = det_only.gradient(&m);
        assert!((&g - &Determinant::adjugate(&m)).norm_max() < 1e-8);
    }

    #[test]
    fn second_derivatives_of_determinant_term() {
        let det_only = ConcaveTerm::<f64>::elementary(2, 2);
        let id = SymMatrix::identity(2);
        assert!((det_only.hessian_form(&id, &id) - 2.0).abs() < 1e-6);
        let p = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!((det_only.hessian_form(&id, &p) + 2.0).abs() < 1e-6);
        let lin = ConvexPart::Trace(SymMatrix::from_diagonal(&[2.0, 1.0]));
        assert!(lin.hessian_form(&id, &p).abs() < 1e-6);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let g = || ScalarTransform::power_root(2.0).unwrap();
        let bad_a = SymMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(OperatorSpec::new(2, ConvexPart::Trace(bad_a), vec![], g()).is_err());
        let t = ConcaveTerm { k: 3, weight: 1.0, b: SymMatrix::identity(2) };
        assert!(OperatorSpec::new(2, ConvexPart::Laplacian, vec![t], g()).is_err());
        let t = ConcaveTerm { k: 2, weight: -1.0, b: SymMatrix::identity(2) };
        assert!(OperatorSpec::new(2, ConvexPart::Laplacian, vec![t], g()).is_err());
        let t = ConcaveTerm { k: 2, weight: 1.0, b: SymMatrix::from_diagonal(&[1.0, 0.0]) };
        assert!(OperatorSpec::new(2, ConvexPart::Laplacian, vec![t], g()).is_err());
        assert!(OperatorSpec::<f64>::sum_of_hessians(9).is_err());
        assert!(OperatorSpec::<f64>::sum_of_hessians(1).is_err());
    }

    #[test]
    fn ellipticity_constants_from_a() {
        let a = SymMatrix::from_diagonal(&[0.5, 3.0]);
        let op = OperatorSpec::weighted_pencil(2, a, &[1.0], vec![SymMatrix::identity(2)]).unwrap();
        assert_eq!(op.ellipticity().unwrap(), Some((0.5, 3.0)));
        assert_eq!(OperatorSpec::<f64>::sum_of_hessians(3).unwrap().ellipticity().unwrap(), None);
    }

    #[test]
    fn cone_membership_examples() {
        let op = OperatorSpec::<f64>::sum_of_hessians(2).unwrap();
        let st = op.cone_check(&SymMatrix::identity(2), 0.0).unwrap();
        assert!(st.inside);
        let st = op.cone_check(&SymMatrix::from_diagonal(&[-2.0, 0.0]), 0.0).unwrap();
        assert!(!st.inside);
        // At M = 0 the derivative of lambda_1 lambda_2 vanishes: boundary of the cone.
        let st = op.cone_check(&SymMatrix::zeros(2), 1e-8).unwrap();
        assert!(st.min_eigen_derivative.abs() < 1e-9);
        assert!(!st.inside);
        assert!(op.cone_check(&SymMatrix::zeros(2), -1.0).is_err());
    }

    #[test]
    fn cone_check_invariant_under_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=4 {
            let a = SymMatrix::scalar(n, 1.5);
            let bs: Vec<_> = (2..=n).map(|k| SymMatrix::scalar(n, 0.5 + k as f64)).collect();
            let weights: Vec<f64> = (2..=n).map(|k| 0.25 * k as f64).collect();
            let op = OperatorSpec::weighted_pencil(n, a, &weights, bs).unwrap();
            let presets = [op, OperatorSpec::sum_of_hessians(n).unwrap(), OperatorSpec::det_plus_laplacian(n).unwrap()];
            for preset in &presets {
                for _ in 0..200 {
                    let m = SymMatrix::from_fn(n, |_, _| rng.random_range(-1.5..1.5));
                    let q = crate::algebra::eigen::tests::random_orthogonal(n, &mut rng);
                    let a = preset.cone_check(&m, 0.0).unwrap();
                    let b = preset.cone_check(&m.conjugate(&q), 0.0).unwrap();
                    if a.margin_attained.abs() > 1e-6 {
                        assert_eq!(a.inside, b.inside);
                    }
                }
            }
        }
    }
}
