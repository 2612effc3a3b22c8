//! Operators the Dirichlet solver accepts, and the shifted-variable form
//! `v = u + |x|^2 / 2` in which `D^2 v = D^2 u + I`.

use std::sync::Arc;

use crate::algebra::derivative::{Determinant, MatrixFunction};
use crate::algebra::eigen::eigen_sym;
use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::{ConeStatus, OperatorSpec};
use crate::error::{Error, Result};
use crate::solver::grid::GridField;

/// A planar fully nonlinear operator `F(D^2 u)` with its ellipticity cone.
pub trait DirichletOperator: Sync {
    fn dim(&self) -> usize;
    fn value(&self, m: &SymMatrix<f64>) -> f64;
    fn gradient(&self, m: &SymMatrix<f64>) -> SymMatrix<f64>;
    fn cone(&self, m: &SymMatrix<f64>, margin: f64) -> Result<ConeStatus<f64>>;
    /// The right-hand side must exceed this everywhere for the existence theory to apply.
    fn rhs_threshold(&self) -> f64;
}

impl DirichletOperator for OperatorSpec<f64> {
    fn dim(&self) -> usize {
        OperatorSpec::dim(self)
    }

    fn value(&self, m: &SymMatrix<f64>) -> f64 {
        MatrixFunction::value(self, m)
    }

    fn gradient(&self, m: &SymMatrix<f64>) -> SymMatrix<f64> {
        MatrixFunction::gradient(self, m)
    }

    fn cone(&self, m: &SymMatrix<f64>, margin: f64) -> Result<ConeStatus<f64>> {
        self.cone_check(m, margin)
    }

    fn rhs_threshold(&self) -> f64 {
        self.dim() as f64 - 1.0
    }
}

/// `det(M) - tr(M)`: in `v`-variables the sum-of-Hessians equation
/// `sum_{k>=2} S_k(D^2 u) = f` becomes `det(D^2 v) - tr(D^2 v) = f - n + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedOperator {
    n: usize,
}

impl ReducedOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n != 2 {
            return Err(Error::domain(format!(
                "the grid solver is planar; reduced operator needs n = 2, got {n}"
            )));
        }
        Ok(Self { n })
    }
}

impl DirichletOperator for ReducedOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, m: &SymMatrix<f64>) -> f64 {
        m.det() - m.trace()
    }

    fn gradient(&self, m: &SymMatrix<f64>) -> SymMatrix<f64> {
        &Determinant::adjugate(m) - &SymMatrix::identity(self.n)
    }

    /// `D^2 v > 0` and every eigen-direction derivative positive.
    fn cone(&self, m: &SymMatrix<f64>, margin: f64) -> Result<ConeStatus<f64>> {
        if !(margin >= 0.0) {
            return Err(Error::precondition(format!("cone margin must be >= 0, got {margin}")));
        }
        let spec = eigen_sym(m)?;
        let g = self.gradient(m).in_basis(&spec.eigenvectors);
        let min_eigen_derivative = (0..self.n).map(|i| g.get(i, i)).fold(f64::INFINITY, f64::min);
        let slack = spec.min();
        Ok(ConeStatus {
            inside: slack > margin && min_eigen_derivative > margin,
            margin_attained: slack.min(min_eigen_derivative),
            min_eigenvalue: spec.min(),
            min_eigen_derivative,
        })
    }

    fn rhs_threshold(&self) -> f64 {
        0.0
    }
}

fn half_square(x: f64, y: f64) -> f64 {
    0.5 * (x * x + y * y)
}

/// `v = u + |x|^2 / 2` at nodes and cut points.
pub fn to_shifted(u: &GridField) -> GridField {
    shift(u, 1.0)
}

/// Inverse of [`to_shifted`], up to one rounding per value.
pub fn from_shifted(v: &GridField) -> GridField {
    shift(v, -1.0)
}

fn shift(u: &GridField, sign: f64) -> GridField {
    let grid: &Arc<_> = u.grid();
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(k, val)| {
            let [x, y] = grid.position(k);
            val + sign * half_square(x, y)
        })
        .collect();
    let boundary = u
        .boundary
        .iter()
        .zip(grid.cuts())
        .map(|(val, &[x, y])| val + sign * half_square(x, y))
        .collect();
    GridField::new(grid.clone(), values, boundary).expect("shifted field keeps its shape")
}
