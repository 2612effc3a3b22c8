//! Symmetric-function and matrix-derivative calculus.

pub mod derivative;
pub mod document;
pub mod eigen;
pub mod matrix;
pub mod operator;
pub mod sigma;
pub mod symmetric;

pub use derivative::{fd_gradient, fd_hessian_form, Determinant, FnMatrixFunction, MatrixFunction};
pub use eigen::{eigen_sym, Spectrum};
pub use matrix::{Dense, SymMatrix, MAX_DIM};
pub use operator::{cone_check_with, ConcaveTerm, ConeStatus, ConvexPart, OperatorSpec};
pub use sigma::{det_pencil_coefficients, sigma_kb};
pub use symmetric::{elem_sym, elem_sym_all, power_sum};
