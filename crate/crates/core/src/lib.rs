//! Fully nonlinear elliptic operators built from elementary symmetric
//! functions of the Hessian: algebra, concavity checks, a Dirichlet solver,
//! radial reference solutions and Hölder probes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod concavity;
pub mod error;
pub mod oracle;
pub mod probe;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SymMatrixF64 = algebra::SymMatrix<f64>;
pub type SpectrumF64 = algebra::Spectrum<f64>;
pub type OperatorSpecF64 = algebra::OperatorSpec<f64>;
pub type ScalarTransformF64 = concavity::ScalarTransform<f64>;
pub type Tensor3F64 = concavity::Tensor3<f64>;
