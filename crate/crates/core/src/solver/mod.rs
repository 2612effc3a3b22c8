//! Cut-cell finite differences and a continuation Newton solver for planar
//! Dirichlet problems.

pub mod domain;
pub mod formulation;
pub mod grid;
pub mod linear;
pub mod newton;

pub use domain::ConvexDomain;
pub use formulation::{to_shifted, from_shifted, DirichletOperator, ReducedOperator};
pub use grid::{discrete_hessian, hessian_field, Grid, GridField, Neighbor};
pub use linear::{bicgstab, linear_solve, CsrMatrix, LinearStats};
pub use newton::{residual, solve_dirichlet, SolveOptions, SolveReport, StepReport};
