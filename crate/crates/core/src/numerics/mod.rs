//! Self-contained numerical building blocks shared by the estimators.

pub mod linalg;
pub mod optimize;
pub mod quadrature;
pub mod roots;

pub use linalg::{dot, norm_inf, solve_spd, Cholesky, Lu, Matrix};
pub use optimize::minimize_scalar;
pub use quadrature::integrate;
pub use roots::solve_nonlinear;
