//! Executable stability analysis: decoupled elasticity solves with the
//! phase field as a coefficient, manufactured-solution convergence studies,
//! the volume-locking demonstration, and discrete inf-sup constants.

pub mod decoupled;
pub mod dense;
pub mod infsup;
pub mod locking;
pub mod manufactured;

pub use decoupled::{pressure_projection_residual, solve_decoupled_mixed, solve_decoupled_primal};
pub use infsup::{discrete_infsup, triple_norm_infsup, InfSupError, InfSupReport};
pub use locking::{
    convergence_study, locking_study, ConvergenceRow, ConvergenceTable, LockingStudy, Method,
};
pub use manufactured::Manufactured;

#[cfg(test)]
mod tests;
