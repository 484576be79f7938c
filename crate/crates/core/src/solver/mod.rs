//! Monolithic semi-smooth Newton solver, the direct sparse linear solver
//! behind it, and the incremental loading time loop.

pub mod linear;
pub mod newton;
pub mod timeloop;

pub use linear::{LinearSolveError, SparseLu};
pub use newton::{NewtonError, NewtonSettings, NewtonStats};
pub use timeloop::{run_time_loop, ConvergenceLog, RunOutput, TimeLoopConfig, TimeLoopError};
