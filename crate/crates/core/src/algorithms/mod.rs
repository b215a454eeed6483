//! Discrete optimisers and their Lyapunov monitors.

pub mod gamma;
pub mod lyapunov;
pub mod regularized;
pub mod runner;
pub mod steps;

pub use gamma::{GammaSchedule, GammaSequence};
pub use lyapunov::{lyapunov_dual, lyapunov_primal, LyapunovWeight, Reference};
pub use regularized::{regularized_argmin, Regularizer};
pub use runner::{run, run_with, Algorithm, RunConfig, Trace, TraceRecord};
pub use steps::{
    amd_primal_step, amd_step, amdr_step, gradient_descent_step, mirror_descent_dual_step,
    mirror_descent_step, nesterov_three_term_step, AmdrParams, PrimalAmdState, SolverState,
};
