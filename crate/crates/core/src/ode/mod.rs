//! Continuous-time systems, a reference integrator and the ARK view of AMD.

pub mod ark;
pub mod consistency;
pub mod integrate;
pub mod lyapunov;
pub mod system;

pub use ark::{ark_amd_run, ark_amd_step, Stage};
pub use consistency::{amd_consistency, consistency_order, euler_consistency, halvings, ConsistencyReport};
pub use integrate::{integrate, IntegratorOptions, Trajectory};
pub use lyapunov::{lyapunov_continuous, ContinuousLyapunov};
pub use system::{OdeSystem, SystemKind, ACCELERATED_T0};
