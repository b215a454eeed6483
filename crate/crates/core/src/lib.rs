//! Accelerated mirror descent and its continuous-time counterpart.
//!
//! The crate is organised bottom-up:
//!
//! * [`linops`]: primal/dual vectors, dense matrices, power iteration;
//! * [`mirror`]: mirror-map geometries (Euclidean, simplex, hypercube) and
//!   their Bregman divergences;
//! * [`objectives`]: the quadratic and p-power test objectives with absolute
//!   and relative smoothness constants;
//! * [`algorithms`]: gradient descent, Nesterov, mirror descent, accelerated
//!   mirror descent (dual and primal forms), the regularised variant, and
//!   discrete Lyapunov monitors;
//! * [`ode`]: the flows these methods discretise, an adaptive reference
//!   integrator, the additive Runge–Kutta reading of AMD, and consistency
//!   measurement;
//! * [`harness`]: experiment presets, CSV/metadata/SVG output and rate fits.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod linops;
pub mod mirror;
pub mod objectives;
pub mod ode;
pub mod rng;

pub use error::{Error, Result};
pub use linops::{DenseMatrix, DualVec, NormKind, PrimalVec};
pub use mirror::{Geometry, MirrorMap};
pub use objectives::Objective;
