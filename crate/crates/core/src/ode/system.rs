//! Right-hand sides of the continuous-time systems.
//!
//! States are flat vectors. Single-block systems store one length-`d` block;
//! the accelerated systems store `[first block, x]` where the first block is
//! `zeta` (dual form) or `z = chi(zeta)` (primal form).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::{Geometry, MirrorMap};
use crate::objectives::Objective;

/// Default start time of the accelerated systems, which are singular at `t = 0`.
pub const ACCELERATED_T0: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// `x' = -grad f(x)` (euclidean only).
    GradientFlow,
    /// `zeta' = -grad f(chi(zeta))`.
    MirrorFlowDual,
    /// `x' = -chi'(grad phi(x)) grad f(x)`.
    MirrorFlowPrimal,
    /// `zeta' = -(t/r) grad f(x)`, `x' = (r/t)(chi(zeta) - x)`.
    AcceleratedDual { r: f64 },
    /// `z' = chi'(grad phi(z))(-(t/r) grad f(x))`, `x' = (r/t)(z - x)`.
    AcceleratedPrimal { r: f64 },
}

impl SystemKind {
    pub const TAGS: [&'static str; 5] = [
        "gradient_flow",
        "mirror_flow_dual",
        "mirror_flow_primal",
        "accelerated_dual",
        "accelerated_primal",
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            SystemKind::GradientFlow => "gradient_flow",
            SystemKind::MirrorFlowDual => "mirror_flow_dual",
            SystemKind::MirrorFlowPrimal => "mirror_flow_primal",
            SystemKind::AcceleratedDual { .. } => "accelerated_dual",
            SystemKind::AcceleratedPrimal { .. } => "accelerated_primal",
        }
    }

    /// Parses a tag, attaching `r` to the accelerated systems.
    pub fn from_tag(tag: &str, r: f64) -> Result<Self> {
        let kind = match tag.trim() {
            "gradient_flow" => SystemKind::GradientFlow,
            "mirror_flow_dual" => SystemKind::MirrorFlowDual,
            "mirror_flow_primal" => SystemKind::MirrorFlowPrimal,
            "accelerated_dual" => SystemKind::AcceleratedDual { r },
            "accelerated_primal" => SystemKind::AcceleratedPrimal { r },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown system '{other}' (expected one of {})",
                    Self::TAGS.join(", ")
                )))
            }
        };
        if kind.is_accelerated() && !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("r must be positive, got {r}")));
        }
        Ok(kind)
    }

    pub fn is_accelerated(&self) -> bool {
        matches!(
            self,
            SystemKind::AcceleratedDual { .. } | SystemKind::AcceleratedPrimal { .. }
        )
    }

    /// Number of length-`d` blocks in the state.
    pub fn blocks(&self) -> usize {
        if self.is_accelerated() {
            2
        } else {
            1
        }
    }

    pub fn default_t0(&self) -> f64 {
        if self.is_accelerated() {
            ACCELERATED_T0
        } else {
            0.0
        }
    }

    pub fn r(&self) -> Option<f64> {
        match *self {
            SystemKind::AcceleratedDual { r } | SystemKind::AcceleratedPrimal { r } => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.r() {
            Some(r) => write!(f, "{}(r={r})", self.tag()),
            None => f.write_str(self.tag()),
        }
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    /// Accepts `tag` or `tag:R` for the accelerated systems (default `r = 3`).
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((tag, r)) => {
                let r: f64 = r
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad r in system '{s}'")))?;
                let kind = Self::from_tag(tag, r)?;
                if !kind.is_accelerated() {
                    return Err(Error::InvalidParameter(format!(
                        "system '{tag}' takes no r parameter"
                    )));
                }
                Ok(kind)
            }
            None => Self::from_tag(s, 3.0),
        }
    }
}

/// A system bound to a geometry and objective.
#[derive(Clone, Copy, Debug)]
pub struct OdeSystem<'a> {
    pub kind: SystemKind,
    pub map: &'a dyn MirrorMap,
    pub f: &'a dyn Objective,
    pub t0: f64,
}

impl<'a> OdeSystem<'a> {
    pub fn new(kind: SystemKind, map: &'a dyn MirrorMap, f: &'a dyn Objective) -> Result<Self> {
        if f.dim() != map.dim() {
            return Err(Error::DimensionMismatch {
                expected: map.dim(),
                found: f.dim(),
            });
        }
        if kind == SystemKind::GradientFlow && map.geometry() != Geometry::Euclidean {
            return Err(Error::InvalidParameter(
                "gradient_flow is only defined on the euclidean geometry".into(),
            ));
        }
        Ok(Self {
            kind,
            map,
            f,
            t0: kind.default_t0(),
        })
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) || (self.kind.is_accelerated() && t0 <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "start time t0 = {t0} not admissible for {}",
                self.kind
            )));
        }
        self.t0 = t0;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn state_len(&self) -> usize {
        self.kind.blocks() * self.dim()
    }

    /// State at `t0` built from a primal starting point. Dual blocks get
    /// `grad phi(x0)`, so that `x(t0) = chi(zeta(t0))`.
    pub fn initial_state(&self, x0: &PrimalVec) -> Result<Vec<f64>> {
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x0.len(),
            });
        }
        Ok(match self.kind {
            SystemKind::GradientFlow | SystemKind::MirrorFlowPrimal => x0.to_vec(),
            SystemKind::MirrorFlowDual => self.map.initial_dual(x0)?.into_inner(),
            SystemKind::AcceleratedDual { .. } => {
                let mut s = self.map.initial_dual(x0)?.into_inner();
                s.extend_from_slice(x0);
                s
            }
            SystemKind::AcceleratedPrimal { .. } => {
                let mut s = x0.to_vec();
                s.extend_from_slice(x0);
                s
            }
        })
    }

    /// The point at which `f` is evaluated.
    pub fn primal_point(&self, state: &[f64]) -> PrimalVec {
        let d = self.dim();
        match self.kind {
            SystemKind::MirrorFlowDual => self.map.chi(&DualVec::new(state[..d].to_vec())),
            SystemKind::GradientFlow | SystemKind::MirrorFlowPrimal => PrimalVec::new(state[..d].to_vec()),
            _ => PrimalVec::new(state[d..2 * d].to_vec()),
        }
    }

    /// The mirror point: `chi(zeta)` or `z`, whichever the state carries.
    pub fn mirror_point(&self, state: &[f64]) -> PrimalVec {
        let d = self.dim();
        match self.kind {
            SystemKind::MirrorFlowDual | SystemKind::AcceleratedDual { .. } => {
                self.map.chi(&DualVec::new(state[..d].to_vec()))
            }
            _ => PrimalVec::new(state[..d].to_vec()),
        }
    }

    fn check_primal_block(&self, block: &[f64], what: &str) -> Result<()> {
        if self.map.feasible_set().contains_with_tol(block, 1e-6) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} left the feasible set: {block:?}")))
        }
    }

    /// Time derivative of `state` at time `t`.
    ///
    /// Primal-form systems use the closed-form action of `chi'` on the mirror
    /// point, which stays defined on the boundary; boundary faces are invariant.
    pub fn rhs(&self, t: f64, state: &[f64]) -> Result<Vec<f64>> {
        if t < self.t0 * (1.0 - 1e-12) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time t = {t} precedes t0 = {}",
                self.t0
            )));
        }
        if state.len() != self.state_len() {
            return Err(Error::DimensionMismatch {
                expected: self.state_len(),
                found: state.len(),
            });
        }
        let d = self.dim();
        let out = match self.kind {
            SystemKind::GradientFlow => {
                let x = PrimalVec::new(state.to_vec());
                self.f.gradient(&x).iter().map(|g| -g).collect()
            }
            SystemKind::MirrorFlowDual => {
                let x = self.map.chi(&DualVec::new(state.to_vec()));
                self.f.gradient(&x).iter().map(|g| -g).collect()
            }
            SystemKind::MirrorFlowPrimal => {
                self.check_primal_block(state, "x")?;
                let x = PrimalVec::new(state.to_vec());
                let v = self.f.gradient(&x).scale(-1.0);
                self.map.chi_jacobian_at_primal(&x, &v).into_inner()
            }
            SystemKind::AcceleratedDual { r } => {
                let zeta = DualVec::new(state[..d].to_vec());
                let x = PrimalVec::new(state[d..].to_vec());
                let chi = self.map.chi(&zeta);
                let g = self.f.gradient(&x);
                let mut out: Vec<f64> = g.iter().map(|gi| -(t / r) * gi).collect();
                out.extend(chi.iter().zip(x.iter()).map(|(c, xi)| (r / t) * (c - xi)));
                out
            }
            SystemKind::AcceleratedPrimal { r } => {
                self.check_primal_block(&state[..d], "z")?;
                let z = PrimalVec::new(state[..d].to_vec());
                let x = PrimalVec::new(state[d..].to_vec());
                let v = self.f.gradient(&x).scale(-(t / r));
                let mut out = self.map.chi_jacobian_at_primal(&z, &v).into_inner();
                out.extend(z.iter().zip(x.iter()).map(|(zi, xi)| (r / t) * (zi - xi)));
                out
            }
        };
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Domain(format!("non-finite derivative at t = {t}")))
        }
    }
}
