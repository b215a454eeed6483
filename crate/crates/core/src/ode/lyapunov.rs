//! Lyapunov functions of the continuous-time systems.

use std::fmt;
use std::str::FromStr;

use crate::algorithms::Reference;
use crate::error::{Error, Result};
use crate::linops::DualVec;
use crate::ode::system::{OdeSystem, SystemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContinuousLyapunov {
    /// `t (f(x) - f*) + |x - x*|^2 / 2`, for the gradient flow.
    GradientFlow,
    /// `(t/r)^2 (f(x) - f*) + |z - x*|^2 / 2`, for the euclidean accelerated system.
    Polyak,
    /// `(t/r)^2 (f(x) - f*) + D_psi*(zeta, zeta*)`.
    Dual,
    /// `(t/r)^2 (f(x) - f*) + D_phi(x*, chi(zeta))`.
    Primal,
}

impl fmt::Display for ContinuousLyapunov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContinuousLyapunov::GradientFlow => "gf",
            ContinuousLyapunov::Polyak => "polyak",
            ContinuousLyapunov::Dual => "dual",
            ContinuousLyapunov::Primal => "primal",
        })
    }
}

impl FromStr for ContinuousLyapunov {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gf" => Ok(ContinuousLyapunov::GradientFlow),
            "polyak" => Ok(ContinuousLyapunov::Polyak),
            "dual" => Ok(ContinuousLyapunov::Dual),
            "primal" => Ok(ContinuousLyapunov::Primal),
            other => Err(Error::InvalidParameter(format!("unknown Lyapunov tag '{other}'"))),
        }
    }
}

fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>()
}

/// Value of `tag` at `(t, state)` of `sys`.
///
/// The accelerated tags take `r` from the system. `Dual` needs a reference
/// with a dual point and a system carrying (or implying) `zeta`.
pub fn lyapunov_continuous(
    tag: ContinuousLyapunov,
    sys: &OdeSystem<'_>,
    t: f64,
    state: &[f64],
    reference: &Reference,
) -> Result<f64> {
    let x = sys.primal_point(state);
    let gap = sys.f.value(&x) - reference.f_star;
    let accel_weight = || -> Result<f64> {
        let r = sys.kind.r().ok_or_else(|| {
            Error::InvalidParameter(format!("Lyapunov tag {tag} needs an accelerated system"))
        })?;
        Ok((t / r) * (t / r))
    };
    let d = sys.dim();
    match tag {
        ContinuousLyapunov::GradientFlow => Ok(t * gap + half_sq_dist(&x, &reference.x_star)),
        ContinuousLyapunov::Polyak => {
            let z = sys.mirror_point(state);
            Ok(accel_weight()? * gap + half_sq_dist(&z, &reference.x_star))
        }
        ContinuousLyapunov::Dual => {
            let zs = reference.zeta_star.as_ref().ok_or_else(|| {
                Error::InvalidParameter("dual Lyapunov function needs an interior minimiser".into())
            })?;
            let zeta = match sys.kind {
                SystemKind::AcceleratedDual { .. } | SystemKind::MirrorFlowDual => {
                    DualVec::new(state[..d].to_vec())
                }
                _ => sys.map.grad_phi(&sys.mirror_point(state))?,
            };
            Ok(accel_weight()? * gap + sys.map.bregman_dual(&zeta, zs))
        }
        ContinuousLyapunov::Primal => {
            let div = match sys.kind {
                SystemKind::AcceleratedDual { .. } | SystemKind::MirrorFlowDual => sys
                    .map
                    .bregman_primal_to_image(&reference.x_star, &DualVec::new(state[..d].to_vec())),
                _ => sys.map.bregman_primal(&reference.x_star, &sys.mirror_point(state))?,
            };
            Ok(accel_weight()? * gap + div)
        }
    }
}

/// Largest increase `max(V(t_i+1) - V(t_i), 0)` over the sampled values.
pub fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}
