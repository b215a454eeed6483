//! Empirical convergence order of a one-step method against a reference solution.

use serde::Serialize;

use crate::algorithms::steps::{amd_step, gradient_descent_step, SolverState};
use crate::algorithms::GammaSchedule;
use crate::error::{Error, Result};
use crate::linops::PrimalVec;
use crate::mirror::MirrorMap;
use crate::objectives::Objective;
use crate::ode::integrate::{integrate, IntegratorOptions};
use crate::ode::system::{OdeSystem, SystemKind};

/// Errors below this are treated as exact.
const EXACT: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log2 error` against `log2 delta`; `None` when
    /// every error is zero.
    pub order: Option<f64>,
}

/// `delta_0, delta_0/2, ...` (`levels` values).
pub fn halvings(delta0: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|i| delta0 / (1u64 << i) as f64).collect()
}

/// Fits the order of `discrete`, which maps a step `delta` to the
/// approximation at the final time, against `exact`.
///
/// Errors are measured in the max norm. Fails with [`Error::Inconsistent`]
/// when the error at the finest step is not below the error at the coarsest.
pub fn consistency_order(
    mut discrete: impl FnMut(f64) -> Result<Vec<f64>>,
    exact: &[f64],
    deltas: &[f64],
) -> Result<ConsistencyReport> {
    if deltas.len() < 2 {
        return Err(Error::InvalidParameter("need at least two step sizes".into()));
    }
    let mut errors = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let approx = discrete(delta)?;
        if approx.len() != exact.len() {
            return Err(Error::DimensionMismatch {
                expected: exact.len(),
                found: approx.len(),
            });
        }
        let err = approx
            .iter()
            .zip(exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    if errors.iter().all(|&e| e <= EXACT) {
        return Ok(ConsistencyReport {
            deltas: deltas.to_vec(),
            errors,
            order: None,
        });
    }
    let (first, last) = (errors[0], errors[errors.len() - 1]);
    if !(last < first) || errors.iter().any(|&e| e <= EXACT || !e.is_finite()) {
        return Err(Error::Inconsistent(format!(
            "errors {errors:?} for steps {deltas:?}"
        )));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.log2()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log2()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(ConsistencyReport {
        deltas: deltas.to_vec(),
        errors,
        order: Some(slope),
    })
}

/// Slope and intercept of the least-squares line through `(xs, ys)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn step_count(t1: f64, delta: f64) -> Result<usize> {
    let n = (t1 / delta).round();
    if (n * delta - t1).abs() > 1e-9 * t1.max(1.0) || n < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "t1 = {t1} is not a multiple of delta = {delta}"
        )));
    }
    Ok(n as usize)
}

/// Order of AMD with `h = delta^2` as an integrator of the accelerated dual
/// system with parameter `r`, measured on `x` at `t1`.
///
/// The reference starts at `t0` with `zeta(t0) = grad phi(x0)`, `x(t0) = x0`;
/// AMD iterate `k` is compared at time `k delta`.
#[allow(clippy::too_many_arguments)]
pub fn amd_consistency(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    x0: &PrimalVec,
    schedule: &GammaSchedule,
    r: f64,
    t0: f64,
    t1: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<ConsistencyReport> {
    let sys = OdeSystem::new(SystemKind::AcceleratedDual { r }, map, f)?.with_t0(t0)?;
    let y0 = sys.initial_state(x0)?;
    let traj = integrate(
        |t, y| sys.rhs(t, y),
        t0,
        t1,
        &y0,
        &IntegratorOptions::with_tol(tol),
    )?;
    let exact = sys.primal_point(traj.final_state()).into_inner();
    let start = SolverState::start(map, x0.clone())?;
    consistency_order(
        |delta| {
            let n = step_count(t1, delta)?;
            let h = delta * delta;
            let mut st = start.clone();
            for _ in 0..n {
                st = amd_step(&st, map, f, schedule, h);
            }
            Ok(st.x.into_inner())
        },
        &exact,
        deltas,
    )
}

/// Order of explicit Euler (gradient descent with `h = delta`) on the gradient
/// flow, against a reference solution at `t1`.
pub fn euler_consistency(
    f: &dyn Objective,
    x0: &PrimalVec,
    t1: f64,
    deltas: &[f64],
    tol: f64,
) -> Result<ConsistencyReport> {
    let map = crate::mirror::EuclideanMirror::new(f.dim());
    let sys = OdeSystem::new(SystemKind::GradientFlow, &map, f)?;
    let traj = integrate(
        |t, y| sys.rhs(t, y),
        0.0,
        t1,
        x0,
        &IntegratorOptions::with_tol(tol),
    )?;
    let exact = traj.final_state().to_vec();
    consistency_order(
        |delta| {
            let n = step_count(t1, delta)?;
            let mut x = x0.clone();
            for _ in 0..n {
                x = gradient_descent_step(&x, f, delta);
            }
            Ok(x.into_inner())
        },
        &exact,
        deltas,
    )
}
