//! AMD read as an additive Runge–Kutta method for the accelerated dual system.
//!
//! With `xi = (zeta, x)` the vector field splits as `g1 + g2 + g3`:
//! `g1 = (0, -(r/t) x)`, `g2 = (0, (r/t) chi(zeta))`, `g3 = (-(t/r) grad f(x), 0)`.

use crate::algorithms::steps::SolverState;
use crate::algorithms::GammaSchedule;
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::MirrorMap;
use crate::objectives::Objective;

/// A point `xi = (zeta, x)` of the accelerated dual system.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub zeta: DualVec,
    pub x: PrimalVec,
}

/// Scaled pieces `delta * g(xi, t)`, one block each.
fn g1(st: &Stage, t: f64, r: f64, delta: f64) -> PrimalVec {
    st.x.scale(-delta * r / t)
}

fn g2(map: &dyn MirrorMap, st: &Stage, t: f64, r: f64, delta: f64) -> PrimalVec {
    map.chi(&st.zeta).scale(delta * r / t)
}

fn g3(f: &dyn Objective, st: &Stage, t: f64, r: f64, delta: f64) -> DualVec {
    f.gradient(&st.x).scale(-delta * t / r)
}

/// One ARK step at time `t_tilde = r delta gamma_k`.
///
/// Returns the new point together with the three stage vectors
/// `(zeta_k, x_k)`, `(zeta_k, y_k)` and `(zeta_k+1, y_k)`.
pub fn ark_amd_step(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    xi: &Stage,
    t_tilde: f64,
    delta: f64,
    r: f64,
) -> (Stage, [Stage; 3]) {
    let s1 = xi.clone();
    let a1 = g1(&s1, t_tilde, r, delta);
    let a2 = g2(map, &s1, t_tilde, r, delta);
    let s2 = Stage {
        zeta: xi.zeta.clone(),
        x: PrimalVec::new(
            xi.x.iter()
                .zip(a1.iter().zip(a2.iter()))
                .map(|(x, (p, q))| x + p + q)
                .collect(),
        ),
    };
    let b3 = g3(f, &s2, t_tilde, r, delta);
    let s3 = Stage {
        zeta: xi.zeta.add_scaled(1.0, &b3),
        x: s2.x.clone(),
    };
    let c2 = g2(map, &s3, t_tilde, r, delta);
    let c3 = g3(f, &s3, t_tilde, r, delta);
    // g3 sees the same x at stages 2 and 3, so this reproduces zeta_k+1.
    let next = Stage {
        zeta: xi.zeta.add_scaled(1.0, &c3),
        x: PrimalVec::new(
            xi.x.iter()
                .zip(a1.iter().zip(c2.iter()))
                .map(|(x, (p, q))| x + p + q)
                .collect(),
        ),
    };
    (next, [s1, s2, s3])
}

/// Runs `steps` ARK steps with `delta = sqrt(h)` and `t_tilde_k = r delta gamma_k`,
/// returning the visited states as AMD solver states.
pub fn ark_amd_run(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    start: &SolverState,
    schedule: &GammaSchedule,
    h: f64,
    r: f64,
    steps: usize,
) -> Vec<SolverState> {
    let delta = h.sqrt();
    let mut out = Vec::with_capacity(steps + 1);
    let mut state = start.clone();
    out.push(state.clone());
    for _ in 0..steps {
        let xi = Stage {
            zeta: state.zeta.clone(),
            x: state.x.clone(),
        };
        let t_tilde = r * delta * state.gamma;
        let (next, stages) = ark_amd_step(map, f, &xi, t_tilde, delta, r);
        let [_, s2, _] = stages;
        state = SolverState {
            k: state.k + 1,
            x: next.x,
            zeta: next.zeta,
            y: s2.x,
            gamma: schedule.next(state.k + 1, state.gamma),
        };
        out.push(state.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::steps::amd_step;
    use crate::mirror::EntropicSimplex;
    use crate::objectives::{ClosureObjective, PowerObjective};

    #[test]
    fn stages_match_amd_quantities() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(10).unwrap();
        let st = SolverState::start(&s, PrimalVec::new(vec![0.999, 0.001])).unwrap();
        let sched = GammaSchedule::Linear { r: 3.0 };
        let mut st = amd_step(&st, &s, &f, &sched, 0.5);
        for _ in 0..5 {
            let next = amd_step(&st, &s, &f, &sched, 0.5);
            let xi = Stage {
                zeta: st.zeta.clone(),
                x: st.x.clone(),
            };
            let delta = 0.5f64.sqrt();
            let (out, [_, s2, s3]) = ark_amd_step(&s, &f, &xi, 3.0 * delta * st.gamma, delta, 3.0);
            assert!(s2.x.max_abs_diff(&next.y) <= 1e-14);
            assert!(s3.zeta.max_abs_diff(&next.zeta) <= 1e-14);
            assert!(out.x.max_abs_diff(&next.x) <= 1e-14);
            st = next;
        }
    }

    #[test]
    fn zero_gradient_freezes_dual() {
        let s = EntropicSimplex::new(2);
        let f = ClosureObjective::new(2, |_x: &[f64]| 0.0, |_x: &[f64]| vec![0.0, 0.0]);
        let xi = Stage {
            zeta: DualVec::new(vec![0.3, -0.2]),
            x: PrimalVec::new(vec![0.9, 0.1]),
        };
        let (out, [_, _, s3]) = ark_amd_step(&s, &f, &xi, 1.5, 0.5, 3.0);
        assert_eq!(out.zeta, xi.zeta);
        assert_eq!(s3.zeta, xi.zeta);
    }
}
