//! One-step maps of the discrete methods.
//!
//! Every step is a pure function of the incoming state; the runner owns the
//! loop. Euclidean-only methods identify E with E* explicitly.

use crate::algorithms::gamma::GammaSchedule;
use crate::algorithms::regularized::{regularized_argmin, Regularizer};
use crate::error::Result;
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::MirrorMap;
use crate::objectives::Objective;

/// Iterate of the primal/dual methods.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub x: PrimalVec,
    pub zeta: DualVec,
    /// Last extrapolation point; equals `x` before the first step.
    pub y: PrimalVec,
    /// `gamma_k`, the coefficient the next step will use.
    pub gamma: f64,
}

impl SolverState {
    /// `x_0` with `zeta_0 = grad phi(x_0)`, so that `chi(zeta_0) = x_0`.
    pub fn start(map: &dyn MirrorMap, x0: PrimalVec) -> Result<Self> {
        let zeta = map.initial_dual(&x0)?;
        Ok(Self::from_parts(x0, zeta))
    }

    pub fn from_parts(x: PrimalVec, zeta: DualVec) -> Self {
        Self {
            k: 0,
            y: x.clone(),
            x,
            zeta,
            gamma: GammaSchedule::INITIAL,
        }
    }
}

/// Iterate of the primal-only form of AMD: `z_k` replaces `zeta_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalAmdState {
    pub k: usize,
    pub x: PrimalVec,
    pub z: PrimalVec,
    pub y: PrimalVec,
    pub gamma: f64,
}

impl PrimalAmdState {
    pub fn start(x0: PrimalVec) -> Self {
        Self {
            k: 0,
            z: x0.clone(),
            y: x0.clone(),
            x: x0,
            gamma: GammaSchedule::INITIAL,
        }
    }
}

/// `x_{k+1} = x_k - h grad f(x_k)`.
pub fn gradient_descent_step(x: &PrimalVec, f: &dyn Objective, h: f64) -> PrimalVec {
    x.add_scaled(-h, &f.gradient(x).identify_primal())
}

/// Nesterov's method as a three-term recursion.
///
/// `y_k = x_k + beta_{k-1} (x_k - x_{k-1})` with
/// `beta_{k-1} = (gamma_{k-1} - 1) / gamma_k` (and `y_0 = x_0` when `prev` is
/// `None`), then `x_{k+1} = y_k - h grad f(y_k)`. Returns `(y_k, x_{k+1})`.
pub fn nesterov_three_term_step(
    x: &PrimalVec,
    prev: Option<(&PrimalVec, f64)>,
    gamma_k: f64,
    f: &dyn Objective,
    h: f64,
) -> (PrimalVec, PrimalVec) {
    let y = match prev {
        None => x.clone(),
        Some((x_prev, gamma_prev)) => {
            let beta = (gamma_prev - 1.0) / gamma_k;
            x.add_scaled(beta, &x.sub(x_prev))
        }
    };
    let next = gradient_descent_step(&y, f, h);
    (y, next)
}

/// Mirror descent in primal form: `x_{k+1} = chi(grad phi(x_k) - h grad f(x_k))`.
pub fn mirror_descent_step(
    x: &PrimalVec,
    map: &dyn MirrorMap,
    f: &dyn Objective,
    h: f64,
) -> Result<PrimalVec> {
    let zeta = map.grad_phi(x)?;
    Ok(map.chi(&zeta.add_scaled(-h, &f.gradient(x))))
}

/// Mirror descent in dual form: `zeta_{k+1} = zeta_k - h grad f(chi(zeta_k))`.
pub fn mirror_descent_dual_step(
    state: &SolverState,
    map: &dyn MirrorMap,
    f: &dyn Objective,
    h: f64,
) -> SolverState {
    let x = map.chi(&state.zeta);
    let zeta = state.zeta.add_scaled(-h, &f.gradient(&x));
    let x_next = map.chi(&zeta);
    SolverState {
        k: state.k + 1,
        y: x,
        x: x_next,
        zeta,
        gamma: state.gamma,
    }
}

/// One step of accelerated mirror descent.
///
/// ```text
/// y_k      = x_k + (chi(zeta_k) - x_k) / gamma_k
/// zeta_k+1 = zeta_k - gamma_k h grad f(y_k)
/// x_k+1    = y_k + (chi(zeta_k+1) - chi(zeta_k)) / gamma_k
/// ```
pub fn amd_step(
    state: &SolverState,
    map: &dyn MirrorMap,
    f: &dyn Objective,
    schedule: &GammaSchedule,
    h: f64,
) -> SolverState {
    let gamma = state.gamma;
    let inv = 1.0 / gamma;
    let chi_k = map.chi(&state.zeta);
    let y = state.x.lerp(&chi_k, inv);
    let zeta = state.zeta.add_scaled(-gamma * h, &f.gradient(&y));
    let chi_next = map.chi(&zeta);
    let x = y.add_scaled(inv, &chi_next.sub(&chi_k));
    if cfg!(debug_assertions) {
        let alt = state.x.lerp(&chi_next, inv);
        let scale = x.norm(crate::NormKind::Linf).max(1.0);
        debug_assert!(
            x.max_abs_diff(&alt) <= 1e-12 * scale,
            "AMD step 3 forms disagree at k = {}",
            state.k
        );
    }
    SolverState {
        k: state.k + 1,
        x,
        zeta,
        y,
        gamma: schedule.next(state.k + 1, gamma),
    }
}

/// AMD written with the primal mirror point `z_k = chi(zeta_k)`:
/// `z_{k+1} = chi(grad phi(z_k) - gamma_k h grad f(y_k))`.
pub fn amd_primal_step(
    state: &PrimalAmdState,
    map: &dyn MirrorMap,
    f: &dyn Objective,
    schedule: &GammaSchedule,
    h: f64,
) -> Result<PrimalAmdState> {
    let gamma = state.gamma;
    let inv = 1.0 / gamma;
    let y = state.x.lerp(&state.z, inv);
    let z = map.mirror_step(&state.z, &f.gradient(&y).scale(-gamma * h))?;
    let x = y.add_scaled(inv, &z.sub(&state.z));
    Ok(PrimalAmdState {
        k: state.k + 1,
        x,
        z,
        y,
        gamma: schedule.next(state.k + 1, gamma),
    })
}

/// Parameters of the regularised accelerated method.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AmdrParams {
    pub r: f64,
    pub gamma: f64,
    pub regularizer: Regularizer,
}

impl AmdrParams {
    pub fn simplex_default() -> Self {
        Self {
            r: 3.0,
            gamma: 1.0,
            regularizer: Regularizer::ShiftedEntropy { eps: 0.3 },
        }
    }
}

/// One step of accelerated mirror descent with regularisation.
///
/// ```text
/// y_k      = x_k + r/(r+k) (chi(zeta_k) - x_k)
/// zeta_k+1 = zeta_k - (k h / r) grad f(y_k)
/// x_k+1    = argmin_x gamma h <grad f(y_k), x> + R(x, y_k)
/// ```
pub fn amdr_step(
    state: &SolverState,
    map: &dyn MirrorMap,
    f: &dyn Objective,
    h: f64,
    params: &AmdrParams,
) -> Result<SolverState> {
    let k = state.k as f64;
    let r = params.r;
    let chi_k = map.chi(&state.zeta);
    let y = state.x.lerp(&chi_k, r / (r + k));
    let g = f.gradient(&y);
    let zeta = state.zeta.add_scaled(-k * h / r, &g);
    let x = regularized_argmin(&params.regularizer, map, &g, &y, params.gamma * h)?;
    Ok(SolverState {
        k: state.k + 1,
        x,
        zeta,
        y,
        gamma: params.gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::{EntropicSimplex, EuclideanMirror};
    use crate::objectives::{ClosureObjective, PowerObjective};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn p(v: &[f64]) -> PrimalVec {
        PrimalVec::new(v.to_vec())
    }

    fn half_square() -> impl Objective {
        ClosureObjective::new(
            1,
            |x: &[f64]| 0.5 * x[0] * x[0],
            |x: &[f64]| vec![x[0]],
        )
        .with_smoothness(1.0)
    }

    fn linear(c: Vec<f64>) -> impl Objective {
        let c2 = c.clone();
        let d = c.len();
        ClosureObjective::new(
            d,
            move |x: &[f64]| x.iter().zip(&c).map(|(a, b)| a * b).sum(),
            move |_x: &[f64]| c2.clone(),
        )
    }

    fn zero(d: usize) -> impl Objective {
        ClosureObjective::new(d, |_x: &[f64]| 0.0, move |_x: &[f64]| vec![0.0; d])
    }

    #[test]
    fn gradient_descent_examples() {
        let f = half_square();
        let x = gradient_descent_step(&p(&[1.0]), &f, 0.1);
        assert_abs_diff_eq!(x[0], 0.9, epsilon = 1e-15);
        assert_eq!(gradient_descent_step(&p(&[0.0]), &f, 0.1)[0], 0.0);
        assert_eq!(gradient_descent_step(&p(&[3.0]), &f, 0.0)[0], 3.0);
    }

    #[test]
    fn nesterov_first_step_is_gradient_step() {
        let f = half_square();
        let (y, x1) = nesterov_three_term_step(&p(&[1.0]), None, 1.0, &f, 0.1);
        assert_eq!(y[0], 1.0);
        assert_eq!(x1[0], 0.9);
    }

    #[test]
    fn nesterov_with_unit_gammas_is_gradient_descent() {
        let f = half_square();
        let x_prev = p(&[1.3]);
        let x = p(&[1.0]);
        let (y, x1) = nesterov_three_term_step(&x, Some((&x_prev, 1.0)), 1.0, &f, 0.1);
        assert_eq!(y, x);
        assert_eq!(x1, gradient_descent_step(&x, &f, 0.1));
    }

    #[test]
    fn nesterov_matches_amd_on_half_square() {
        let f = half_square();
        let e = EuclideanMirror::new(1);
        let sched = GammaSchedule::NesterovRecurrence;
        let mut amd = SolverState::start(&e, p(&[1.0])).unwrap();
        let mut x_prev: Option<(PrimalVec, f64)> = None;
        let mut x = p(&[1.0]);
        let mut gamma = 1.0;
        for _ in 0..2 {
            let (_, next) = nesterov_three_term_step(
                &x,
                x_prev.as_ref().map(|(v, g)| (v, *g)),
                gamma,
                &f,
                0.1,
            );
            amd = amd_step(&amd, &e, &f, &sched, 0.1);
            let new_gamma = sched.next(amd.k, gamma);
            x_prev = Some((x, gamma));
            x = next;
            gamma = new_gamma;
            assert_abs_diff_eq!(amd.x[0], x[0], epsilon = 1e-15);
        }
    }

    #[test]
    fn mirror_descent_examples() {
        let s = EntropicSimplex::new(2);
        let x = p(&[0.3, 0.7]);
        let still = mirror_descent_step(&x, &s, &zero(2), 0.5).unwrap();
        assert!(still.max_abs_diff(&x) < 1e-15);

        let e = EuclideanMirror::new(1);
        let f = half_square();
        assert_eq!(
            mirror_descent_step(&p(&[1.0]), &e, &f, 0.1).unwrap(),
            gradient_descent_step(&p(&[1.0]), &f, 0.1)
        );

        let x = mirror_descent_step(&p(&[0.5, 0.5]), &s, &linear(vec![1.0, 0.0]), LN_2).unwrap();
        assert_abs_diff_eq!(x[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 2.0 / 3.0, epsilon = 1e-15);

        assert!(mirror_descent_step(&p(&[1.0, 0.0]), &s, &zero(2), 0.1).is_err());
    }

    #[test]
    fn mirror_descent_primal_and_dual_forms_agree() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(4).unwrap();
        let mut dual = SolverState::start(&s, p(&[0.9, 0.1])).unwrap();
        let mut x = p(&[0.9, 0.1]);
        for _ in 0..100 {
            dual = mirror_descent_dual_step(&dual, &s, &f, 0.7);
            x = mirror_descent_step(&x, &s, &f, 0.7).unwrap();
            assert!(x.max_abs_diff(&dual.x) <= 1e-10);
        }
    }

    #[test]
    fn amd_first_step_euclidean() {
        let e = EuclideanMirror::new(1);
        let f = half_square();
        let s0 = SolverState::start(&e, p(&[2.0])).unwrap();
        let s1 = amd_step(&s0, &e, &f, &GammaSchedule::NesterovRecurrence, 0.25);
        assert_eq!(s1.y[0], 2.0);
        assert_abs_diff_eq!(s1.x[0], 2.0 - 0.25 * 2.0, epsilon = 1e-15);
    }

    #[test]
    fn amd_without_gradient_contracts_to_mirror_point() {
        let s = EntropicSimplex::new(3);
        let f = zero(3);
        let zeta0 = DualVec::new(vec![0.1, -0.3, 0.7]);
        let target = s.chi(&zeta0);
        let mut st = SolverState::from_parts(p(&[1.0, 0.0, 0.0]), zeta0.clone());
        let sched = GammaSchedule::Linear { r: 2.0 };
        let mut prev = st.x.max_abs_diff(&target);
        for _ in 0..50 {
            st = amd_step(&st, &s, &f, &sched, 1.0);
            assert_eq!(st.zeta, zeta0);
            let dist = st.x.max_abs_diff(&target);
            assert!(dist <= prev + 1e-15);
            prev = dist;
        }
        assert!(prev < 0.1);
    }

    #[test]
    fn amd_primal_matches_dual_form() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(10).unwrap();
        let sched = GammaSchedule::NesterovRecurrence;
        let x0 = p(&[0.999, 0.001]);
        let mut dual = SolverState::start(&s, x0.clone()).unwrap();
        let mut primal = PrimalAmdState::start(x0);
        for _ in 0..500 {
            dual = amd_step(&dual, &s, &f, &sched, 1.0);
            primal = amd_primal_step(&primal, &s, &f, &sched, 1.0).unwrap();
            assert!(primal.x.max_abs_diff(&dual.x) <= 1e-9);
            assert!(primal.z.max_abs_diff(&s.chi(&dual.zeta)) <= 1e-9);
        }
    }

    #[test]
    fn amd_primal_euclidean_and_frozen() {
        let e = EuclideanMirror::new(1);
        let f = half_square();
        let sched = GammaSchedule::NesterovRecurrence;
        let mut a = SolverState::start(&e, p(&[1.0])).unwrap();
        let mut b = PrimalAmdState::start(p(&[1.0]));
        for _ in 0..20 {
            a = amd_step(&a, &e, &f, &sched, 0.3);
            b = amd_primal_step(&b, &e, &f, &sched, 0.3).unwrap();
            assert_eq!(a.x, b.x);
        }
        let s = EntropicSimplex::new(2);
        let z = PrimalAmdState::start(p(&[0.4, 0.6]));
        let next = amd_primal_step(&z, &s, &zero(2), &sched, 1.0).unwrap();
        assert!(next.z.max_abs_diff(&z.z) < 1e-15);
    }

    #[test]
    fn amdr_first_step_keeps_dual() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(2).unwrap();
        let st = SolverState::start(&s, p(&[0.8, 0.2])).unwrap();
        let next = amdr_step(&st, &s, &f, 0.5, &AmdrParams::simplex_default()).unwrap();
        assert_eq!(next.zeta, st.zeta);
    }

    #[test]
    fn amdr_euclidean_is_gradient_step_from_y() {
        let e = EuclideanMirror::new(1);
        let f = half_square();
        let params = AmdrParams {
            r: 3.0,
            gamma: 2.0,
            regularizer: Regularizer::Euclidean,
        };
        let mut st = SolverState::start(&e, p(&[1.0])).unwrap();
        st = amdr_step(&st, &e, &f, 0.1, &params).unwrap();
        let next = amdr_step(&st, &e, &f, 0.1, &params).unwrap();
        assert_abs_diff_eq!(next.x[0], next.y[0] - 2.0 * 0.1 * next.y[0], epsilon = 1e-15);
    }
}
