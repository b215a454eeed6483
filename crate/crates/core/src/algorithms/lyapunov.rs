//! Discrete Lyapunov functions monitored along the iterations.

use serde::{Deserialize, Serialize};

use crate::algorithms::steps::SolverState;
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::MirrorMap;
use crate::objectives::Objective;

/// Components at or below this value mark a minimiser as lying on the boundary.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// A minimiser (exact or computed) and the data derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub x_star: PrimalVec,
    pub f_star: f64,
    /// A dual point with `chi(zeta_star) = x_star`; `None` for boundary minimisers.
    pub zeta_star: Option<DualVec>,
    pub provenance: String,
}

impl Reference {
    /// Builds a reference, attaching `zeta_star = grad phi(x_star)` when every
    /// component of `x_star` exceeds `zero_tol` (geometry permitting).
    pub fn new(
        map: &dyn MirrorMap,
        x_star: PrimalVec,
        f_star: f64,
        provenance: impl Into<String>,
        zero_tol: f64,
    ) -> Self {
        let bounded = map.geometry() != crate::Geometry::Euclidean;
        let interior = !bounded || x_star.iter().all(|&v| v > zero_tol && v < 1.0 - zero_tol);
        let zeta_star = if interior { map.grad_phi(&x_star).ok() } else { None };
        Self {
            x_star,
            f_star,
            zeta_star,
            provenance: provenance.into(),
        }
    }

    /// Reference from a known minimiser, evaluating `f` there.
    pub fn exact(map: &dyn MirrorMap, f: &dyn Objective, x_star: PrimalVec) -> Self {
        let f_star = f.value(&x_star);
        Self::new(map, x_star, f_star, "exact", DEFAULT_ZERO_TOL)
    }

    /// Number of components of `x_star` at or below `zero_tol`.
    pub fn zero_components(&self, zero_tol: f64) -> usize {
        self.x_star.iter().filter(|&&v| v <= zero_tol).count()
    }
}

/// Weight multiplying the optimality gap in the discrete Lyapunov function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LyapunovWeight {
    /// `(gamma_k^2 - gamma_k) h`, for AMD.
    Accelerated,
    /// `k h`, for mirror descent.
    MirrorDescent,
    /// `k^2 h / r^2`, for AMDR (continuous time `t = k sqrt(h)`).
    Regularized { r: f64 },
}

impl LyapunovWeight {
    pub fn value(&self, k: usize, gamma: f64, h: f64) -> f64 {
        let k = k as f64;
        match *self {
            LyapunovWeight::Accelerated => (gamma * gamma - gamma) * h,
            LyapunovWeight::MirrorDescent => k * h,
            LyapunovWeight::Regularized { r } => k * k * h / (r * r),
        }
    }
}

/// `(gamma_k^2 - gamma_k) h (f(x_k) - f*) + D_psi*(zeta_k, zeta*)`.
pub fn lyapunov_dual(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    state: &SolverState,
    h: f64,
    f_star: f64,
    zeta_star: &DualVec,
) -> f64 {
    LyapunovWeight::Accelerated.value(state.k, state.gamma, h) * (f.value(&state.x) - f_star)
        + map.bregman_dual(&state.zeta, zeta_star)
}

/// `(gamma_k^2 - gamma_k) h (f(x_k) - f*) + D_phi(x*, chi(zeta_k))`.
///
/// Defined for boundary minimisers as well.
pub fn lyapunov_primal(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    state: &SolverState,
    h: f64,
    f_star: f64,
    x_star: &PrimalVec,
) -> f64 {
    weighted(map, f, state, h, f_star, x_star, LyapunovWeight::Accelerated)
}

/// Primal Lyapunov value with an arbitrary gap weight.
pub fn weighted(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    state: &SolverState,
    h: f64,
    f_star: f64,
    x_star: &PrimalVec,
    weight: LyapunovWeight,
) -> f64 {
    weight.value(state.k, state.gamma, h) * (f.value(&state.x) - f_star)
        + map.bregman_primal_to_image(x_star, &state.zeta)
}

/// Dual Lyapunov value with an arbitrary gap weight.
pub fn weighted_dual(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    state: &SolverState,
    h: f64,
    f_star: f64,
    zeta_star: &DualVec,
    weight: LyapunovWeight,
) -> f64 {
    weight.value(state.k, state.gamma, h) * (f.value(&state.x) - f_star)
        + map.bregman_dual(&state.zeta, zeta_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::gamma::GammaSchedule;
    use crate::algorithms::steps::amd_step;
    use crate::mirror::EntropicSimplex;
    use crate::objectives::{PowerObjective, QuadraticObjective};
    use crate::rng::SeededRng;

    fn p(v: &[f64]) -> PrimalVec {
        PrimalVec::new(v.to_vec())
    }

    #[test]
    fn initial_value_is_divergence() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(10).unwrap();
        let st = SolverState::start(&s, p(&[0.999, 0.001])).unwrap();
        let reference = Reference::exact(&s, &f, f.minimizer());
        let zs = reference.zeta_star.clone().unwrap();
        let v0 = lyapunov_dual(&s, &f, &st, 1.0, reference.f_star, &zs);
        assert_eq!(v0, s.bregman_dual(&st.zeta, &zs));
        let w0 = lyapunov_primal(&s, &f, &st, 1.0, reference.f_star, &reference.x_star);
        assert!((w0 - s.bregman_primal(&reference.x_star, &st.x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn vanishes_at_minimizer() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(4).unwrap();
        let reference = Reference::exact(&s, &f, f.minimizer());
        let mut st = SolverState::start(&s, f.minimizer()).unwrap();
        st.gamma = 7.0;
        let zs = reference.zeta_star.as_ref().unwrap();
        assert!(lyapunov_dual(&s, &f, &st, 0.3, 0.0, zs).abs() < 1e-15);
        assert!(lyapunov_primal(&s, &f, &st, 0.3, 0.0, &reference.x_star).abs() < 1e-15);
    }

    #[test]
    fn boundary_reference_has_no_dual_point() {
        let s = EntropicSimplex::new(3);
        let r = Reference::new(&s, p(&[0.5, 0.5, 0.0]), 0.0, "test", DEFAULT_ZERO_TOL);
        assert!(r.zeta_star.is_none());
        assert_eq!(r.zero_components(DEFAULT_ZERO_TOL), 1);
    }

    #[test]
    fn dual_and_primal_coincide_for_interior_minimizer() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let d = 4;
            let s = EntropicSimplex::new(d);
            let c = p(&rng.interior_simplex_point(d, 0.05));
            let f = QuadraticObjective::random(d, &mut rng).with_center(c.clone()).unwrap();
            let reference = Reference::exact(&s, &f, c);
            let zs = reference.zeta_star.clone().unwrap();
            let mut st = SolverState::start(&s, p(&rng.interior_simplex_point(d, 0.01))).unwrap();
            let h = 1.0 / f.absolute_smoothness();
            for _ in 0..30 {
                let a = lyapunov_dual(&s, &f, &st, h, reference.f_star, &zs);
                let b = lyapunov_primal(&s, &f, &st, h, reference.f_star, &reference.x_star);
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
                st = amd_step(&st, &s, &f, &GammaSchedule::NesterovRecurrence, h);
            }
        }
    }

    #[test]
    fn dual_monotone_on_toy_power() {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(10).unwrap();
        let reference = Reference::exact(&s, &f, f.minimizer());
        let zs = reference.zeta_star.clone().unwrap();
        let mut st = SolverState::start(&s, p(&[0.999, 0.001])).unwrap();
        let mut prev = lyapunov_dual(&s, &f, &st, 1.0, 0.0, &zs);
        for _ in 0..2000 {
            st = amd_step(&st, &s, &f, &GammaSchedule::NesterovRecurrence, 1.0);
            let v = lyapunov_dual(&s, &f, &st, 1.0, 0.0, &zs);
            assert!(v <= prev + 1e-12, "k={} {v} > {prev}", st.k);
            prev = v;
        }
    }

    #[test]
    fn weights() {
        assert_eq!(LyapunovWeight::Accelerated.value(0, 1.0, 2.0), 0.0);
        assert_eq!(LyapunovWeight::MirrorDescent.value(3, 9.0, 0.5), 1.5);
        assert_eq!(LyapunovWeight::Regularized { r: 3.0 }.value(3, 1.0, 2.0), 2.0);
    }
}
