use mirror_accel::algorithms::Reference;
use mirror_accel::linops::{DualVec, PrimalVec};
use mirror_accel::mirror::{EntropicSimplex, EuclideanMirror, MirrorMap};
use mirror_accel::objectives::QuadraticObjective;
use mirror_accel::ode::{
    integrate, lyapunov_continuous, ContinuousLyapunov, IntegratorOptions, OdeSystem, SystemKind,
};
use mirror_accel::rng::SeededRng;
use proptest::prelude::*;

fn solve(sys: &OdeSystem<'_>, x0: &PrimalVec, t1: f64) -> mirror_accel::ode::Trajectory {
    let y0 = sys.initial_state(x0).unwrap();
    integrate(|t, y| sys.rhs(t, y), sys.kind.default_t0(), t1, &y0, &IntegratorOptions::with_tol(1e-11))
        .unwrap()
}

#[test]
fn dual_and_primal_accelerated_systems_agree() {
    let mut rng = SeededRng::new(51);
    for d in 2..6 {
        let s = EntropicSimplex::new(d);
        let f = QuadraticObjective::random(d, &mut rng);
        let x0 = PrimalVec::new(rng.interior_simplex_point(d, 0.1));
        let dual = OdeSystem::new(SystemKind::AcceleratedDual { r: 3.0 }, &s, &f).unwrap();
        let primal = OdeSystem::new(SystemKind::AcceleratedPrimal { r: 3.0 }, &s, &f).unwrap();
        let (a, b) = (solve(&dual, &x0, 4.0), solve(&primal, &x0, 4.0));
        for t in [0.01, 0.5, 1.0, 2.0, 4.0] {
            let (sa, sb) = (a.at(t).unwrap(), b.at(t).unwrap());
            let zeta = DualVec::new(sa[..d].to_vec());
            let z = PrimalVec::new(sb[..d].to_vec());
            assert!(s.chi(&zeta).max_abs_diff(&z) < 1e-6, "d = {d}, t = {t}");
            assert!(dual.primal_point(&sa).max_abs_diff(&primal.primal_point(&sb)) < 1e-6);
        }
    }
}

#[test]
fn accelerated_lyapunov_is_nonincreasing_for_r_at_least_three() {
    let mut rng = SeededRng::new(53);
    for i in 0..6 {
        let d = 2 + i % 4;
        let e = EuclideanMirror::new(d);
        let f = QuadraticObjective::random(d, &mut rng);
        let reference = Reference::exact(&e, &f, PrimalVec::new(vec![0.0; d]));
        let sys = OdeSystem::new(SystemKind::AcceleratedDual { r: 3.0 + i as f64 }, &e, &f).unwrap();
        let traj = solve(&sys, &PrimalVec::new(rng.normals(d)), 20.0);
        let values: Vec<f64> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, y)| lyapunov_continuous(ContinuousLyapunov::Dual, &sys, t, y, &reference).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] + 1e-8 * (1.0 + w[0].abs()), "instance {i}: {} -> {}", w[0], w[1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn accelerated_trajectory_stays_on_simplex(seed in any::<u64>(), d in 2usize..6, r in 2.0f64..6.0) {
        let mut rng = SeededRng::new(seed);
        let s = EntropicSimplex::new(d);
        let f = QuadraticObjective::random(d, &mut rng);
        let x0 = PrimalVec::new(rng.interior_simplex_point(d, 0.05));
        let sys = OdeSystem::new(SystemKind::AcceleratedDual { r }, &s, &f).unwrap();
        let traj = solve(&sys, &x0, 5.0);
        let set = s.feasible_set();
        for y in &traj.states {
            prop_assert!(set.contains_with_tol(&sys.primal_point(y), 1e-8));
        }
    }

    #[test]
    fn mirror_flow_decreases_the_objective(seed in any::<u64>(), d in 2usize..6) {
        use mirror_accel::objectives::Objective;
        let mut rng = SeededRng::new(seed);
        let s = EntropicSimplex::new(d);
        let f = QuadraticObjective::random(d, &mut rng);
        let x0 = PrimalVec::new(rng.interior_simplex_point(d, 0.05));
        let sys = OdeSystem::new(SystemKind::MirrorFlowDual, &s, &f).unwrap();
        let traj = solve(&sys, &x0, 5.0);
        let values: Vec<f64> = traj.states.iter().map(|y| f.value(&sys.primal_point(y))).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0].abs()));
        }
    }
}
