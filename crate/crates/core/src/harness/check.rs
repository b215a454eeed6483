//! The invariant suite behind the `check` command.

use std::fmt;

use crate::algorithms::steps::{amd_step, nesterov_three_term_step, SolverState};
use crate::algorithms::{lyapunov_dual, regularized_argmin, GammaSchedule, Reference, Regularizer};
use crate::linops::{DualVec, PrimalVec};
use crate::mirror::{EntropicSimplex, EuclideanMirror, Geometry, MirrorMap};
use crate::objectives::{Objective, PowerObjective, QuadraticObjective};
use crate::rng::SeededRng;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{mark} {:<24} {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e} (tol {tol:.0e})"),
    }
}

/// Runs every check with instances drawn from `seed`.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = SeededRng::new(seed);
    vec![
        mirror_round_trip(&mut rng),
        shift_invariance(&mut rng),
        normal_projection(&mut rng),
        euclidean_equivalence(&mut rng),
        lyapunov_monotonicity(&mut rng),
        argmin_oracle(&mut rng),
        gradient_check(&mut rng),
    ]
}

fn random_primal(rng: &mut SeededRng, g: Geometry, d: usize) -> Vec<f64> {
    match g {
        Geometry::Euclidean => rng.normals(d),
        Geometry::Simplex => rng.interior_simplex_point(d, 1e-3),
        Geometry::Hypercube => (0..d).map(|_| rng.uniform_in(1e-3, 1.0 - 1e-3)).collect(),
    }
}

fn mirror_round_trip(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for g in [Geometry::Euclidean, Geometry::Simplex, Geometry::Hypercube] {
        for i in 0..1000 {
            let d = 1 + i % 7;
            let map = g.mirror(d);
            let z = PrimalVec::new(random_primal(rng, g, d));
            match map.grad_phi(&z) {
                Ok(zeta) => worst = worst.max(map.chi(&zeta).max_abs_diff(&z)),
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    outcome("mirror round trip", worst, 1e-10)
}

fn shift_invariance(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let d = 2 + i % 6;
        let s = EntropicSimplex::new(d);
        let zeta = DualVec::new(rng.normals(d).iter().map(|v| 5.0 * v).collect());
        let c = rng.uniform_in(-50.0, 50.0);
        let shifted = DualVec::new(zeta.iter().map(|v| v + c).collect());
        worst = worst.max(s.chi(&zeta).max_abs_diff(&s.chi(&shifted)));
    }
    outcome("simplex shift invariance", worst, 1e-12)
}

fn normal_projection(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for g in [Geometry::Euclidean, Geometry::Simplex, Geometry::Hypercube] {
        for _ in 0..100 {
            let d = 3;
            let map = g.mirror(d);
            let zeta = DualVec::new(rng.normals(d));
            let n = map.project_normal(&zeta);
            let dev = match g {
                // Proportional to the all-ones vector.
                Geometry::Simplex => {
                    let first = n[0];
                    n.iter().map(|v| (v - first).abs()).fold(0.0, f64::max)
                }
                _ => n.iter().map(|v| v.abs()).fold(0.0, f64::max),
            };
            worst = worst.max(dev);
        }
    }
    outcome("normal projection", worst, 1e-12)
}

fn euclidean_equivalence(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    let sched = GammaSchedule::NesterovRecurrence;
    for _ in 0..20 {
        let d = 10;
        let f = QuadraticObjective::random(d, rng);
        let h = 1.0 / f.smoothness(crate::NormKind::L2).unwrap_or(1.0);
        let e = EuclideanMirror::new(d);
        let x0 = PrimalVec::new(rng.normals(d));
        let mut amd = SolverState::start(&e, x0.clone()).expect("euclidean start");
        let mut x = x0;
        let mut prev: Option<(PrimalVec, f64)> = None;
        let mut gamma = GammaSchedule::INITIAL;
        for _ in 0..100 {
            let (_, next) = nesterov_three_term_step(&x, prev.as_ref().map(|(v, g)| (v, *g)), gamma, &f, h);
            amd = amd_step(&amd, &e, &f, &sched, h);
            let new_gamma = sched.next(amd.k, gamma);
            prev = Some((x, gamma));
            x = next;
            gamma = new_gamma;
            for (a, b) in amd.x.iter().zip(x.iter()) {
                worst = worst.max((a - b).abs() / b.abs().max(1e-300).max(1e-8));
            }
        }
    }
    outcome("euclidean equivalence", worst, 1e-10)
}

fn lyapunov_monotonicity(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let d = 2 + i % 5;
        let s = EntropicSimplex::new(d);
        let center = PrimalVec::new(rng.interior_simplex_point(d, 0.5));
        let f = match QuadraticObjective::random(d, rng).with_center(center.clone()) {
            Ok(f) => f,
            Err(_) => return outcome("lyapunov monotonicity", f64::INFINITY, 0.0),
        };
        let h = 1.0 / f.absolute_smoothness();
        let reference = Reference::exact(&s, &f, center);
        let zs = match &reference.zeta_star {
            Some(z) => z.clone(),
            None => return outcome("lyapunov monotonicity", f64::INFINITY, 0.0),
        };
        let x0 = PrimalVec::new(rng.interior_simplex_point(d, 0.1));
        let mut st = SolverState::start(&s, x0).expect("interior start");
        let mut v = lyapunov_dual(&s, &f, &st, h, reference.f_star, &zs);
        let slack = 1e-9 * v.max(1e-300);
        for _ in 0..200 {
            st = amd_step(&st, &s, &f, &GammaSchedule::NesterovRecurrence, h);
            let next = lyapunov_dual(&s, &f, &st, h, reference.f_star, &zs);
            worst = worst.max((next - v - slack) / slack);
            v = next;
        }
    }
    CheckOutcome {
        name: "lyapunov monotonicity",
        passed: worst <= 0.0,
        detail: format!("largest increase beyond slack {:.3e} x slack", worst.max(0.0)),
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Projected gradient on `tau <g, x> + R(x, y)` over the simplex with the
/// shifted entropy, step `eps` (the inverse curvature bound).
pub fn projected_gradient_argmin(eps: f64, g: &[f64], y: &[f64], tau: f64, iters: usize) -> Vec<f64> {
    let mut x = y.to_vec();
    for _ in 0..iters {
        let v: Vec<f64> = x
            .iter()
            .zip(g.iter().zip(y))
            .map(|(&xi, (&gi, &yi))| xi - eps * (tau * gi + ((xi + eps) / (yi + eps)).ln() + 1.0))
            .collect();
        x = project_simplex(&v);
    }
    x
}

fn argmin_oracle(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 2 + i % 4;
        let s = EntropicSimplex::new(d);
        let eps = rng.uniform_in(0.05, 1.0);
        let reg = Regularizer::ShiftedEntropy { eps };
        let y = rng.simplex_point(d);
        let g: Vec<f64> = rng.normals(d).iter().map(|v| 3.0 * v).collect();
        let tau = rng.uniform_in(0.1, 2.0);
        let fast = regularized_argmin(&reg, &s, &DualVec::new(g.clone()), &PrimalVec::new(y.clone()), tau);
        let slow = projected_gradient_argmin(eps, &g, &y, tau, 5000);
        worst = worst.max(match fast {
            Ok(x) => x.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        });
    }
    outcome("regularized argmin", worst, 1e-6)
}

fn fd_worst(f: &dyn Objective, x: &PrimalVec) -> f64 {
    let g = f.gradient(x);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[i] += step;
        down[i] -= step;
        let fd = (f.value(&PrimalVec::new(up)) - f.value(&PrimalVec::new(down))) / (2.0 * step);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
    }
    worst
}

fn gradient_check(rng: &mut SeededRng) -> CheckOutcome {
    let mut worst: f64 = 0.0;
    let power = PowerObjective::new(10).expect("even exponent");
    for _ in 0..100 {
        let q = QuadraticObjective::random(5, rng);
        worst = worst.max(fd_worst(&q, &PrimalVec::new(rng.simplex_point(5))));
        worst = worst.max(fd_worst(&power, &PrimalVec::new(rng.simplex_point(2))));
    }
    outcome("gradient check", worst, 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for o in run_checks(7) {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0, 0.0]);
        assert!(p.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }
}
