//! Iteration loop producing per-step trace records.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::gamma::GammaSchedule;
use crate::algorithms::lyapunov::{LyapunovWeight, Reference};
use crate::algorithms::steps::{
    amd_primal_step, amd_step, amdr_step, mirror_descent_dual_step, AmdrParams, PrimalAmdState,
    SolverState,
};
use crate::error::{Error, Result};
use crate::linops::PrimalVec;
use crate::mirror::MirrorMap;
use crate::objectives::Objective;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MirrorDescent,
    Amd,
    /// AMD carried out on the primal mirror point `z_k`.
    AmdPrimal,
    Amdr,
}

impl Algorithm {
    /// Short tag used on the command line and in file names.
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::MirrorDescent => "md",
            Algorithm::Amd => "amd",
            Algorithm::AmdPrimal => "amd_primal",
            Algorithm::Amdr => "amdr",
        }
    }

    pub fn weight(self, amdr: &AmdrParams) -> LyapunovWeight {
        match self {
            Algorithm::MirrorDescent => LyapunovWeight::MirrorDescent,
            Algorithm::Amd | Algorithm::AmdPrimal => LyapunovWeight::Accelerated,
            Algorithm::Amdr => LyapunovWeight::Regularized { r: amdr.r },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "md" | "mirror_descent" => Ok(Algorithm::MirrorDescent),
            "amd" => Ok(Algorithm::Amd),
            "amd_primal" => Ok(Algorithm::AmdPrimal),
            "amdr" => Ok(Algorithm::Amdr),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm '{other}' (expected md, amd, amd_primal or amdr)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub h: f64,
    pub steps: usize,
    pub schedule: GammaSchedule,
    pub amdr: AmdrParams,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, h: f64, steps: usize) -> Self {
        Self {
            algorithm,
            h,
            steps,
            schedule: GammaSchedule::NesterovRecurrence,
            amdr: AmdrParams::simplex_default(),
        }
    }

    pub fn with_schedule(mut self, schedule: GammaSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_amdr(mut self, amdr: AmdrParams) -> Self {
        self.amdr = amdr;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "step size h must be positive and finite, got {}",
                self.h
            )));
        }
        match self.algorithm {
            Algorithm::Amd | Algorithm::AmdPrimal => self.schedule.validate_for_amd(),
            Algorithm::Amdr => {
                let AmdrParams { r, gamma, .. } = self.amdr;
                if r > 0.0 && gamma > 0.0 && r.is_finite() && gamma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "AMDR needs r > 0 and gamma > 0, got r = {r}, gamma = {gamma}"
                    )))
                }
            }
            Algorithm::MirrorDescent => Ok(()),
        }
    }
}

/// One row of a trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub f_gap: f64,
    pub lyapunov_primal: f64,
    /// Present only when the reference carries a dual point.
    pub lyapunov_dual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub algorithm: Algorithm,
    pub records: Vec<TraceRecord>,
    pub last: SolverState,
}

impl Trace {
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f_gap)
    }
}

/// Runs `cfg.steps` iterations from `x0`; see [`run_with`].
pub fn run(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    x0: &PrimalVec,
    reference: &Reference,
    cfg: &RunConfig,
) -> Result<Trace> {
    run_with(map, f, x0, reference, cfg, |_| {})
}

/// Runs `cfg.steps` iterations from `x0` with `zeta_0 = grad phi(x_0)`,
/// calling `observe` on every state including the initial one.
///
/// Mirror descent is iterated in its dual form, so its `x_k` is `chi(zeta_k)`.
/// The trace has `cfg.steps + 1` records. Failures are tagged with the
/// iteration at which they occurred.
pub fn run_with(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    x0: &PrimalVec,
    reference: &Reference,
    cfg: &RunConfig,
    mut observe: impl FnMut(&SolverState),
) -> Result<Trace> {
    cfg.validate()?;
    if x0.len() != map.dim() || f.dim() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: if x0.len() != map.dim() { x0.len() } else { f.dim() },
        });
    }
    let weight = cfg.algorithm.weight(&cfg.amdr);
    let h = cfg.h;
    let record = |st: &SolverState| -> Result<TraceRecord> {
        let fx = f.value(&st.x);
        if !fx.is_finite() {
            return Err(Error::NonFinite { k: st.k, quantity: "f(x_k)" });
        }
        let f_gap = fx - reference.f_star;
        let w = weight.value(st.k, st.gamma, h);
        let lyapunov_primal = w * f_gap + map.bregman_primal_to_image(&reference.x_star, &st.zeta);
        if !lyapunov_primal.is_finite() {
            return Err(Error::NonFinite { k: st.k, quantity: "lyapunov_primal" });
        }
        let lyapunov_dual = reference
            .zeta_star
            .as_ref()
            .map(|zs| w * f_gap + map.bregman_dual(&st.zeta, zs));
        Ok(TraceRecord {
            k: st.k,
            f_gap,
            lyapunov_primal,
            lyapunov_dual,
        })
    };

    let mut state = SolverState::start(map, x0.clone()).map_err(|e| e.at(0))?;
    let mut primal = PrimalAmdState::start(x0.clone());
    let mut records = Vec::with_capacity(cfg.steps + 1);
    observe(&state);
    records.push(record(&state)?);
    for _ in 0..cfg.steps {
        let k = state.k;
        state = match cfg.algorithm {
            Algorithm::MirrorDescent => mirror_descent_dual_step(&state, map, f, h),
            Algorithm::Amd => amd_step(&state, map, f, &cfg.schedule, h),
            Algorithm::AmdPrimal => {
                let gamma = primal.gamma;
                primal = amd_primal_step(&primal, map, f, &cfg.schedule, h).map_err(|e| e.at(k))?;
                // The record needs a dual point with chi(zeta) = z. Carry it with
                // the same increment rather than through grad phi(z), which fails
                // once a component of z underflows.
                let zeta = state.zeta.add_scaled(-gamma * h, &f.gradient(&primal.y));
                SolverState {
                    k: primal.k,
                    x: primal.x.clone(),
                    zeta,
                    y: primal.y.clone(),
                    gamma: primal.gamma,
                }
            }
            Algorithm::Amdr => amdr_step(&state, map, f, h, &cfg.amdr).map_err(|e| e.at(k))?,
        };
        if !state.zeta.is_finite() {
            return Err(Error::NonFinite { k: state.k, quantity: "zeta_k" });
        }
        if !state.x.is_finite() {
            return Err(Error::NonFinite { k: state.k, quantity: "x_k" });
        }
        observe(&state);
        records.push(record(&state)?);
    }
    Ok(Trace {
        algorithm: cfg.algorithm,
        records,
        last: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mirror::EntropicSimplex;
    use crate::objectives::PowerObjective;

    fn toy() -> (EntropicSimplex, PowerObjective, Reference, PrimalVec) {
        let s = EntropicSimplex::new(2);
        let f = PowerObjective::new(10).unwrap();
        let r = Reference::exact(&s, &f, f.minimizer());
        (s, f, r, PrimalVec::new(vec![0.999, 0.001]))
    }

    #[test]
    fn zero_steps_gives_single_record() {
        let (s, f, r, x0) = toy();
        let t = run(&s, &f, &x0, &r, &RunConfig::new(Algorithm::Amd, 1.0, 0)).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].k, 0);
    }

    #[test]
    fn deterministic() {
        let (s, f, r, x0) = toy();
        for alg in [Algorithm::MirrorDescent, Algorithm::Amd, Algorithm::AmdPrimal, Algorithm::Amdr] {
            let cfg = RunConfig::new(alg, 1.0, 200);
            let a = run(&s, &f, &x0, &r, &cfg).unwrap();
            let b = run(&s, &f, &x0, &r, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.records.len(), 201);
        }
    }

    #[test]
    fn amd_beats_mirror_descent_on_toy() {
        let (s, f, r, x0) = toy();
        let md = run(&s, &f, &x0, &r, &RunConfig::new(Algorithm::MirrorDescent, 1.0, 10_000)).unwrap();
        let amd = run(&s, &f, &x0, &r, &RunConfig::new(Algorithm::Amd, 1.0, 10_000)).unwrap();
        assert!(amd.final_gap() * 10.0 <= md.final_gap(), "{} vs {}", amd.final_gap(), md.final_gap());
    }

    #[test]
    fn iterates_stay_feasible() {
        let (s, f, r, x0) = toy();
        let set = s.feasible_set();
        for alg in [Algorithm::MirrorDescent, Algorithm::Amd, Algorithm::Amdr] {
            run_with(&s, &f, &x0, &r, &RunConfig::new(alg, 1.0, 1000), |st| {
                assert!(set.contains(&st.x) && set.contains(&st.y), "{alg} k={}", st.k);
            })
            .unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let (s, f, r, x0) = toy();
        assert!(run(&s, &f, &x0, &r, &RunConfig::new(Algorithm::Amd, 0.0, 1)).is_err());
        let cfg = RunConfig::new(Algorithm::Amd, 1.0, 1).with_schedule(GammaSchedule::Linear { r: 1.5 });
        assert!(run(&s, &f, &x0, &r, &cfg).is_err());
        let boundary = PrimalVec::new(vec![1.0, 0.0]);
        let err = run(&s, &f, &boundary, &r, &RunConfig::new(Algorithm::Amd, 1.0, 1)).unwrap_err();
        assert!(matches!(err, Error::AtIteration { k: 0, .. }));
    }

    #[test]
    fn non_finite_reported_with_k() {
        let s = EntropicSimplex::new(2);
        let f = crate::objectives::ClosureObjective::new(
            2,
            |_x: &[f64]| 0.0,
            |_x: &[f64]| vec![f64::NAN, 0.0],
        );
        let r = Reference::new(&s, PrimalVec::new(vec![0.5, 0.5]), 0.0, "test", 1e-8);
        let err = run(&s, &f, &PrimalVec::new(vec![0.5, 0.5]), &r, &RunConfig::new(Algorithm::Amd, 1.0, 5))
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { k: 1, .. }), "{err}");
    }

    #[test]
    fn algorithm_tags_round_trip() {
        for a in [Algorithm::MirrorDescent, Algorithm::Amd, Algorithm::AmdPrimal, Algorithm::Amdr] {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
        }
        assert!("sgd".parse::<Algorithm>().is_err());
    }
}
