//! Building, running and saving one experiment.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crate::algorithms::steps::{amd_step, SolverState};
use crate::algorithms::{
    lyapunov::DEFAULT_ZERO_TOL, run, Algorithm, GammaSchedule, Reference, Regularizer, RunConfig,
    Trace,
};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, LrSource, ObjectiveSpec, StepPolicy};
use crate::harness::csvio::write_trace;
use crate::harness::plot::emit_plot;
use crate::harness::rates::{fit_rate, RateFit};
use crate::linops::PrimalVec;
use crate::mirror::{EntropicSimplex, MirrorMap};
use crate::objectives::{Objective, PowerObjective, QuadraticObjective};
use crate::rng::{SeededRng, GENERATOR_ID};

/// An objective from one of the two experiment families.
#[derive(Clone, Debug)]
pub enum Problem {
    Power(PowerObjective),
    Quadratic(QuadraticObjective),
}

impl Problem {
    pub fn objective(&self) -> &dyn Objective {
        match self {
            Problem::Power(p) => p,
            Problem::Quadratic(q) => q,
        }
    }

    pub fn quadratic(&self) -> Option<&QuadraticObjective> {
        match self {
            Problem::Quadratic(q) => Some(q),
            Problem::Power(_) => None,
        }
    }
}

/// Draws the instance for `cfg`: first `B` (row-major, `d*d` normals), then
/// `x0` as `d` uniforms rescaled to unit sum. A fixed `cfg.x0` skips the second draw.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<(Problem, PrimalVec)> {
    let mut rng = SeededRng::new(cfg.seed);
    let problem = match cfg.objective {
        ObjectiveSpec::Power { p } => Problem::Power(PowerObjective::new(p)?),
        ObjectiveSpec::RandomQuadratic => Problem::Quadratic(QuadraticObjective::random(cfg.d, &mut rng)),
    };
    let x0 = match &cfg.x0 {
        Some(x0) => PrimalVec::checked(x0.clone())?,
        None => {
            let u = rng.uniforms(cfg.d);
            let s: f64 = u.iter().sum();
            PrimalVec::new(u.into_iter().map(|v| v / s).collect())
        }
    };
    Ok((problem, x0))
}

/// `h = 1/(L_chi L)` for mirror descent and AMD.
pub fn plain_step(l_chi: f64, l: f64) -> f64 {
    1.0 / (l_chi * l)
}

/// `h = sqrt(eps / (2 (1 + d eps) L gamma))` for AMDR with the shifted entropy.
pub fn amdr_step_size(eps: f64, d: usize, l: f64, gamma: f64) -> f64 {
    (eps / (2.0 * (1.0 + d as f64 * eps) * l * gamma)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepSizes {
    pub policy: StepPolicy,
    pub l_chi: f64,
    /// `m(G)`; `None` for objectives without a known constant.
    pub l_f: Option<f64>,
    /// Relative constant and where its point came from, under the relative policy.
    pub l_r: Option<f64>,
    pub l_r_source: Option<LrSource>,
    pub h: BTreeMap<Algorithm, f64>,
}

impl StepSizes {
    pub fn h_for(&self, alg: Algorithm) -> f64 {
        self.h[&alg]
    }
}

fn amd_iterate(
    map: &dyn MirrorMap,
    f: &dyn Objective,
    x0: &PrimalVec,
    h: f64,
    schedule: &GammaSchedule,
    k: usize,
) -> Result<PrimalVec> {
    let mut st = SolverState::start(map, x0.clone())?;
    for _ in 0..k {
        st = amd_step(&st, map, f, schedule, h);
    }
    if !st.x.is_finite() {
        return Err(Error::NonFinite { k, quantity: "x_k" });
    }
    Ok(st.x)
}

/// Step sizes for every algorithm in `cfg` under its policy.
pub fn step_sizes(
    cfg: &ExperimentConfig,
    map: &dyn MirrorMap,
    problem: &Problem,
    x0: &PrimalVec,
    reference: Option<&Reference>,
) -> Result<StepSizes> {
    let l_chi = map.l_chi();
    let l_f = problem.objective().smoothness(map.primal_norm());
    let (l, l_r, l_r_source) = match cfg.step_policy {
        StepPolicy::Explicit(_) => (None, None, None),
        StepPolicy::Absolute => {
            let l = l_f.ok_or_else(|| {
                Error::InvalidParameter("objective has no smoothness constant for the absolute policy".into())
            })?;
            (Some(l), None, None)
        }
        StepPolicy::Relative => {
            let q = problem.quadratic().ok_or_else(|| {
                Error::InvalidParameter("the relative policy needs a quadratic objective".into())
            })?;
            let z = match cfg.lr_source {
                LrSource::Oracle => reference
                    .ok_or_else(|| Error::InvalidParameter("the relative policy needs a minimiser".into()))?
                    .x_star
                    .clone(),
                LrSource::Iterate(k) => {
                    let l = l_f.ok_or_else(|| Error::InvalidParameter("missing L_f".into()))?;
                    amd_iterate(map, q, x0, plain_step(l_chi, l), &cfg.gamma_schedule, k)?
                }
            };
            let l_r = q.relative_smoothness(&z)?;
            (Some(l_r), Some(l_r), Some(cfg.lr_source))
        }
    };
    let mut h = BTreeMap::new();
    for &alg in &cfg.algorithms {
        let value = match (cfg.step_policy, l) {
            (StepPolicy::Explicit(h), _) => h,
            (_, Some(l)) => match alg {
                Algorithm::Amdr => match cfg.amdr.regularizer {
                    Regularizer::ShiftedEntropy { eps } => amdr_step_size(eps, cfg.d, l, cfg.amdr.gamma),
                    Regularizer::Euclidean => {
                        return Err(Error::InvalidParameter(
                            "automatic AMDR step sizes need the shifted entropy regulariser".into(),
                        ))
                    }
                },
                _ => plain_step(l_chi, l),
            },
            (_, None) => unreachable!("non-explicit policies resolve a constant"),
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size for {alg} is {value}")));
        }
        h.insert(alg, value);
    }
    Ok(StepSizes {
        policy: cfg.step_policy,
        l_chi,
        l_f,
        l_r,
        l_r_source,
        h,
    })
}

/// Minimiser for the experiment: exact for the power objective, otherwise the
/// best iterate of an AMD run `factor` times longer than the experiment
/// (at least 1000 steps) with the absolute step size.
pub fn reference_optimum(
    map: &dyn MirrorMap,
    problem: &Problem,
    x0: &PrimalVec,
    steps: usize,
    factor: usize,
    schedule: &GammaSchedule,
) -> Result<Reference> {
    match problem {
        Problem::Power(p) => Ok(Reference::new(
            map,
            p.minimizer(),
            p.value(&p.minimizer()),
            format!("exact minimiser [1/2, 1/2] of the p = {} power objective", p.exponent()),
            DEFAULT_ZERO_TOL,
        )),
        Problem::Quadratic(q) => {
            let l = q.absolute_smoothness();
            let h = plain_step(map.l_chi(), l);
            let n = steps.saturating_mul(factor).max(1000);
            let mut st = SolverState::start(map, x0.clone())?;
            let (mut best_x, mut best_f, mut best_k) = (st.x.clone(), q.value(&st.x), 0);
            for _ in 0..n {
                st = amd_step(&st, map, q, schedule, h);
                let fx = q.value(&st.x);
                if !fx.is_finite() {
                    return Err(Error::NonFinite { k: st.k, quantity: "reference f(x_k)" });
                }
                if fx < best_f {
                    best_f = fx;
                    best_x = st.x.clone();
                    best_k = st.k;
                }
            }
            Ok(Reference::new(
                map,
                best_x,
                best_f,
                format!("best iterate (k = {best_k}) of {n} AMD steps with h = {h:e} ({schedule} schedule)"),
                DEFAULT_ZERO_TOL,
            ))
        }
    }
}

/// Everything produced by one experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub x0: PrimalVec,
    pub reference: Reference,
    pub steps: StepSizes,
    /// One trace per algorithm, in the fixed algorithm order.
    pub traces: Vec<Trace>,
}

impl Experiment {
    pub fn trace(&self, alg: Algorithm) -> Option<&Trace> {
        self.traces.iter().find(|t| t.algorithm == alg)
    }

    /// Slopes over the default window; `None` where the trace is too short.
    pub fn rate_fits(&self) -> Vec<(Algorithm, Option<RateFit>)> {
        self.traces
            .iter()
            .map(|t| (t.algorithm, fit_rate(&t.records, None).ok()))
            .collect()
    }

    pub fn metadata(&self) -> serde_json::Value {
        let cfg = &self.config;
        let h: BTreeMap<&str, f64> = self.steps.h.iter().map(|(a, h)| (a.tag(), *h)).collect();
        let fits: BTreeMap<&str, Option<RateFit>> =
            self.rate_fits().into_iter().map(|(a, f)| (a.tag(), f)).collect();
        let finals: BTreeMap<&str, f64> =
            self.traces.iter().map(|t| (t.algorithm.tag(), t.final_gap())).collect();
        json!({
            "generator": concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")),
            "preset": cfg.preset,
            "objective": cfg.objective.to_string(),
            "geometry": "simplex",
            "d": cfg.d,
            "steps": cfg.steps,
            "seed": cfg.seed,
            "prng": GENERATOR_ID,
            "algorithms": cfg.algorithms.iter().map(|a| a.tag()).collect::<Vec<_>>(),
            "gamma_schedule": cfg.gamma_schedule.to_string(),
            "amdr": cfg.amdr,
            "step_policy": cfg.step_policy.to_string(),
            "l_chi": self.steps.l_chi,
            "l_f": self.steps.l_f,
            "l_f_note": if self.steps.l_f.is_none() { Some("unspecified") } else { None },
            "l_r": self.steps.l_r,
            "l_r_source": self.steps.l_r_source.map(|s| s.to_string()),
            "h": h,
            "x0": self.x0,
            "reference": {
                "provenance": self.reference.provenance,
                "f_star": self.reference.f_star,
                "x_star": self.reference.x_star,
                "zero_components": self.reference.zero_components(DEFAULT_ZERO_TOL),
                "reference_factor": cfg.reference_factor,
            },
            "full_scale": cfg.full_scale,
            "overrides": cfg.overrides,
            "final_gap": finals,
            "rate_fit_last_decade": fits,
        })
    }

    /// Writes `<tag>.csv` per algorithm, `metadata.json` and, when
    /// requested, `plot.svg` into `dir` (created if missing).
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for t in &self.traces {
            std::fs::write(dir.join(format!("{}.csv", t.algorithm.tag())), write_trace(&t.records))?;
        }
        let meta = serde_json::to_string_pretty(&self.metadata())?;
        std::fs::write(dir.join("metadata.json"), meta + "\n")?;
        if self.config.plot {
            let series: Vec<(&str, &[_])> = self
                .traces
                .iter()
                .map(|t| (t.algorithm.tag(), t.records.as_slice()))
                .collect();
            emit_plot(&series, &dir.join("plot.svg"))?;
        }
        Ok(())
    }
}

/// Runs every algorithm of `cfg`, one thread each.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let (problem, x0) = build_problem(cfg)?;
    let map = EntropicSimplex::new(cfg.d);
    if problem.objective().dim() != cfg.d || x0.len() != cfg.d {
        return Err(Error::DimensionMismatch {
            expected: cfg.d,
            found: if x0.len() != cfg.d { x0.len() } else { problem.objective().dim() },
        });
    }
    if !map.feasible_set().contains(&x0) {
        return Err(Error::Domain("x0 must lie in the simplex".into()));
    }
    let reference = reference_optimum(
        &map,
        &problem,
        &x0,
        cfg.steps,
        cfg.reference_factor,
        &GammaSchedule::NesterovRecurrence,
    )?;
    let steps = step_sizes(cfg, &map, &problem, &x0, Some(&reference))?;
    let f = problem.objective();
    let results: Vec<Result<Trace>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .algorithms
            .iter()
            .map(|&alg| {
                let run_cfg = RunConfig::new(alg, steps.h_for(alg), cfg.steps)
                    .with_schedule(cfg.gamma_schedule)
                    .with_amdr(cfg.amdr);
                let (map, reference, x0) = (&map, &reference, &x0);
                s.spawn(move || run(map, f, x0, reference, &run_cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });
    let traces = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Experiment {
        config: cfg.clone(),
        x0,
        reference,
        steps,
        traces,
    })
}
