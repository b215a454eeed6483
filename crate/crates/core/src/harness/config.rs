//! Experiment configuration: presets, settings from a key/value file or the
//! command line, and their resolution into a concrete [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algorithms::{AmdrParams, Algorithm, GammaSchedule, Regularizer};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Two-dimensional p-power objective on the simplex.
    ToyPower,
    /// Random quadratic on the simplex with absolute-smoothness step sizes.
    Quadratic,
    /// The same quadratic with relative-smoothness step sizes.
    QuadraticRelative,
    /// Quadratic defaults with every field open to overrides.
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::ToyPower => "toy_power",
            Preset::Quadratic => "quadratic",
            Preset::QuadraticRelative => "quadratic_relative",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "toy_power" => Ok(Preset::ToyPower),
            "quadratic" => Ok(Preset::Quadratic),
            "quadratic_relative" => Ok(Preset::QuadraticRelative),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidParameter(format!(
                "unknown preset '{other}' (expected toy_power, quadratic, quadratic_relative or custom)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "h", rename_all = "snake_case")]
pub enum StepPolicy {
    /// `h = 1/(L_chi L_f)` for MD/AMD; the AMDR prescription with `m(G)`.
    Absolute,
    /// As `Absolute` with the relative constant `L_r` in place of `L_f`.
    Relative,
    /// The same fixed `h` for every algorithm.
    Explicit(f64),
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepPolicy::Absolute => f.write_str("absolute"),
            StepPolicy::Relative => f.write_str("relative"),
            StepPolicy::Explicit(h) => write!(f, "explicit:{h}"),
        }
    }
}

impl FromStr for StepPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "absolute" => Ok(StepPolicy::Absolute),
            "relative" => Ok(StepPolicy::Relative),
            _ => {
                let h = s
                    .strip_prefix("explicit:")
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown step policy '{s}' (expected absolute, relative or explicit:H)"
                        ))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad step size in '{s}'")))?;
                if h > 0.0 && h.is_finite() {
                    Ok(StepPolicy::Explicit(h))
                } else {
                    Err(Error::InvalidParameter(format!("step size must be positive in '{s}'")))
                }
            }
        }
    }
}

/// Where the point defining `L_r` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "k", rename_all = "snake_case")]
pub enum LrSource {
    /// The reference minimiser.
    Oracle,
    /// The `k`-th AMD iterate under the absolute step size.
    Iterate(usize),
}

impl fmt::Display for LrSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LrSource::Oracle => f.write_str("oracle"),
            LrSource::Iterate(k) => write!(f, "iterate:{k}"),
        }
    }
}

impl FromStr for LrSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "oracle" {
            return Ok(LrSource::Oracle);
        }
        s.strip_prefix("iterate:")
            .and_then(|k| k.trim().parse().ok())
            .map(LrSource::Iterate)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("bad L_r source '{s}' (expected oracle or iterate:K)"))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// `(1/p) sum_i (x_i - 1/2)^p` in two dimensions.
    Power { p: u32 },
    /// `1/2 x^T B^T B x` with standard normal `B`.
    RandomQuadratic,
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveSpec::Power { p } => write!(f, "power:{p}"),
            ObjectiveSpec::RandomQuadratic => f.write_str("quadratic"),
        }
    }
}

impl FromStr for ObjectiveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "quadratic" {
            return Ok(ObjectiveSpec::RandomQuadratic);
        }
        let p: u32 = s
            .strip_prefix("power:")
            .and_then(|p| p.trim().parse().ok())
            .ok_or_else(|| {
                Error::InvalidParameter(format!("bad objective '{s}' (expected quadratic or power:P)"))
            })?;
        if p == 0 || p % 2 != 0 {
            return Err(Error::InvalidParameter(format!("power objective needs an even p, got {p}")));
        }
        Ok(ObjectiveSpec::Power { p })
    }
}

/// Comma-separated algorithm list, returned in the fixed output order
/// without duplicates.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(Error::InvalidParameter(format!("empty entry in algorithm list '{s}'")));
        }
        out.push(part.parse::<Algorithm>()?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("bad value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::InvalidParameter(format!("bad boolean '{other}' for {key}"))),
    }
}

/// Partially specified settings, from a file or the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub preset: Option<Preset>,
    pub d: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub step_policy: Option<StepPolicy>,
    pub gamma_schedule: Option<GammaSchedule>,
    pub out: Option<String>,
    pub plot: Option<bool>,
    pub objective: Option<ObjectiveSpec>,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub lr_source: Option<LrSource>,
    pub full_scale: Option<bool>,
    pub reference_factor: Option<usize>,
}

impl Settings {
    /// Keys accepted in configuration files (the long CLI flag names).
    pub const KEYS: [&'static str; 16] = [
        "preset",
        "d",
        "steps",
        "seed",
        "algorithms",
        "step-policy",
        "gamma-schedule",
        "out",
        "plot",
        "objective",
        "r",
        "gamma",
        "eps",
        "lr-source",
        "full-scale",
        "reference-factor",
    ];

    /// Sets one key; `_` and `-` are interchangeable in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('_', "-");
        match key.as_str() {
            "preset" => self.preset = Some(value.parse()?),
            "d" => self.d = Some(parse_num(&key, value)?),
            "steps" => self.steps = Some(parse_num(&key, value)?),
            "seed" => self.seed = Some(parse_num(&key, value)?),
            "algorithms" => self.algorithms = Some(parse_algorithms(value)?),
            "step-policy" => self.step_policy = Some(value.parse()?),
            "gamma-schedule" => self.gamma_schedule = Some(value.parse()?),
            "out" => self.out = Some(value.trim().to_string()),
            "plot" => self.plot = Some(parse_bool(&key, value)?),
            "objective" => self.objective = Some(value.parse()?),
            "r" => self.r = Some(parse_num(&key, value)?),
            "gamma" => self.gamma = Some(parse_num(&key, value)?),
            "eps" => self.eps = Some(parse_num(&key, value)?),
            "lr-source" => self.lr_source = Some(value.parse()?),
            "full-scale" => self.full_scale = Some(parse_bool(&key, value)?),
            "reference-factor" => self.reference_factor = Some(parse_num(&key, value)?),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown key '{other}' (expected one of {})",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. Blank lines and lines starting
    /// with `#` are ignored; repeated keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut settings = Settings::default();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "missing key".into(),
                });
            }
            if let Some(prev) = seen.insert(key.clone(), line) {
                return Err(Error::Parse {
                    line,
                    message: format!("key '{key}' already set on line {prev}"),
                });
            }
            settings.set(&key, value).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(settings)
    }

    /// Fields of `over` replace those of `self`.
    pub fn overlay(mut self, over: &Settings) -> Settings {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if over.$f.is_some() {
                    self.$f = over.$f.clone();
                }
            )*};
        }
        take!(
            preset, d, steps, seed, algorithms, step_policy, gamma_schedule, out, plot, objective, r,
            gamma, eps, lr_source, full_scale, reference_factor
        );
        self
    }
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub objective: ObjectiveSpec,
    pub d: usize,
    pub seed: u64,
    pub steps: usize,
    pub algorithms: Vec<Algorithm>,
    pub step_policy: StepPolicy,
    pub gamma_schedule: GammaSchedule,
    pub amdr: AmdrParams,
    pub lr_source: LrSource,
    /// The reference run is this many times longer than the experiment.
    pub reference_factor: usize,
    pub full_scale: bool,
    pub plot: bool,
    pub out: Option<String>,
    /// Starting point; `None` draws one from the seed.
    pub x0: Option<Vec<f64>>,
    /// `key = value` strings for every field that differs from the preset.
    pub overrides: Vec<String>,
}

pub const DESK_D: usize = 50;
pub const DESK_STEPS: usize = 5000;
pub const FULL_D: usize = 1000;
pub const FULL_STEPS: usize = 50_000;
pub const DEFAULT_SEED: u64 = 1;

impl ExperimentConfig {
    /// The preset's own values.
    pub fn preset(preset: Preset, full_scale: bool) -> Self {
        let (d, steps) = if full_scale {
            (FULL_D, FULL_STEPS)
        } else {
            (DESK_D, DESK_STEPS)
        };
        let base = ExperimentConfig {
            preset,
            objective: ObjectiveSpec::RandomQuadratic,
            d,
            seed: DEFAULT_SEED,
            steps,
            algorithms: vec![Algorithm::MirrorDescent, Algorithm::Amd, Algorithm::Amdr],
            step_policy: StepPolicy::Absolute,
            gamma_schedule: GammaSchedule::NesterovRecurrence,
            amdr: AmdrParams::simplex_default(),
            lr_source: LrSource::Oracle,
            reference_factor: 10,
            full_scale,
            plot: false,
            out: None,
            x0: None,
            overrides: Vec::new(),
        };
        match preset {
            Preset::ToyPower => ExperimentConfig {
                objective: ObjectiveSpec::Power { p: 10 },
                d: 2,
                steps: 10_000,
                step_policy: StepPolicy::Explicit(1.0),
                x0: Some(vec![0.999, 0.001]),
                ..base
            },
            Preset::Quadratic | Preset::Custom => base,
            Preset::QuadraticRelative => ExperimentConfig {
                step_policy: StepPolicy::Relative,
                ..base
            },
        }
    }

    /// Starts from the chosen preset (default `quadratic`) and applies every
    /// field present in `settings`, recording the ones that change a value.
    pub fn resolve(settings: &Settings) -> Result<Self> {
        let preset = settings.preset.unwrap_or(Preset::Quadratic);
        let full = settings.full_scale.unwrap_or(false);
        let mut cfg = Self::preset(preset, full);
        let mut overrides = Vec::new();
        macro_rules! apply {
            ($field:ident, $target:expr, $name:literal) => {
                if let Some(v) = &settings.$field {
                    if *v != $target {
                        overrides.push(format!("{} = {}", $name, show(v)));
                        $target = v.clone();
                    }
                }
            };
        }
        apply!(d, cfg.d, "d");
        apply!(steps, cfg.steps, "steps");
        apply!(seed, cfg.seed, "seed");
        apply!(algorithms, cfg.algorithms, "algorithms");
        cfg.algorithms.sort();
        cfg.algorithms.dedup();
        apply!(step_policy, cfg.step_policy, "step-policy");
        apply!(gamma_schedule, cfg.gamma_schedule, "gamma-schedule");
        apply!(objective, cfg.objective, "objective");
        apply!(r, cfg.amdr.r, "r");
        apply!(gamma, cfg.amdr.gamma, "gamma");
        apply!(lr_source, cfg.lr_source, "lr-source");
        apply!(reference_factor, cfg.reference_factor, "reference-factor");
        if let Some(eps) = settings.eps {
            let current = match cfg.amdr.regularizer {
                Regularizer::ShiftedEntropy { eps } => eps,
                Regularizer::Euclidean => f64::NAN,
            };
            if eps != current {
                overrides.push(format!("eps = {eps}"));
                cfg.amdr.regularizer = Regularizer::ShiftedEntropy { eps };
            }
        }
        if full {
            overrides.push("full-scale = true".into());
        }
        cfg.out = settings.out.clone();
        cfg.plot = settings.plot.unwrap_or(false);
        // A changed dimension invalidates the preset's fixed starting point.
        if cfg.x0.as_ref().is_some_and(|x0| x0.len() != cfg.d) {
            cfg.x0 = None;
        }
        cfg.overrides = overrides;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("d must be positive".into()));
        }
        if let ObjectiveSpec::Power { .. } = self.objective {
            if self.d != 2 {
                return Err(Error::InvalidParameter(format!(
                    "the power objective is two-dimensional, got d = {}",
                    self.d
                )));
            }
            if !matches!(self.step_policy, StepPolicy::Explicit(_)) {
                return Err(Error::InvalidParameter(
                    "the power objective has no smoothness constant; use --step-policy explicit:H".into(),
                ));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms selected".into()));
        }
        if self.reference_factor == 0 {
            return Err(Error::InvalidParameter("reference-factor must be positive".into()));
        }
        let AmdrParams { r, gamma, regularizer } = self.amdr;
        if !(r > 0.0 && r.is_finite() && gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "AMDR needs r > 0 and gamma > 0, got r = {r}, gamma = {gamma}"
            )));
        }
        if let Regularizer::ShiftedEntropy { eps } = regularizer {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
        }
        if self.algorithms.iter().any(|a| matches!(a, Algorithm::Amd | Algorithm::AmdPrimal)) {
            self.gamma_schedule.validate_for_amd()?;
        }
        Ok(())
    }
}

fn show<T: fmt::Debug>(v: &T) -> String {
    let s = format!("{v:?}");
    s.trim_start_matches("Some(").trim_end_matches(')').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_defaults() {
        let cfg = ExperimentConfig::resolve(&Settings {
            preset: Some(Preset::ToyPower),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.d, 2);
        assert_eq!(cfg.steps, 10_000);
        assert_eq!(cfg.objective, ObjectiveSpec::Power { p: 10 });
        assert_eq!(cfg.x0, Some(vec![0.999, 0.001]));
        assert_eq!(cfg.step_policy, StepPolicy::Explicit(1.0));
        assert!(cfg.overrides.is_empty());
    }

    #[test]
    fn desk_and_full_scale() {
        let desk = ExperimentConfig::preset(Preset::Quadratic, false);
        assert_eq!((desk.d, desk.steps), (50, 5000));
        let full = ExperimentConfig::preset(Preset::Quadratic, true);
        assert_eq!((full.d, full.steps), (1000, 50_000));
    }

    #[test]
    fn file_parsing_and_overlay() {
        let text = "# comment\npreset = quadratic_relative\n\nd=20\nsteps = 300\nalgorithms = amd, md\nstep_policy = explicit:0.5\n";
        let file = Settings::parse(text).unwrap();
        assert_eq!(file.d, Some(20));
        assert_eq!(file.algorithms, Some(vec![Algorithm::MirrorDescent, Algorithm::Amd]));
        let cli = Settings {
            d: Some(30),
            ..Default::default()
        };
        let cfg = ExperimentConfig::resolve(&file.overlay(&cli)).unwrap();
        assert_eq!(cfg.preset, Preset::QuadraticRelative);
        assert_eq!(cfg.d, 30);
        assert_eq!(cfg.steps, 300);
        assert_eq!(cfg.step_policy, StepPolicy::Explicit(0.5));
        assert!(cfg.overrides.iter().any(|o| o == "d = 30"));
        assert!(cfg.overrides.iter().any(|o| o.starts_with("step-policy")));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("d = 3\nnonsense\n", 2),
            ("d = 3\nd = 4\n", 2),
            ("\n\nwhat = 1\n", 3),
            ("steps = -1\n", 1),
            (" = 4\n", 1),
        ] {
            match Settings::parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn value_parsers() {
        assert_eq!("absolute".parse::<StepPolicy>().unwrap(), StepPolicy::Absolute);
        assert_eq!("explicit:0.25".parse::<StepPolicy>().unwrap(), StepPolicy::Explicit(0.25));
        assert!("explicit:-1".parse::<StepPolicy>().is_err());
        assert!("explicit:".parse::<StepPolicy>().is_err());
        assert_eq!("iterate:100".parse::<LrSource>().unwrap(), LrSource::Iterate(100));
        assert!("iterate:x".parse::<LrSource>().is_err());
        assert_eq!("power:4".parse::<ObjectiveSpec>().unwrap(), ObjectiveSpec::Power { p: 4 });
        assert!("power:3".parse::<ObjectiveSpec>().is_err());
        assert!(parse_algorithms("md,,amd").is_err());
        assert_eq!(
            parse_algorithms("amdr,md,amd,md").unwrap(),
            vec![Algorithm::MirrorDescent, Algorithm::Amd, Algorithm::Amdr]
        );
    }

    #[test]
    fn invalid_combinations() {
        let bad = Settings {
            preset: Some(Preset::ToyPower),
            step_policy: Some(StepPolicy::Absolute),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(&bad).is_err());
        let bad = Settings {
            gamma_schedule: Some(GammaSchedule::Linear { r: 1.0 }),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(&bad).is_err());
        let bad = Settings {
            d: Some(0),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(&bad).is_err());
    }
}
