//! `mirror-accel`: run experiments, fit rates, dump ODE trajectories and run
//! the invariant checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mirror_accel::harness::{
    fit_rate, read_trace, run_checks, run_experiment, ExperimentConfig, Settings,
};
use mirror_accel::linops::PrimalVec;
use mirror_accel::mirror::{EntropicSimplex, EuclideanMirror, MirrorMap};
use mirror_accel::objectives::{Objective, PowerObjective};
use mirror_accel::ode::{integrate, IntegratorOptions, OdeSystem, SystemKind};
use mirror_accel::Error;

#[derive(Parser, Debug)]
#[command(name = "mirror-accel", version, about = "Accelerated mirror descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a preset and write traces, metadata and an optional plot.
    Run(RunArgs),
    /// Fit the log-log slope of f_gap against k in a trace file.
    Rates(RatesArgs),
    /// Integrate one of the continuous-time systems on the toy problem.
    Ode(OdeArgs),
    /// Run the invariant suite.
    Check(CheckArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// toy_power, quadratic, quadratic_relative or custom.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated subset of md, amd, amd_primal, amdr.
    #[arg(long)]
    algorithms: Option<String>,
    /// absolute, relative or explicit:H.
    #[arg(long)]
    step_policy: Option<String>,
    /// recurrence or linear:R.
    #[arg(long)]
    gamma_schedule: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Also write plot.svg (needs --out).
    #[arg(long)]
    plot: bool,
    /// quadratic or power:P.
    #[arg(long)]
    objective: Option<String>,
    /// AMDR averaging parameter.
    #[arg(long)]
    r: Option<String>,
    /// AMDR step multiplier.
    #[arg(long)]
    gamma: Option<String>,
    /// Shift of the AMDR entropy regulariser.
    #[arg(long)]
    eps: Option<String>,
    /// Point for the relative constant: oracle or iterate:K.
    #[arg(long)]
    lr_source: Option<String>,
    /// Use d = 1000 and 50000 steps for the quadratic presets.
    #[arg(long)]
    full_scale: bool,
    /// Length of the reference run as a multiple of --steps.
    #[arg(long)]
    reference_factor: Option<String>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, Error> {
        let mut s = Settings::default();
        let pairs = [
            ("preset", &self.preset),
            ("d", &self.d),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("algorithms", &self.algorithms),
            ("step-policy", &self.step_policy),
            ("gamma-schedule", &self.gamma_schedule),
            ("out", &self.out),
            ("objective", &self.objective),
            ("r", &self.r),
            ("gamma", &self.gamma),
            ("eps", &self.eps),
            ("lr-source", &self.lr_source),
            ("reference-factor", &self.reference_factor),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        if self.plot {
            s.plot = Some(true);
        }
        if self.full_scale {
            s.full_scale = Some(true);
        }
        Ok(s)
    }
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long)]
    csv: PathBuf,
    /// First k of the window (default: last decade).
    #[arg(long)]
    from: Option<usize>,
    #[arg(long)]
    to: Option<usize>,
}

#[derive(Args, Debug)]
struct OdeArgs {
    /// gradient_flow, mirror_flow_dual, mirror_flow_primal, accelerated_dual or accelerated_primal.
    #[arg(long)]
    system: String,
    #[arg(long, default_value_t = 3.0)]
    r: f64,
    /// Start time (default 0, or 1e-3 for the accelerated systems).
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    t1: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Numerical(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e)
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn describe_numerical(e: &Error) -> String {
    match e {
        Error::AtIteration { k, source } => format!("numerical failure at k = {k}: {source}"),
        Error::NonFinite { k, quantity } => {
            format!("numerical failure at k = {k}: non-finite {quantity}")
        }
        other => format!("numerical failure: {other}"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Rates(a) => cmd_rates(&a),
        Command::Ode(a) => cmd_ode(&a),
        Command::Check(a) => cmd_check(&a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {}", describe_numerical(&e));
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn cmd_run(args: &RunArgs) -> Result<String, Failure> {
    let file = match &args.config {
        Some(path) => Settings::parse(&read_file(path)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
        None => Settings::default(),
    };
    let settings = file.overlay(&args.settings()?);
    let cfg = ExperimentConfig::resolve(&settings)?;
    if cfg.plot && cfg.out.is_none() {
        return Err(Failure::Usage("--plot needs --out".into()));
    }
    let exp = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.out {
        exp.write(Path::new(dir))?;
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "preset {} d={} steps={} seed={} f*={:e} ({})",
        cfg.preset, cfg.d, cfg.steps, cfg.seed, exp.reference.f_star, exp.reference.provenance
    );
    for (alg, fit) in exp.rate_fits() {
        let trace = exp.trace(alg).expect("fit for a run algorithm");
        let slope = match fit {
            Some(f) => format!("slope {:.3} over [{}, {}]", f.slope, f.k_lo, f.k_hi),
            None => "slope n/a".into(),
        };
        let _ = writeln!(
            text,
            "{:<10} h={:e} final f_gap={:e} {slope}",
            alg.tag(),
            exp.steps.h_for(alg),
            trace.final_gap()
        );
    }
    if let Some(dir) = &cfg.out {
        let _ = writeln!(text, "wrote {dir}");
    }
    Ok(text)
}

fn cmd_rates(args: &RatesArgs) -> Result<String, Failure> {
    let text = read_file(&args.csv)?;
    let records =
        read_trace(&text).map_err(|e| Failure::Usage(format!("{}: {e}", args.csv.display())))?;
    let window = match (args.from, args.to) {
        (None, None) => None,
        (Some(lo), Some(hi)) if lo <= hi => Some((lo, hi)),
        (Some(lo), Some(hi)) => {
            return Err(Failure::Usage(format!("empty window: --from {lo} exceeds --to {hi}")))
        }
        (lo, hi) => {
            let last = records.last().map_or(0, |r| r.k);
            Some((lo.unwrap_or(1), hi.unwrap_or(last)))
        }
    };
    let fit = fit_rate(&records, window).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(format!(
        "window [{}, {}] records {} slope {:.6} intercept {:.6} residual {:.3e}\n",
        fit.k_lo, fit.k_hi, fit.used, fit.slope, fit.intercept, fit.residual
    ))
}

/// The toy problem: `f(x) = sum (x_i - 1/2)^10 / 10` from `x0 = (0.999, 0.001)`.
fn cmd_ode(args: &OdeArgs) -> Result<String, Failure> {
    let kind = SystemKind::from_tag(&args.system, args.r)?;
    let f = PowerObjective::new(10)?;
    let x0 = PrimalVec::new(vec![0.999, 0.001]);
    let (euclid, simplex) = (EuclideanMirror::new(2), EntropicSimplex::new(2));
    let map: &dyn MirrorMap = if kind == SystemKind::GradientFlow { &euclid } else { &simplex };
    let mut sys = OdeSystem::new(kind, map, &f)?;
    if let Some(t0) = args.t0 {
        sys = sys.with_t0(t0)?;
    }
    let y0 = sys.initial_state(&x0)?;
    let opts = IntegratorOptions::with_tol(args.tol);
    let traj = integrate(|t, y| sys.rhs(t, y), sys.t0, args.t1, &y0, &opts)?;
    let f_star = f.value(&f.minimizer());

    let mut csv = String::from("t,x1,x2,z1,z2,f_gap\n");
    for (t, y) in traj.times.iter().zip(&traj.states) {
        let x = sys.primal_point(y);
        let z = sys.mirror_point(y);
        let _ = writeln!(
            csv,
            "{t:e},{:e},{:e},{:e},{:e},{:e}",
            x[0],
            x[1],
            z[0],
            z[1],
            f.value(&x) - f_star
        );
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv)
                .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            Ok(format!(
                "{} steps ({} rejected) over [{}, {}] -> {}\n",
                traj.times.len() - 1,
                traj.rejected,
                traj.t_start(),
                traj.t_end(),
                path.display()
            ))
        }
        None => Ok(csv),
    }
}

fn cmd_check(args: &CheckArgs) -> Result<String, Failure> {
    let outcomes = run_checks(args.seed);
    let mut text = String::new();
    for o in &outcomes {
        let _ = writeln!(text, "{o}");
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Numerical(Error::Inconsistent(format!(
            "checks failed: {}",
            failed.join(", ")
        ))))
    }
}
