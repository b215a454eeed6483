//! Experiment presets, configuration, trace files, rate fits and plots.

pub mod check;
pub mod config;
pub mod csvio;
pub mod experiment;
pub mod plot;
pub mod rates;

pub use check::{run_checks, CheckOutcome};
pub use config::{
    parse_algorithms, ExperimentConfig, LrSource, ObjectiveSpec, Preset, Settings, StepPolicy,
};
pub use csvio::{read_trace, write_trace};
pub use experiment::{
    amdr_step_size, build_problem, plain_step, reference_optimum, run_experiment, step_sizes,
    Experiment, Problem, StepSizes,
};
pub use plot::{emit_plot, render_svg};
pub use rates::{fit_rate, RateFit};
