//! Contamination generators, evaluation metrics and the Monte-Carlo sweep
//! engine.

mod config;
mod generate;
mod metrics;
mod sweep;

pub use config::parse_config;
pub use generate::{
    gen_barrow_wheel, gen_clean, gen_pointmass, gen_shift, generate, random_rotation, Config,
    ContaminationSpec, Core, LabeledSample,
};
pub use metrics::{bias, misclassification, nu_distance};
pub use sweep::{
    accuracy_curve, run_sweep, run_sweep_with, write_sweep_csv, Cell, Mode, NuDraw, Status,
    SweepConfig, SweepRow, ACCURACY_DEFAULT_N, ACCURACY_MAX_N, SWEEP_COLUMNS,
};

pub use crate::params::num_starts;
