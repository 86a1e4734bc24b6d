//! Experiment harness: configuration, evolution loop, slope fits and sweeps.

pub mod config;
pub mod experiment;
pub mod fit;
pub mod sweep;

pub use config::{Direction, ExperimentConfig, InitialState, OutputRequest, Terms};
pub use experiment::{run_experiment, EntropySeries, RunOutput, StepRecord};
pub use fit::{common_window, fit_slope, fit_values, FitOutcome, SlopeFit, WindowPolicy};
pub use sweep::{collapse_spread, sweep, SweepAxis, SweepRow, SweepTable};
