//! Scenario construction, Monte Carlo experiments, and result files.

pub mod config;
pub mod experiment;
pub mod output;
pub mod topology;

pub use config::{SystemConfig, UlChannel};
pub use experiment::{run_experiment, simulate, trial_rng, Mode, Preset, SweepKind};
pub use output::{emit_results, ExperimentResult, Format, ResultMeta, ResultRow, UlSamples};
pub use topology::{build_topology, Layout, RisSite, Scenario};
