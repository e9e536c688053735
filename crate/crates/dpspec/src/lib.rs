//! Experiment harness for edge-private spectral clustering: config parsing,
//! dataset files, sweeps and ablations, and the CSV / binary outputs the
//! `dpspec` binary writes. The numerics live in `dpspec-core`.

pub mod config;
pub mod datasets;
pub mod formats;
pub mod harness;

pub use config::{ConfigError, ExperimentConfig, MechanismKind};
pub use harness::{run_ablation_power_iters, run_ablation_projection_dim, run_sweep, TradeoffCurve};
