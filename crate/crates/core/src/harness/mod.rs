//! Simulation experiments: tables, figures and property checks.

pub mod check;
pub mod config;
pub mod emit;
pub mod experiment;
pub mod presets;

pub use check::{run_mac_c_table, run_variance_check, MacRow, VarianceRow};
pub use config::{CalibrationConfig, EstimatorName, ExperimentConfig, SignalGrid, StructureSource};
pub use emit::{emit_coverage, emit_mac_table, emit_results, emit_variance, Manifest};
pub use experiment::{
    calibration_seed, coverage, mean_sd, run_coverage_experiment, run_table_experiment, Cell,
    CoverageRow, ExperimentResult, StructureSummary,
};
pub use presets::{preset_config, reproduce, standard_structures, Scale, Target};
