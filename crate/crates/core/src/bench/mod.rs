//! Experiment harness: accuracy tables, sweep-budget sensitivity and
//! wall-clock scaling studies, with CSV and JSON reports.

mod accuracy;
mod report;
mod scaling;
mod spec;
pub mod stats;

pub use accuracy::{run_accuracy_experiment, run_sweep_sensitivity, sweep_variant_name};
pub use report::{
    AccuracyReport, Aggregate, BaselineDiagnostics, Method, PhaseTimings, RepetitionRecord, Status,
};
pub use scaling::{
    run_feature_scaling, run_point_scaling, Phase, ScalingAxis, ScalingCell, ScalingOptions,
    ScalingReport, MAX_DESK_FEATURES, MAX_DESK_POINTS,
};
pub use spec::{derive_seed, DatasetSource, ExperimentSpec};
