//! Monte-Carlo experiments comparing rescaled discrete encodings with their
//! continuum limits.

pub mod discrete;
pub mod experiments;
pub mod report;
pub mod rescale;

pub use experiments::{
    run_height_convergence, run_leftheight_convergence, run_profile_convergence, run_rayknight_check, run_stable_marginal_check,
    ExperimentKind, LabConfig,
};
pub use report::{ExperimentOutput, ExperimentReport, SampleSet, StatKind, Statistic, Thresholds};
pub use rescale::{RescaledPath, Source};
