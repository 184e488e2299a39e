//! Experimental methodology: identity partitioning, acquisition settings,
//! intra- and cross-setting evaluation, aggregation and synthetic scores.

mod experiment;
mod partition;
mod settings;
mod synth;

pub use experiment::{
    aggregate, run, run_cross, run_intra, AggregateRow, Aggregation, DistanceGroup, ExperimentInputs,
    ExperimentOutcome, MethodKind, Protocol, SourceKey, UnitResult,
};
pub use partition::{partition_identities, Partition};
pub use settings::{classify_cross, cross_pairs, CrossKind, SettingDescriptor, CAMERA_IDS, DISTANCES_M};
pub use synth::{
    analytic_auc, normal_cdf, normal_quantile, squash, synth_scores, ClassParams, SynthGenParams, SystemParams,
};
