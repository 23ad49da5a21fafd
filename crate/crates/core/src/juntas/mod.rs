//! Conditional-expectation optimizers for sums of juntas.

mod optimize;
mod oracle;
mod partial;
mod partition;
mod robp;
mod smallbias;

pub use optimize::{
    default_t_cap, optimize_biased, optimize_graded, optimize_juntas, optimize_truthtables, JuntaConfig, JuntaOutcome,
    ThresholdPeo,
};
pub use oracle::{
    evaluate_with, uniform_expectation, ContinuousPeo, ExplicitTables, JuntaSystem, Peo, PlainFromContinuous,
};
pub use partial::{graded_level, PartialAssignment, PartialValue, MAX_BITS};
pub use partition::{
    partition_variables, partition_variables_with, PartitionConfig, PartitionReport, SplitMethod, VariablePartition,
    PARTITION_SAMPLE_BUDGET,
};
pub use robp::{robp_expectation, Robp, RobpBank, RobpNode};
pub use smallbias::{
    build_small_bias_space, build_small_bias_space_with, check_small_bias, powering_exponent, SmallBiasConstruction,
    SmallBiasMode, SmallBiasSpace, DEFAULT_SAMPLE_BUDGET,
};
