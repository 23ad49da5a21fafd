//! Rainbow hypergraph coloring, defective coloring and domatic partition.

mod defective;
mod domatic;
mod graph;
mod rainbow;

pub use defective::{
    binomial_tail, defective_color, max_split_bits, split_cap, split_classes, split_degrees, ColorSchedule,
    DefectiveConfig, DefectiveOutcome, SameColorEvent, ScheduleStage, SplitConfig, SplitOutcome, StageReport,
    LARGE_SPLIT_T_CAP,
};
pub use domatic::{domatic_partition, DomaticConfig, DomaticHooks, DomaticOutcome, Projection};
pub use graph::{Graph, Hypergraph};
pub use rainbow::{
    color_of, rainbow_bound, rainbow_color, rainbow_peo, RainbowConfig, RainbowMethod, RainbowOutcome, RainbowPeo,
};
