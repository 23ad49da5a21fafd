//! Moser-Tardos with resampling tables, witness trees and a deterministic
//! table search.

mod instance;
mod potential;
mod solve;
mod table;
mod tree;
mod wtl;

pub use instance::{BadEvent, ClauseEvent, CountEvent, Event, LllInstance, RobpEvent, TableEvent};
pub use potential::{compatible, potential_s, Potential, TreeJuntas};
pub use solve::{
    cut_trees, deterministic_mt, reference_size, union_bound_assignment, MtConfig, MtOutcome, MAX_TREE_SIZE,
};
pub use table::{mt_randomized, solve_randomized, MtRun, ResamplingTable};
pub use tree::{
    build_slices, enumerate_tail_trees, enumerate_witness_trees, enumerate_witness_trees_with, witness_tree_capped,
    witness_tree_of, Slice, TreeShape, WitnessTree, DEFAULT_TREE_BUDGET,
};
pub use wtl::{check_wtl_empirical, check_wtl_many, WtlReport};
