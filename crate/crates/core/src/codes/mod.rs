//! GF(2) codes whose induced seed spaces are unbiased on, or fool, a family of
//! index sets.

mod code;
mod family;
mod fooling;
mod params;
mod unbiased;
mod verify;

pub use code::Code;
pub use family::NeighborhoodFamily;
pub use fooling::{build_fooling_code, build_fooling_code_with, potential_f_at, FoolingConfig};
pub use params::{RoundShape, MAX_SEARCH_EXP};
pub use unbiased::{build_unbiased_code, build_unbiased_code_with, unbiased_round, CodeReport, UnbiasedConfig};
pub use verify::{
    fools_by_rank, verify_code, verify_code_with_budget, FoolingCertificate, VerifyFailure, VerifyMode,
    DEFAULT_SEED_BUDGET,
};
