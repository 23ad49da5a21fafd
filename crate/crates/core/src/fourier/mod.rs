//! Walsh-Hadamard analysis and conditional-expectation maximization of
//! weighted character sums.

mod charsum;
mod wht;

pub use charsum::{
    default_chunk, generator_rows, heavy_codeword, maximize_character_sum, maximize_character_sum_with, CharSumConfig,
    CharSumOutcome, CharacterSum,
};
pub use wht::{inverse_wht, wht, SpectrumTable};
