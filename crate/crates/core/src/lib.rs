//! Deterministic derandomization toolkit.
//!
//! Small GF(2) probability spaces that fool Fourier characters and
//! neighborhoods, conditional-expectation optimizers for sums of juntas driven
//! by partial-expectation oracles, and a deterministic Moser-Tardos solver
//! built on top of them, with applications to rainbow hypergraph coloring,
//! defective coloring, and domatic partition.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature enables
//! rayon-backed candidate scoring; all reductions break ties by index, so
//! results do not depend on the thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod apps;
pub mod codes;
pub mod dyadic;
pub mod error;
pub mod fourier;
pub mod gf2core;
pub mod juntas;
pub mod lll;
mod par;
pub(crate) mod util;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
