//! Bit-packed GF(2) vectors with rank, and GF(2^s) arithmetic with monomial
//! evaluation.

mod bitvec;
mod field;
mod monomial;
mod rank;

pub use bitvec::BitVec;
pub use field::{field_mul, Field, FieldElem, IRREDUCIBLE_LOW, MAX_FIELD_EXP};
pub use monomial::{eval_monomial, MonomialIndex};
pub use rank::{rank_gf2, EchelonBasis};
