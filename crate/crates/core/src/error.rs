use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("field exponent mismatch: GF(2^{0}) vs GF(2^{1})")]
    FieldMismatch(u8, u8),

    #[error("unsupported field exponent {0} (must be 1..=63)")]
    FieldExponent(u8),

    #[error("index {index} out of range 0..{bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("value is not a dyadic rational: {0}")]
    NotDyadic(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("resampling table exhausted at variable {variable} (needed column {column}, have {columns})")]
    TableExhausted { variable: usize, column: usize, columns: usize },

    #[error("query is not graded")]
    NotGraded,

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("branching program has a cycle through node {0}")]
    Cycle(usize),

    #[error("branching program reads variable {var} twice on a path to node {node}")]
    ReadTwice { node: usize, var: usize },

    #[error("LLL condition e*p*d^(1+eps) <= 1 fails: p={p}, d={d}, eps={epsilon}, lhs={lhs}")]
    LllCondition { p: f64, d: usize, epsilon: f64, lhs: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
