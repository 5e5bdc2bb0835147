use thiserror::Error as ThisError;

use crate::algebra::Elem;

/// Errors raised by the constructions and analyses in this crate.
#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum Error {
    #[error("universe must have at least one element")]
    EmptyUniverse,
    #[error("algebra has no operations")]
    NoOperations,
    #[error("empty class of algebras")]
    EmptyClass,
    #[error("bad element labels: {0}")]
    BadLabels(String),
    #[error("duplicate operation name {0:?}")]
    DuplicateOpName(String),
    #[error("operation {0:?} has arity 0")]
    ZeroArity(String),
    #[error("operation {op:?}: table has {found} entries, expected {expected}")]
    BadTableLength { op: String, expected: usize, found: usize },
    #[error("operation {op:?}: entry {value} at index {index} is out of range")]
    EntryOutOfRange { op: String, index: usize, value: usize },
    #[error("operation {op:?} is not idempotent at {x}")]
    NonIdempotent { op: String, x: Elem },
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("not a congruence (operation {op:?}): {detail}")]
    NotACongruence { op: String, detail: String },
    #[error("subset not closed: {op}{args:?} = {value}")]
    NotClosed { op: String, args: Vec<Elem>, value: Elem },
    #[error("universe of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("unknown operation symbol {0:?}")]
    UnknownSymbol(String),
    #[error("symbol {symbol:?} applied to {found} arguments, arity is {expected}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("term parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("element {0:?} is not in the generated subuniverse")]
    ElementNotGenerated(Vec<Elem>),
    #[error("closure exceeded the node cap {cap}")]
    CapExceeded { cap: usize },
    #[error("projection of the relation onto coordinate {0} is not the whole universe")]
    ProjectionNotFull(usize),
    #[error("algebra {algebra} is not smooth: thick edge {a},{b} is not a subalgebra")]
    NotSmooth { algebra: String, a: Elem, b: Elem },
    #[error("algebra {algebra} has a unary edge {a},{b}")]
    UnaryEdge { algebra: String, a: Elem, b: Elem },
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("verification failed: {condition} on {edge} at {tuple:?}")]
    VerificationFailed { condition: String, edge: String, tuple: Vec<Elem> },
    #[error("case not recognized: {0}")]
    CaseNotRecognized(String),
    #[error("witness not found: {0}")]
    WitnessNotFound(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("empty result: {0}")]
    EmptyResult(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
