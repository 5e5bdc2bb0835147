//! Local structure of finite idempotent algebras.
//!
//! Pairs of elements are classified into semilattice, majority, affine and
//! unary edges; the resulting graphs are tested for connectivity; thin
//! (directed) edges are extracted; and uniform term operations that witness
//! all edge types at once are synthesized and verified by evaluation.

pub mod algebra;
pub mod congruence;
pub mod edges;
pub mod error;
pub mod fixtures;
pub mod genclose;
pub mod reduct;
pub mod synth;
pub mod term;
pub mod thin;

pub use algebra::{product, quotient, restrict, validate_algebra, Elem, FiniteAlgebra, Operation, RawAlgebra};
pub use congruence::{Congruence, Tolerance};
pub use edges::{classify_pair, EdgeLabel, EdgeReport};
pub use error::{Error, Result};
pub use term::{DagNode, Term};

/// Resource bounds shared by the exhaustive analyses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest universe accepted without `force`.
    pub max_size: usize,
    pub force: bool,
    /// Node cap for every closure computation.
    pub node_cap: usize,
}

pub const DEFAULT_MAX_SIZE: usize = 10;
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

impl Default for Limits {
    fn default() -> Self {
        Limits { max_size: DEFAULT_MAX_SIZE, force: false, node_cap: DEFAULT_NODE_CAP }
    }
}

impl Limits {
    pub fn check_size(&self, size: usize) -> Result<()> {
        if size > self.max_size && !self.force {
            Err(Error::TooLarge { size, limit: self.max_size })
        } else {
            Ok(())
        }
    }
}
