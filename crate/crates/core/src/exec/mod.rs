//! The plan interpreter: trie construction, node-at-a-time evaluation,
//! aggregation and counters.

mod aggregate;
mod engine;
mod multi;
mod policy;
mod result;
mod stats;

pub use aggregate::{factorized_combine, sum_product, Partial};
pub use engine::execute;
pub use multi::{execute_multi, run, PlanKind, Strategy};
pub use policy::{Choice, LeafChoice, Opts, PolicyKind, StructurePolicy};
pub use result::{ResultBag, MIN_IDENTITY};
pub use stats::ExecStats;

use thiserror::Error;

use crate::query::{PlanViolation, QueryError};
use crate::storage::StorageError;
use crate::trie::TrieError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error("invalid plan: {0}")]
    Plan(#[from] PlanViolation),
    #[error(transparent)]
    Trie(#[from] TrieError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("illegal structure policy: {0}")]
    Policy(String),
}
