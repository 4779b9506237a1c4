//! Conjunctive queries, Free Join plans, plan conversion and liveness.

mod bushy;
mod convert;
mod cq;
mod lexer;
mod liveness;
mod plan;

pub use bushy::{decompose_bushy, BushyPlan, PlanStage};
pub use convert::{convert_left_deep, optimize_plan, LeftDeepPlan, PlanMode};
pub use cq::{parse_query, AggKind, AggregationSpec, Atom, ConjunctiveQuery, ParsedQuery};
pub use liveness::{liveness, needs_offsets, prune_plan, Liveness};
pub use plan::{validate_plan, FreeJoinPlan, PlanViolation, Subatom};

use thiserror::Error;

use crate::storage::Kind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("head variable {0} does not appear in the body")]
    HeadVariableNotInBody(String),
    #[error("atom {relation} repeats variable {var}")]
    RepeatedVariable { relation: String, var: String },
    #[error("relation {0} appears in more than one atom")]
    DuplicateRelation(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("atom {relation} binds {vars} variables but the relation has arity {arity}")]
    Arity { relation: String, arity: usize, vars: usize },
    #[error("variable {var} binds both {first} and {second} columns")]
    KindMismatch { var: String, first: Kind, second: Kind },
    #[error("MIN over {0} requires an integer variable")]
    MinNeedsInt(String),
    #[error("atom {0} shares no variable with the atoms joined before it")]
    CartesianProduct(String),
    #[error("plan does not cover the query: {0}")]
    Coverage(String),
    #[error("invalid plan: {0}")]
    Plan(#[from] PlanViolation),
    #[error("{0}")]
    Invalid(String),
}

impl QueryError {
    pub(crate) fn shifted(self, by: usize) -> QueryError {
        match self {
            QueryError::Syntax { pos, message } => QueryError::Syntax { pos: pos + by, message },
            other => other,
        }
    }
}
