//! The dataflow system: per-node analysis information, the transfer
//! function, edge-level constraint handling, and the worklist fixpoint.

pub mod constraint;
pub mod engine;
pub mod expr;
pub mod state;
pub mod transfer;

pub use constraint::{Constraint, ConstraintOrigin};
pub use engine::{worklist_solve, SolveResult, BUDGET_FACTOR};
pub use expr::{Atom, BoolExpr, CondFlag, Definition, NumExpr, SymExpr};
pub use state::{join_states, AbstractState};
pub use transfer::{edge_apply, eval, read_cell, transfer, transfer_instrs};

use crate::domain::DomainError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("fixpoint budget exceeded: {budget} processings over {labels} labels")]
    IterationBudgetExceeded { labels: u32, budget: u32 },
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("unsupported instruction: {0}")]
    Unsupported(String),
}
