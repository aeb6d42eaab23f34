//! Training and solving workflows on top of the planner and the macro learners.

mod embed;
mod macro_file;
mod report;
mod solve;
mod train;
mod validate;

use thiserror::Error;

pub use embed::{embed_macros, recover_macros, EnhancedDomain};
pub use macro_file::{MacroEntry, MacroFile, Method};
pub use report::{accuracy_csv, cost_csv, cost_rows, heuristic_accuracy, mean_abs_error, AccuracyRow, CostRow};
pub use solve::{prepare, solve_problem, Prepared, Setup, SolveReport, SolveStatus};
pub use train::{train_caed, train_solep, CaedTraining, SolepTraining, TrainingConfig};
pub use validate::{parse_plan, validate_plan, ValidationError};

use crate::abstraction::ClusterError;
use crate::ground::GroundError;
use crate::macros::MacroError;
use crate::pddl::PddlError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Pddl(#[from] PddlError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Macro(#[from] MacroError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("plan failed validation: {0}")]
    Validation(#[from] ValidationError),
    #[error("macro file line {line}: {msg}")]
    MacroFile { line: usize, msg: String },
    #[error("macro file is for domain {found}, expected {expected}")]
    MacroDomain { expected: String, found: String },
    #[error("invalid macro {0}")]
    InvalidMacro(String),
    #[error("no training problems given")]
    NoTrainingProblems,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
