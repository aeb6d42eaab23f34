//! Forward state-space search guided by a relaxed-plan heuristic.

mod closed;
mod open_list;
mod planner;
mod relaxed;
mod sequence;
mod state;

pub use closed::ClosedSet;
pub use open_list::BucketOpenList;
pub use planner::{
    format_plan, search, ExpansionMode, Limit, Plan, PlanStep, Planner, SearchConfig, SearchOutcome, SearchResult, SearchStats,
    Step,
};
pub use relaxed::{RelaxedPlan, RelaxedPlanner};
pub use sequence::{helpful_macro_instantiations, MacroInstance, SequenceMacro};
pub use state::{apply_action, apply_macro, ApplyError, State};
