//! Macro-operator learning for STRIPS planning.
//!
//! Two learners share one forward-search planner: one compiles macros found
//! by abstracting the static structure of a domain into new operators, the
//! other extracts two-step sequences from solved training problems and feeds
//! them to successor generation.

pub mod abstraction;
pub mod ground;
pub mod macros;
pub mod pddl;
pub mod ranking;
pub mod pipeline;
pub mod search;

/// Weight table over `f64`.
pub type WeightTableF64<K> = ranking::WeightTable<f64, K>;
/// Ranking parameters over `f64`.
pub type RankingParamsF64 = ranking::RankingParams<f64>;
