use std::fmt;

use super::{validate_plan, EnhancedDomain, PipelineError};
use crate::ground::{ground, GroundingOptions, Task};
use crate::macros::MacroOperator;
use crate::pddl::{Domain, PlanAction, Problem};
use crate::search::{search, Limit, PlanStep, RelaxedPlanner, SearchConfig, SearchOutcome, SearchStats, SequenceMacro, State};

/// Which macros a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setup {
    /// No macros.
    Baseline,
    /// Compiled macros of an enhanced domain.
    Compiled,
    /// Sequence macros on the plain domain.
    Sequence,
    /// Sequence macros on an enhanced domain.
    Combined,
}

impl Setup {
    pub const ALL: [Setup; 4] = [Setup::Baseline, Setup::Compiled, Setup::Sequence, Setup::Combined];

    pub fn from_number(n: u8) -> Option<Setup> {
        Setup::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn uses_compiled(self) -> bool {
        matches!(self, Setup::Compiled | Setup::Combined)
    }

    pub fn uses_sequences(self) -> bool {
        matches!(self, Setup::Sequence | Setup::Combined)
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "setup{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    Unsolvable,
    ResourceLimit(Limit),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Primitive plan, tagged with macro sources.
    pub plan: Vec<PlanStep>,
    /// Plan in domain-level actions: compiled macros count once, sequence macros unfold.
    pub domain_plan: Vec<PlanAction>,
    pub stats: SearchStats,
    pub ground_actions: usize,
    /// Heuristic value of the initial state; `None` when relaxed-unreachable.
    pub h_init: Option<usize>,
}

impl SolveReport {
    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Solved
    }

    pub fn primitive_plan(&self) -> Vec<PlanAction> {
        self.plan.iter().map(|s| s.action.clone()).collect()
    }
}

/// A grounded task ready for search under one setup.
pub struct Prepared {
    pub domain: Domain,
    pub task: Task,
    pub sequences: Vec<SequenceMacro>,
}

/// Grounds `prob` for `setup`: compiled macros only when the setup uses them,
/// sequence macros only when it uses those.
pub fn prepare(
    ed: &EnhancedDomain,
    prob: &Problem,
    setup: Setup,
    sequences: &[MacroOperator],
) -> Result<Prepared, PipelineError> {
    let (domain, compiled) = if setup.uses_compiled() {
        (ed.domain.clone(), ed.macros.clone())
    } else {
        (ed.base(), Default::default())
    };
    let seqs = if setup.uses_sequences() { sequences } else { &[] };
    for m in seqs {
        for name in m.operator_names() {
            if domain.operator(name).is_none() {
                return Err(PipelineError::InvalidMacro(format!("{m}: unknown operator {name}")));
            }
        }
    }
    let opts = GroundingOptions {
        macros: compiled,
        ..GroundingOptions::default()
    };
    let task = ground(&domain, prob, &opts)?;
    Ok(Prepared {
        domain,
        task,
        sequences: seqs.iter().map(SequenceMacro::from_macro).collect(),
    })
}

/// Solves `prob` under `setup` and validates any plan against the primitive operators.
pub fn solve_problem(
    ed: &EnhancedDomain,
    prob: &Problem,
    setup: Setup,
    sequences: &[MacroOperator],
    config: &SearchConfig,
) -> Result<SolveReport, PipelineError> {
    let p = prepare(ed, prob, setup, sequences)?;
    let init = State::new(&p.task.init, p.task.n_facts(), &p.task.zobrist);
    let h_init = RelaxedPlanner::new(&p.task).compute(&p.task, &init, &p.task.goal).h;
    let result = search(&p.task, &p.sequences, config.clone());
    let mut report = SolveReport {
        status: SolveStatus::Unsolvable,
        plan: Vec::new(),
        domain_plan: Vec::new(),
        stats: result.stats,
        ground_actions: p.task.actions.len(),
        h_init,
    };
    match result.outcome {
        SearchOutcome::Solved(plan) => {
            report.status = SolveStatus::Solved;
            report.plan = plan.primitives(&p.task, &p.sequences);
            report.domain_plan = plan.domain_actions().iter().map(|&a| p.task.actions[a].plan_action()).collect();
            validate_plan(&p.domain, prob, &report.primitive_plan())?;
        }
        SearchOutcome::Unsolvable => {}
        SearchOutcome::ResourceLimit(l) => report.status = SolveStatus::ResourceLimit(l),
    }
    Ok(report)
}
