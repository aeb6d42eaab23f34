use std::fmt;
use std::time::{Duration, Instant};

use log::debug;

use super::{apply_macro, helpful_macro_instantiations, BucketOpenList, ClosedSet, MacroInstance, RelaxedPlan, RelaxedPlanner, SequenceMacro, State};
use crate::ground::Task;
use crate::pddl::PlanAction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub time_limit: Option<Duration>,
    /// Estimated bytes held by stored states.
    pub memory_limit: Option<usize>,
    /// Maximum expanded nodes.
    pub node_limit: Option<usize>,
    /// Run hill climbing before the best-first search.
    pub use_ehc: bool,
    /// Compare full states, not only keys, in the closed set.
    pub verify_states: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            time_limit: Some(Duration::from_secs(1800)),
            memory_limit: Some(1024 * 1024 * 1024),
            node_limit: None,
            use_ehc: true,
            verify_states: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Time,
    Memory,
    Nodes,
}

impl fmt::Display for Limit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Limit::Time => "time limit",
            Limit::Memory => "memory limit",
            Limit::Nodes => "node limit",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expanded: usize,
    pub evaluated: usize,
    pub generated: usize,
    pub elapsed: Duration,
    /// Hill climbing ran and failed, so best-first search took over.
    pub fallback: bool,
}

/// One search transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Action(usize),
    Macro(MacroInstance),
}

/// A primitive plan action, tagged with the macro it was produced by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub action: PlanAction,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Plan {
    pub steps: Vec<Step>,
}

impl Plan {
    /// Ground actions in order, with sequence macros unfolded. Compiled macro actions stay whole.
    pub fn domain_actions(&self) -> Vec<usize> {
        self.steps
            .iter()
            .flat_map(|s| match s {
                Step::Action(a) => vec![*a],
                Step::Macro(m) => m.actions.clone(),
            })
            .collect()
    }

    /// The plan as primitive actions.
    pub fn primitives(&self, task: &Task, macros: &[SequenceMacro]) -> Vec<PlanStep> {
        let mut out = Vec::new();
        let mut push = |a: usize, source: Option<&str>| {
            let act = &task.actions[a];
            if act.is_macro {
                let src = source.unwrap_or(&act.operator);
                out.extend(act.primitive_expansion.iter().map(|p| PlanStep {
                    action: p.clone(),
                    source: Some(src.to_string()),
                }));
            } else {
                out.push(PlanStep {
                    action: act.plan_action(),
                    source: source.map(str::to_string),
                });
            }
        };
        for s in &self.steps {
            match s {
                Step::Action(a) => push(*a, None),
                Step::Macro(m) => {
                    for &a in &m.actions {
                        push(a, Some(&macros[m.macro_index].name));
                    }
                }
            }
        }
        out
    }

    pub fn primitive_len(&self, task: &Task) -> usize {
        self.domain_actions().iter().map(|&a| task.actions[a].primitive_len()).sum()
    }
}

/// One line per primitive action: `i: (name args)`, with macro sources as trailing comments.
pub fn format_plan(steps: &[PlanStep]) -> String {
    let mut s = String::new();
    for (i, st) in steps.iter().enumerate() {
        s.push_str(&format!("{i}: {}", st.action));
        if let Some(src) = &st.source {
            s.push_str(&format!(" ; macro {src}"));
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Solved(Plan),
    Unsolvable,
    ResourceLimit(Limit),
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionMode {
    /// Helpful primitives only.
    HillClimbing,
    /// All applicable primitives.
    BestFirst,
}

struct Node {
    state: State,
    parent: usize,
    step: Option<Step>,
    rp: Option<RelaxedPlan>,
}

const ROOT: usize = usize::MAX;

fn path(nodes: &[Node], mut i: usize) -> Vec<Step> {
    let mut steps = Vec::new();
    while i != ROOT {
        if let Some(s) = &nodes[i].step {
            steps.push(s.clone());
        }
        i = nodes[i].parent;
    }
    steps.reverse();
    steps
}

/// Forward search for one task. Single-threaded; the task is only read.
pub struct Planner<'t> {
    task: &'t Task,
    macros: &'t [SequenceMacro],
    config: SearchConfig,
    relaxed: RelaxedPlanner,
    stats: SearchStats,
    start: Instant,
    stored: usize,
}

impl<'t> Planner<'t> {
    pub fn new(task: &'t Task, macros: &'t [SequenceMacro], config: SearchConfig) -> Self {
        Planner {
            task,
            macros,
            config,
            relaxed: RelaxedPlanner::new(task),
            stats: SearchStats::default(),
            start: Instant::now(),
            stored: 0,
        }
    }

    pub fn initial_state(&self) -> State {
        State::new(&self.task.init, self.task.n_facts(), &self.task.zobrist)
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn is_goal(&self, s: &State) -> bool {
        s.contains_all(&self.task.goal)
    }

    pub fn evaluate(&mut self, s: &State) -> RelaxedPlan {
        self.stats.evaluated += 1;
        self.relaxed.compute(self.task, s, &self.task.goal)
    }

    /// Successors of `s`: helpful macro instantiations first, then primitive actions.
    pub fn expand(&self, s: &State, rp: &RelaxedPlan, mode: ExpansionMode) -> Vec<(Step, State)> {
        let zt = &self.task.zobrist;
        let mut out = Vec::new();
        if !self.macros.is_empty() {
            for inst in helpful_macro_instantiations(self.task, s, rp, self.macros) {
                let acts: Vec<_> = inst.actions.iter().map(|&a| &self.task.actions[a]).collect();
                let next = apply_macro(s, &acts, zt).expect("helpful instantiations are chain-applicable");
                out.push((Step::Macro(inst), next));
            }
        }
        let prims = match mode {
            ExpansionMode::HillClimbing => &rp.helpful,
            ExpansionMode::BestFirst => &rp.applicable,
        };
        for &a in prims {
            out.push((Step::Action(a), s.successor(&self.task.actions[a], zt)));
        }
        out
    }

    fn check_limits(&mut self) -> Result<(), Limit> {
        self.stats.elapsed = self.start.elapsed();
        if self.config.time_limit.is_some_and(|t| self.stats.elapsed > t) {
            return Err(Limit::Time);
        }
        if self.config.node_limit.is_some_and(|n| self.stats.expanded > n) {
            return Err(Limit::Nodes);
        }
        let state_bytes = self.initial_state().bytes() + 48;
        if self.config.memory_limit.is_some_and(|m| self.stored.saturating_mul(state_bytes) > m) {
            return Err(Limit::Memory);
        }
        Ok(())
    }

    fn closed(&self) -> ClosedSet {
        if self.config.verify_states {
            ClosedSet::verifying()
        } else {
            ClosedSet::new()
        }
    }

    /// Greedy descent with breadth-first plateau escape over helpful successors.
    /// `Ok(None)` means the climb got stuck.
    pub fn enhanced_hill_climbing(&mut self) -> Result<Option<Plan>, Limit> {
        let mut cur = self.initial_state();
        if self.is_goal(&cur) {
            return Ok(Some(Plan::default()));
        }
        let mut cur_rp = self.evaluate(&cur);
        let Some(mut h) = cur_rp.h else {
            return Ok(None);
        };
        let mut plan = Vec::new();
        loop {
            let mut nodes = vec![Node {
                state: cur.clone(),
                parent: ROOT,
                step: None,
                rp: Some(cur_rp.clone()),
            }];
            let mut seen = self.closed();
            seen.insert(&cur);
            let mut head = 0;
            let mut better: Option<(usize, RelaxedPlan, usize)> = None;
            'plateau: while head < nodes.len() {
                self.check_limits()?;
                self.stats.expanded += 1;
                let rp = nodes[head].rp.take().expect("queued nodes carry their relaxed plan");
                let succ = self.expand(&nodes[head].state, &rp, ExpansionMode::HillClimbing);
                for (step, next) in succ {
                    self.stats.generated += 1;
                    if !seen.insert(&next) {
                        continue;
                    }
                    let goal = self.is_goal(&next);
                    let next_rp = if goal { RelaxedPlan { h: Some(0), ..RelaxedPlan::default() } } else { self.evaluate(&next) };
                    let Some(hn) = next_rp.h else { continue };
                    nodes.push(Node {
                        state: next,
                        parent: head,
                        step: Some(step),
                        rp: Some(next_rp),
                    });
                    self.stored += 1;
                    if hn < h {
                        let idx = nodes.len() - 1;
                        let rp = nodes[idx].rp.take().unwrap_or_default();
                        better = Some((idx, rp, hn));
                        break 'plateau;
                    }
                }
                head += 1;
            }
            self.stored = 0;
            let Some((idx, rp, hn)) = better else {
                debug!("hill climbing stuck at h = {h}");
                return Ok(None);
            };
            plan.extend(path(&nodes, idx));
            if hn == 0 {
                // h = 0 only at goal states: every goal fact lies in layer 0.
                return Ok(Some(Plan { steps: plan }));
            }
            cur = nodes.swap_remove(idx).state;
            cur_rp = rp;
            h = hn;
        }
    }

    /// Greedy best-first search on h over all applicable successors.
    /// `Ok(None)` means the reachable space was exhausted.
    pub fn best_first_search(&mut self) -> Result<Option<Plan>, Limit> {
        let init = self.initial_state();
        if self.is_goal(&init) {
            return Ok(Some(Plan::default()));
        }
        let rp = self.evaluate(&init);
        let Some(h0) = rp.h else {
            return Ok(None);
        };
        let mut closed = self.closed();
        closed.insert(&init);
        let mut nodes = vec![Node {
            state: init,
            parent: ROOT,
            step: None,
            rp: Some(rp),
        }];
        let mut open = BucketOpenList::new();
        open.push(h0, 0usize);
        while let Some((_, i)) = open.pop() {
            self.check_limits()?;
            self.stats.expanded += 1;
            let rp = nodes[i].rp.take().expect("open nodes carry their relaxed plan");
            let succ = self.expand(&nodes[i].state, &rp, ExpansionMode::BestFirst);
            for (step, next) in succ {
                self.stats.generated += 1;
                if !closed.insert(&next) {
                    continue;
                }
                if self.is_goal(&next) {
                    nodes.push(Node {
                        state: next,
                        parent: i,
                        step: Some(step),
                        rp: None,
                    });
                    return Ok(Some(Plan {
                        steps: path(&nodes, nodes.len() - 1),
                    }));
                }
                let next_rp = self.evaluate(&next);
                // Relaxed-unreachable states are dead ends.
                let Some(hn) = next_rp.h else { continue };
                nodes.push(Node {
                    state: next,
                    parent: i,
                    step: Some(step),
                    rp: Some(next_rp),
                });
                self.stored = nodes.len();
                open.push(hn, nodes.len() - 1);
            }
        }
        Ok(None)
    }

    /// Hill climbing, then best-first search if the climb fails.
    pub fn solve(mut self) -> SearchResult {
        let outcome = self.run();
        self.stats.elapsed = self.start.elapsed();
        SearchResult {
            outcome,
            stats: self.stats,
        }
    }

    fn run(&mut self) -> SearchOutcome {
        if self.task.static_goal_violated {
            return SearchOutcome::Unsolvable;
        }
        if self.config.use_ehc {
            match self.enhanced_hill_climbing() {
                Ok(Some(p)) => return SearchOutcome::Solved(p),
                Ok(None) => self.stats.fallback = true,
                Err(l) => return SearchOutcome::ResourceLimit(l),
            }
        }
        match self.best_first_search() {
            Ok(Some(p)) => SearchOutcome::Solved(p),
            Ok(None) => SearchOutcome::Unsolvable,
            Err(l) => SearchOutcome::ResourceLimit(l),
        }
    }
}

/// Solves `task` with the given sequence macros.
pub fn search(task: &Task, macros: &[SequenceMacro], config: SearchConfig) -> SearchResult {
    Planner::new(task, macros, config).solve()
}
