use std::collections::HashSet;

use super::State;
use crate::ground::{FactId, Task};

const UNREACHED: u32 = u32::MAX;

/// Relaxed plan extracted from the delete-free planning graph of one state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelaxedPlan {
    /// Distinct selected action ids, sorted.
    pub actions: Vec<usize>,
    /// Number of selected actions; `None` when the goal is relaxed-unreachable.
    pub h: Option<usize>,
    /// Facts marked as goals at the first layer during extraction.
    pub first_layer_goals: Vec<FactId>,
    /// Actions applicable in the state, by id.
    pub applicable: Vec<usize>,
    /// Actions applicable in the state that add a first-layer goal.
    pub helpful: Vec<usize>,
}

impl RelaxedPlan {
    pub fn reachable(&self) -> bool {
        self.h.is_some()
    }

    pub fn contains(&self, action: usize) -> bool {
        self.actions.binary_search(&action).is_ok()
    }
}

/// Scratch buffers reused across heuristic evaluations.
#[derive(Debug, Clone, Default)]
pub struct RelaxedPlanner {
    fact_layer: Vec<u32>,
    action_layer: Vec<u32>,
    remaining: Vec<usize>,
}

impl RelaxedPlanner {
    pub fn new(task: &Task) -> Self {
        RelaxedPlanner {
            fact_layer: vec![UNREACHED; task.n_facts()],
            action_layer: vec![UNREACHED; task.actions.len()],
            remaining: vec![0; task.actions.len()],
        }
    }

    /// Builds the relaxed planning graph from `s` and extracts a relaxed plan for `goal`.
    ///
    /// Each (sub)goal is achieved by an action one layer below its first
    /// appearance; among those the lowest action id wins.
    pub fn compute(&mut self, task: &Task, s: &State, goal: &[FactId]) -> RelaxedPlan {
        self.fact_layer.iter_mut().for_each(|x| *x = UNREACHED);
        self.action_layer.iter_mut().for_each(|x| *x = UNREACHED);
        for (a, r) in task.actions.iter().zip(self.remaining.iter_mut()) {
            *r = a.pre.len();
        }

        let mut frontier: Vec<FactId> = s.facts().collect();
        for &f in &frontier {
            self.fact_layer[f] = 0;
        }
        let mut applicable = Vec::new();
        let mut layer = 0u32;
        let mut scheduled: Vec<usize> = Vec::new();
        for (id, a) in task.actions.iter().enumerate() {
            if a.pre.is_empty() {
                self.action_layer[id] = 0;
                scheduled.push(id);
            }
        }
        loop {
            for &f in &frontier {
                for &a in &task.index.pre_of[f] {
                    self.remaining[a] -= 1;
                    if self.remaining[a] == 0 {
                        self.action_layer[a] = layer;
                        scheduled.push(a);
                    }
                }
            }
            if layer == 0 {
                applicable = scheduled.clone();
                applicable.sort_unstable();
            }
            if goal.iter().all(|&g| self.fact_layer[g] != UNREACHED) {
                break;
            }
            let mut next = Vec::new();
            for &a in &scheduled {
                for &f in &task.actions[a].add {
                    if self.fact_layer[f] == UNREACHED {
                        self.fact_layer[f] = layer + 1;
                        next.push(f);
                    }
                }
            }
            scheduled.clear();
            if next.is_empty() {
                return RelaxedPlan {
                    applicable,
                    ..RelaxedPlan::default()
                };
            }
            frontier = next;
            layer += 1;
        }

        // Backward extraction.
        let top = goal.iter().map(|&g| self.fact_layer[g]).max().unwrap_or(0) as usize;
        let mut goals_at: Vec<Vec<FactId>> = vec![Vec::new(); top + 1];
        let mut is_goal: HashSet<FactId> = HashSet::new();
        for &g in goal {
            if is_goal.insert(g) {
                goals_at[self.fact_layer[g] as usize].push(g);
            }
        }
        // (fact, layer) pairs made true by an already selected action.
        let mut marked: HashSet<(FactId, u32)> = HashSet::new();
        let mut selected: Vec<usize> = Vec::new();
        for i in (1..=top).rev() {
            let mut k = 0;
            while k < goals_at[i].len() {
                let g = goals_at[i][k];
                k += 1;
                if marked.contains(&(g, i as u32)) {
                    continue;
                }
                let achiever = task.index.add_of[g]
                    .iter()
                    .copied()
                    .find(|&a| self.action_layer[a] == i as u32 - 1)
                    .expect("a fact first reached at layer i has an achiever at layer i - 1");
                selected.push(achiever);
                for &f in &task.actions[achiever].add {
                    marked.insert((f, i as u32));
                    marked.insert((f, i as u32 - 1));
                }
                for &p in &task.actions[achiever].pre {
                    let l = self.fact_layer[p];
                    if l != 0 && !marked.contains(&(p, i as u32 - 1)) && is_goal.insert(p) {
                        goals_at[l as usize].push(p);
                    }
                }
            }
        }
        selected.sort_unstable();
        selected.dedup();
        let mut first_layer_goals = goals_at.get(1).cloned().unwrap_or_default();
        first_layer_goals.sort_unstable();
        let helpful = applicable
            .iter()
            .copied()
            .filter(|&a| task.actions[a].add.iter().any(|f| first_layer_goals.binary_search(f).is_ok()))
            .collect();
        RelaxedPlan {
            h: Some(selected.len()),
            actions: selected,
            first_layer_goals,
            applicable,
            helpful,
        }
    }
}
