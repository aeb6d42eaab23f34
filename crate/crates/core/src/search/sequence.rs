use std::collections::HashMap;

use super::{RelaxedPlan, State};
use crate::ground::Task;
use crate::macros::MacroOperator;

/// A macro kept as an operator sequence and applied step by step during search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceMacro {
    pub name: String,
    pub operators: Vec<String>,
    /// Variable index of each argument of each step.
    pub vars: Vec<Vec<usize>>,
    pub n_vars: usize,
}

impl SequenceMacro {
    pub fn from_macro(m: &MacroOperator) -> Self {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let vars = m
            .steps
            .iter()
            .map(|s| {
                s.args
                    .iter()
                    .map(|v| {
                        let n = index.len();
                        *index.entry(v.as_str()).or_insert(n)
                    })
                    .collect()
            })
            .collect();
        SequenceMacro {
            name: m.name(),
            operators: m.operator_names().into_iter().map(str::to_string).collect(),
            vars,
            n_vars: index.len(),
        }
    }
}

/// Ground actions instantiating one sequence macro.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacroInstance {
    pub macro_index: usize,
    pub actions: Vec<usize>,
}

/// Instantiations of `macros` whose every action lies in the relaxed plan,
/// with bindings consistent with the macro's variables and distinct variables
/// bound to distinct objects, and whose chain is applicable in `s`.
///
/// Ordered by macro, then by action ids.
pub fn helpful_macro_instantiations(
    task: &Task,
    s: &State,
    rp: &RelaxedPlan,
    macros: &[SequenceMacro],
) -> Vec<MacroInstance> {
    let mut out = Vec::new();
    if !rp.reachable() {
        return out;
    }
    for (mi, m) in macros.iter().enumerate() {
        let candidates: Vec<Vec<usize>> = m
            .operators
            .iter()
            .map(|op| rp.actions.iter().copied().filter(|&a| &task.actions[a].operator == op).collect())
            .collect();
        if candidates.iter().any(Vec::is_empty) {
            continue;
        }
        let mut binding: Vec<Option<&str>> = vec![None; m.n_vars];
        let mut chosen = Vec::new();
        extend(task, m, mi, &candidates, s, &mut binding, &mut chosen, &mut out);
    }
    out.dedup();
    out
}

#[allow(clippy::too_many_arguments)]
fn extend<'t>(
    task: &'t Task,
    m: &SequenceMacro,
    mi: usize,
    candidates: &[Vec<usize>],
    s: &State,
    binding: &mut Vec<Option<&'t str>>,
    chosen: &mut Vec<usize>,
    out: &mut Vec<MacroInstance>,
) {
    let i = chosen.len();
    if i == m.operators.len() {
        out.push(MacroInstance {
            macro_index: mi,
            actions: chosen.clone(),
        });
        return;
    }
    for &a in &candidates[i] {
        let act = &task.actions[a];
        if act.args.len() != m.vars[i].len() || !s.contains_all(&act.pre) {
            continue;
        }
        let saved = binding.clone();
        let mut ok = true;
        for (arg, &v) in act.args.iter().zip(&m.vars[i]) {
            match binding[v] {
                Some(b) if b == arg => {}
                Some(_) => ok = false,
                None if binding.contains(&Some(arg.as_str())) => ok = false,
                None => binding[v] = Some(arg.as_str()),
            }
            if !ok {
                break;
            }
        }
        if ok {
            let next = s.successor(act, &task.zobrist);
            chosen.push(a);
            extend(task, m, mi, candidates, &next, binding, chosen, out);
            chosen.pop();
        }
        *binding = saved;
    }
}
