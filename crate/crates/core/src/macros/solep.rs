//! Two-action macros extracted from solution plans.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Composition, Invariants, MacroOperator, MacroStep};
use crate::pddl::{Domain, PlanAction};

/// Plan steps linked when consecutive steps interact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionGraph {
    pub steps: Vec<PlanAction>,
    /// `i` in `edges` links step `i` to step `i + 1`.
    pub edges: Vec<usize>,
}

/// Consecutive actions interact when they share an argument or either has none.
pub fn interact(a: &PlanAction, b: &PlanAction) -> bool {
    a.args.is_empty() || b.args.is_empty() || a.args.iter().any(|x| b.args.contains(x))
}

pub fn build_solution_graph(plan: &[PlanAction]) -> SolutionGraph {
    SolutionGraph {
        steps: plan.to_vec(),
        edges: (0..plan.len().saturating_sub(1))
            .filter(|&i| interact(&plan[i], &plan[i + 1]))
            .collect(),
    }
}

/// Replaces the constants of two consecutive actions by variables `?x0, ?x1, ...`
/// in order of first occurrence, keeping equal constants equal.
pub fn lift_pair(a: &PlanAction, b: &PlanAction) -> Vec<MacroStep> {
    let mut vars: HashMap<String, String> = HashMap::new();
    let mut lift = |act: &PlanAction| -> Vec<String> {
        act.args
            .iter()
            .map(|c| {
                let n = vars.len();
                vars.entry(c.clone()).or_insert_with(|| format!("?x{n}")).clone()
            })
            .collect()
    };
    let a_args = lift(a);
    let b_args = lift(b);
    vec![
        MacroStep {
            operator: a.name.clone(),
            args: a_args,
        },
        MacroStep {
            operator: b.name.clone(),
            args: b_args,
        },
    ]
}

/// A lifted two-action macro and how often it occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedMacro {
    pub macro_op: MacroOperator,
    pub occurrences: usize,
}

/// Operators of a macro must share a variable unless one of them has no parameters.
pub fn shares_variable(m: &MacroOperator) -> bool {
    m.steps.windows(2).all(|w| {
        w[0].args.is_empty() || w[1].args.is_empty() || w[0].args.iter().any(|x| w[1].args.contains(x))
    })
}

/// Rejects macros with a cycle: some prefix leaves the same net effects as a shorter one.
fn has_repetition(m: &MacroOperator, dom: &Domain, invariants: &Invariants) -> bool {
    let mut comp = Composition::default();
    let mut snaps = vec![(BTreeSet::new(), BTreeSet::new())];
    for i in 0..m.len() {
        let Ok((pre, add, del)) = m.step_atoms(i, dom) else {
            return true;
        };
        if comp.push(&pre, &add, &del).is_err() {
            return true;
        }
        let body = comp.body(invariants);
        let snap = (body.add_set(), body.del_set());
        if snaps.contains(&snap) {
            return true;
        }
        snaps.push(snap);
    }
    false
}

/// Extracts, lifts, merges and filters the macros of one plan.
///
/// Output is ordered by operator names, then by lifted variable structure.
pub fn extract_macros(plan: &[PlanAction], dom: &Domain) -> Vec<LiftedMacro> {
    let invariants = Invariants::synthesize(dom);
    let g = build_solution_graph(plan);
    let mut counts: BTreeMap<(Vec<String>, Vec<MacroStep>), usize> = BTreeMap::new();
    for &i in &g.edges {
        let steps = lift_pair(&g.steps[i], &g.steps[i + 1]);
        let names = steps.iter().map(|s| s.operator.clone()).collect();
        *counts.entry((names, steps)).or_default() += 1;
    }
    let mut out = Vec::new();
    for ((_, steps), occurrences) in counts {
        let Ok(m) = MacroOperator::from_steps(steps, dom) else {
            continue;
        };
        // Contradictory sequences fail to compose; cycles and unrelated pairs are dropped.
        if m.composition(dom).is_err() || has_repetition(&m, dom, &invariants) || !shares_variable(&m) {
            continue;
        }
        out.push(LiftedMacro { macro_op: m, occurrences });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifting_keeps_sharing_pattern() {
        let a = PlanAction::new("turn_to", ["sat0", "d1", "d0"]);
        let b = PlanAction::new("take_image", ["sat0", "d1", "i0", "m0"]);
        let steps = lift_pair(&a, &b);
        assert_eq!(steps[0].args, vec!["?x0", "?x1", "?x2"]);
        assert_eq!(steps[1].args, vec!["?x0", "?x1", "?x3", "?x4"]);
    }

    #[test]
    fn zero_argument_action_always_interacts() {
        let plan = vec![PlanAction::new("noop", Vec::<String>::new()), PlanAction::new("go", ["a"])];
        assert_eq!(build_solution_graph(&plan).edges, vec![0]);
        let plan = vec![PlanAction::new("go", ["a"]), PlanAction::new("go", ["b"])];
        assert!(build_solution_graph(&plan).edges.is_empty());
    }
}
