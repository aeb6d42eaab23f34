use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::pddl::{Atom, Domain, PlanAction, Problem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("step {step}: unknown operator {name}")]
    UnknownOperator { step: usize, name: String },
    #[error("step {step}: {name} takes {expected} arguments, got {found}")]
    Arity {
        step: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("step {step}: argument {arg} does not fit its parameter type {ty}")]
    ArgumentType { step: usize, arg: String, ty: String },
    #[error("step {step}: precondition {atom} is false")]
    Precondition { step: usize, atom: Atom },
    #[error("goal {atom} is false after the plan")]
    Goal { atom: Atom },
}

impl ValidationError {
    /// Index of the first violated step; `None` for a goal failure.
    pub fn step(&self) -> Option<usize> {
        match self {
            ValidationError::UnknownOperator { step, .. }
            | ValidationError::Arity { step, .. }
            | ValidationError::ArgumentType { step, .. }
            | ValidationError::Precondition { step, .. } => Some(*step),
            ValidationError::Goal { .. } => None,
        }
    }
}

/// Simulates `plan` from the initial state of `prob` over lifted operators,
/// checking types and preconditions at every step and the goal at the end.
pub fn validate_plan(dom: &Domain, prob: &Problem, plan: &[PlanAction]) -> Result<(), ValidationError> {
    let mut types: HashMap<&str, &str> = prob.object_types();
    for c in &dom.constants {
        types.insert(&c.name, &c.ty);
    }
    let mut state: BTreeSet<Atom> = prob.init.iter().cloned().collect();
    for (step, a) in plan.iter().enumerate() {
        let op = dom.operator(&a.name).ok_or_else(|| ValidationError::UnknownOperator {
            step,
            name: a.name.clone(),
        })?;
        if op.params.len() != a.args.len() {
            return Err(ValidationError::Arity {
                step,
                name: a.name.clone(),
                expected: op.params.len(),
                found: a.args.len(),
            });
        }
        let mut bind = HashMap::new();
        for (p, arg) in op.params.iter().zip(&a.args) {
            let ok = types.get(arg.as_str()).is_some_and(|t| dom.hierarchy.is_subtype(t, &p.ty));
            if !ok {
                return Err(ValidationError::ArgumentType {
                    step,
                    arg: arg.clone(),
                    ty: p.ty.clone(),
                });
            }
            bind.insert(p.name.clone(), arg.clone());
        }
        for pre in &op.pre {
            let atom = pre.substitute(&bind);
            if !state.contains(&atom) {
                return Err(ValidationError::Precondition { step, atom });
            }
        }
        for d in &op.del {
            state.remove(&d.substitute(&bind));
        }
        for e in &op.add {
            state.insert(e.substitute(&bind));
        }
    }
    match prob.goal.iter().find(|g| !state.contains(g)) {
        Some(g) => Err(ValidationError::Goal { atom: g.clone() }),
        None => Ok(()),
    }
}

/// Reads a plan: one `(name arg ...)` per action, optionally prefixed by `i:`
/// step labels; `;` starts a comment.
pub fn parse_plan(text: &str) -> Result<Vec<PlanAction>, crate::pddl::PddlError> {
    use crate::pddl::sexpr::{parse_all, Sexp};
    let items = parse_all(text).map_err(|e| crate::pddl::PddlError::Syntax {
        line: e.pos.line,
        col: e.pos.col,
        msg: e.msg,
    })?;
    let mut plan = Vec::new();
    for item in items {
        match &item {
            Sexp::Atom(a, p) if !a.ends_with(':') => {
                return Err(crate::pddl::PddlError::Syntax {
                    line: p.line,
                    col: p.col,
                    msg: format!("unexpected symbol {a}"),
                })
            }
            Sexp::Atom(..) => {}
            Sexp::List(xs, p) => {
                let syms: Option<Vec<&str>> = xs.iter().map(Sexp::as_atom).collect();
                match syms.as_deref() {
                    Some([name, args @ ..]) => plan.push(PlanAction::new(*name, args.iter().copied())),
                    _ => {
                        return Err(crate::pddl::PddlError::Syntax {
                            line: p.line,
                            col: p.col,
                            msg: "an action is a list of symbols".into(),
                        })
                    }
                }
            }
        }
    }
    Ok(plan)
}
