use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::model::*;
use super::PddlError;
use crate::macros::MacroOperator;

fn typed(out: &mut String, params: &[Param]) {
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{} - {}", p.name, p.ty);
    }
}

fn conj(out: &mut String, pos: &[Atom], neg: &[Atom]) {
    out.push_str("(and");
    for a in pos {
        let _ = write!(out, " {a}");
    }
    for d in neg {
        let _ = write!(out, " (not {d})");
    }
    out.push(')');
}

fn action(out: &mut String, op: &Operator) {
    let _ = writeln!(out, "  (:action {}", op.name);
    out.push_str("    :parameters (");
    typed(out, &op.params);
    out.push_str(")\n    :precondition ");
    conj(out, &op.pre, &[]);
    out.push_str("\n    :effect ");
    conj(out, &op.add, &op.del);
    out.push_str(")\n");
}

/// Operators for `macros`, named so that none collides with an operator of `dom`
/// or with each other: repeated names get a numeric suffix.
///
/// Every macro must be compiled.
pub fn macro_operators(dom: &Domain, macros: &[MacroOperator]) -> Result<Vec<Operator>, PddlError> {
    let mut used: BTreeSet<String> = dom.operators.iter().map(|o| o.name.clone()).collect();
    let mut extra = Vec::new();
    for m in macros {
        let mut op = m
            .to_operator()
            .ok_or_else(|| PddlError::UncompiledMacro(m.name()))?;
        if dom.operator(&op.name).is_some() {
            return Err(PddlError::NameCollision(op.name));
        }
        if used.contains(&op.name) {
            let base = op.name.clone();
            let mut n = 2;
            while used.contains(&format!("{base}{}{n}", crate::macros::MACRO_SEPARATOR)) {
                n += 1;
            }
            op.name = format!("{base}{}{n}", crate::macros::MACRO_SEPARATOR);
        }
        used.insert(op.name.clone());
        extra.push(op);
    }
    Ok(extra)
}

/// Serializes `dom` with `macros` appended as extra actions after the original operators.
pub fn write_domain(dom: &Domain, macros: &[MacroOperator]) -> Result<String, PddlError> {
    let extra = macro_operators(dom, macros)?;

    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", dom.name);
    if !dom.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", dom.requirements.join(" "));
    }
    let declared: Vec<&String> = dom.hierarchy.types().iter().filter(|t| t.as_str() != ROOT_TYPE).collect();
    if !declared.is_empty() {
        out.push_str("  (:types");
        for t in declared {
            let _ = write!(out, " {t} - {}", dom.hierarchy.parent_of(t).unwrap_or(ROOT_TYPE));
        }
        out.push_str(")\n");
    }
    if !dom.constants.is_empty() {
        out.push_str("  (:constants ");
        typed(&mut out, &dom.constants);
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &dom.predicates {
        let _ = write!(out, "\n    ({}", p.name);
        if !p.params.is_empty() {
            out.push(' ');
            typed(&mut out, &p.params);
        }
        out.push(')');
    }
    out.push_str(")\n");
    for op in dom.operators.iter().chain(&extra) {
        action(&mut out, op);
    }
    out.push_str(")\n");
    Ok(out)
}

/// Serializes a problem; domain constants are not repeated as objects.
pub fn write_problem(prob: &Problem, dom: &Domain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", prob.name);
    let _ = writeln!(out, "  (:domain {})", prob.domain_name);
    let objects: Vec<Param> = prob
        .objects
        .iter()
        .filter(|o| !dom.constants.iter().any(|c| c.name == o.name))
        .cloned()
        .collect();
    out.push_str("  (:objects ");
    typed(&mut out, &objects);
    out.push_str(")\n  (:init");
    for f in &prob.init {
        let _ = write!(out, "\n    {f}");
    }
    out.push_str(")\n  (:goal ");
    conj(&mut out, &prob.goal, &[]);
    out.push_str("))\n");
    out
}
