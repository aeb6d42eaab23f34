use std::collections::BTreeMap;

use log::warn;

use super::PipelineError;
use crate::macros::{Invariants, MacroOperator, MacroStep, MACRO_SEPARATOR};
use crate::pddl::{macro_operators, Domain, Operator};

/// A domain whose compiled macro operators are known by name.
#[derive(Debug, Clone)]
pub struct EnhancedDomain {
    pub domain: Domain,
    /// Compiled macros keyed by their operator name in `domain`.
    pub macros: BTreeMap<String, MacroOperator>,
}

impl EnhancedDomain {
    pub fn plain(domain: Domain) -> Self {
        EnhancedDomain {
            domain,
            macros: BTreeMap::new(),
        }
    }

    /// The domain without its macro operators.
    pub fn base(&self) -> Domain {
        let mut d = self.domain.clone();
        d.operators.retain(|o| !self.macros.contains_key(&o.name));
        d
    }
}

/// Appends compiled `macros` to `dom` as operators.
pub fn embed_macros(dom: &Domain, macros: &[MacroOperator]) -> Result<EnhancedDomain, PipelineError> {
    let ops = macro_operators(dom, macros)?;
    let mut domain = dom.clone();
    let mut map = BTreeMap::new();
    for (op, m) in ops.into_iter().zip(macros) {
        map.insert(op.name.clone(), m.clone());
        domain.operators.push(op);
    }
    Ok(EnhancedDomain { domain, macros: map })
}

/// Operator names encoded in a macro action name, without a duplicate suffix.
fn split_name<'a>(name: &'a str, base: &Domain) -> Option<Vec<&'a str>> {
    let mut parts: Vec<&str> = name.split(MACRO_SEPARATOR).collect();
    if parts.len() > 2 && parts.last().is_some_and(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit())) {
        parts.pop();
    }
    (parts.len() >= 2 && parts.iter().all(|p| base.operator(p).is_some())).then_some(parts)
}

/// True when the compiled `cand` describes `op`: parameter types that admit
/// `op`'s in order, same preconditions and add effects, and no delete effect that the
/// plain step sequence lacks.
fn describes(cand: &MacroOperator, op: &Operator, base: &Domain) -> bool {
    if cand.params.len() != op.params.len() || cand.params.iter().zip(&op.params).any(|(a, b)| !base.hierarchy.is_subtype(&b.ty, &a.ty)) {
        return false;
    }
    let Ok(m) = cand.compile(base, &Invariants::none()) else {
        return false;
    };
    let body = m.compiled.expect("compiled");
    let set = |v: &[crate::pddl::Atom]| v.iter().cloned().collect::<std::collections::BTreeSet<_>>();
    body.pre_set() == set(&op.pre) && body.add_set() == set(&op.add) && set(&op.del).is_subset(&body.del_set())
}

/// Finds the step arguments of macro operator `op` whose operators are `names`.
/// Arguments are drawn from `op`'s parameters in order of first occurrence.
fn recover_one(op: &Operator, names: &[&str], base: &Domain) -> Option<MacroOperator> {
    let vars: Vec<&str> = op.params.iter().map(|p| p.name.as_str()).collect();
    let arities: Vec<usize> = names.iter().map(|n| base.operator(n).map_or(0, |o| o.params.len())).collect();
    let total: usize = arities.iter().sum();

    fn rec(
        k: usize,
        used: usize,
        flat: &mut Vec<usize>,
        total: usize,
        n_vars: usize,
        check: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == total {
            return used == n_vars && check(flat);
        }
        // The next argument reuses a variable or introduces the next one.
        for v in 0..=used.min(n_vars.saturating_sub(1)) {
            flat.push(v);
            let next_used = if v == used { used + 1 } else { used };
            if next_used <= n_vars && rec(k + 1, next_used, flat, total, n_vars, check) {
                return true;
            }
            flat.pop();
        }
        false
    }

    let mut found = None;
    let mut check = |flat: &[usize]| -> bool {
        let mut steps = Vec::new();
        let mut i = 0;
        for (n, &a) in names.iter().zip(&arities) {
            steps.push(MacroStep {
                operator: n.to_string(),
                args: flat[i..i + a].iter().map(|&v| vars[v].to_string()).collect(),
            });
            i += a;
        }
        match MacroOperator::from_steps(steps, base) {
            Ok(m) if describes(&m, op, base) => {
                let body = crate::macros::CompiledBody {
                    pre: op.pre.clone(),
                    add: op.add.clone(),
                    del: op.del.clone(),
                };
                found = Some(MacroOperator {
                    params: op.params.clone(),
                    steps: m.steps,
                    compiled: Some(body),
                });
                true
            }
            _ => false,
        }
    };
    rec(0, 0, &mut Vec::new(), total, vars.len(), &mut check);
    found
}

/// Recognizes macro operators in `dom` by their names and recovers their steps.
///
/// An operator whose name joins existing operator names with the macro
/// separator is a macro if some step binding reproduces its body. Operators
/// that only look like macros are kept as ordinary operators.
pub fn recover_macros(dom: Domain) -> EnhancedDomain {
    let mut base = dom.clone();
    base.operators.retain(|o| !o.name.contains(MACRO_SEPARATOR));
    let mut macros = BTreeMap::new();
    for op in dom.operators.iter().filter(|o| o.name.contains(MACRO_SEPARATOR)) {
        let recovered = split_name(&op.name, &base).and_then(|names| recover_one(op, &names, &base));
        match recovered {
            Some(m) => {
                macros.insert(op.name.clone(), m);
            }
            None => warn!("operator {} looks like a macro but matches no step sequence", op.name),
        }
    }
    EnhancedDomain { domain: dom, macros }
}
