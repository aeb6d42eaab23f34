use std::collections::{BTreeMap, HashMap};

use super::model::*;
use crate::macros::{CompiledBody, MacroOperator, MacroStep};

/// Separator between a declared name and the atomic types of its specialization.
const SPECIALIZATION_SEPARATOR: char = '~';

fn product(choices: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<String>| {
                c.iter().map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Name of the specialization of `pred` for arguments of the given atomic types,
/// or `None` if some type does not fit the declaration.
pub fn specialized_name(pred: &Predicate, hierarchy: &TypeHierarchy, arg_types: &[&str]) -> Option<String> {
    if pred.params.len() != arg_types.len() {
        return None;
    }
    let mut name = pred.name.clone();
    for (p, t) in pred.params.iter().zip(arg_types) {
        if !hierarchy.is_subtype(t, &p.ty) {
            return None;
        }
        if !hierarchy.is_atomic(&p.ty) {
            name.push(SPECIALIZATION_SEPARATOR);
            name.push_str(t);
        }
    }
    Some(name)
}

/// Renames a problem fact to the matching specialized predicate of the flattened domain.
/// Facts over unknown predicates or objects are returned unchanged.
pub fn specialize_fact(original: &Domain, prob: &Problem, fact: &Atom) -> Atom {
    let Some(pred) = original.predicate(&fact.predicate) else {
        return fact.clone();
    };
    let types: Option<Vec<&str>> = fact.args.iter().map(|a| prob.object_type(a)).collect();
    match types.and_then(|ts| specialized_name(pred, &original.hierarchy, &ts)) {
        Some(name) => Atom {
            predicate: name,
            args: fact.args.clone(),
        },
        None => fact.clone(),
    }
}

/// Applies [`specialize_fact`] to the initial state and the goal.
pub fn specialize_problem(original: &Domain, prob: &Problem) -> Problem {
    Problem {
        init: prob.init.iter().map(|f| specialize_fact(original, prob, f)).collect(),
        goal: prob.goal.iter().map(|f| specialize_fact(original, prob, f)).collect(),
        ..prob.clone()
    }
}

/// Replaces every predicate and operator with its specializations over atomic types.
pub fn flatten_types(dom: &Domain) -> Domain {
    let h = &dom.hierarchy;
    let mut provenance = dom.provenance.clone();
    let mut predicates = Vec::new();
    for p in &dom.predicates {
        let choices: Vec<Vec<String>> = p.params.iter().map(|q| h.atomic_subtypes(&q.ty)).collect();
        for types in product(&choices) {
            let refs: Vec<&str> = types.iter().map(String::as_str).collect();
            let name = specialized_name(p, h, &refs).expect("atomic subtypes fit their declaration");
            if name != p.name {
                provenance.predicates.insert(name.clone(), dom.original_predicate(&p.name).to_string());
            }
            predicates.push(Predicate {
                name,
                params: p.params.iter().zip(types).map(|(q, t)| Param::new(q.name.clone(), t)).collect(),
            });
        }
    }
    let constant_types: HashMap<&str, &str> = dom.constants.iter().map(|c| (c.name.as_str(), c.ty.as_str())).collect();
    let mut operators = Vec::new();
    for op in &dom.operators {
        let choices: Vec<Vec<String>> = op.params.iter().map(|q| h.atomic_subtypes(&q.ty)).collect();
        'spec: for types in product(&choices) {
            let var_types: HashMap<&str, &str> = op
                .params
                .iter()
                .zip(&types)
                .map(|(q, t)| (q.name.as_str(), t.as_str()))
                .collect();
            let rename = |atoms: &[Atom]| -> Option<Vec<Atom>> {
                atoms
                    .iter()
                    .map(|a| {
                        let pred = dom.predicate(&a.predicate)?;
                        let ts: Option<Vec<&str>> = a
                            .args
                            .iter()
                            .map(|x| var_types.get(x.as_str()).or_else(|| constant_types.get(x.as_str())).copied())
                            .collect();
                        Some(Atom {
                            predicate: specialized_name(pred, h, &ts?)?,
                            args: a.args.clone(),
                        })
                    })
                    .collect()
            };
            let (Some(pre), Some(add), Some(del)) = (rename(&op.pre), rename(&op.add), rename(&op.del)) else {
                // Some atom has no specialization for these types; the instance can never apply.
                continue 'spec;
            };
            let mut name = op.name.clone();
            for (q, t) in op.params.iter().zip(&types) {
                if !h.is_atomic(&q.ty) {
                    name.push(SPECIALIZATION_SEPARATOR);
                    name.push_str(t);
                }
            }
            if name != op.name {
                provenance.operators.insert(name.clone(), dom.original_operator(&op.name).to_string());
            }
            operators.push(Operator {
                name,
                params: op.params.iter().zip(&types).map(|(q, t)| Param::new(q.name.clone(), t.clone())).collect(),
                pre,
                add,
                del,
            });
        }
    }
    Domain {
        name: dom.name.clone(),
        requirements: dom.requirements.clone(),
        hierarchy: dom.hierarchy.clone(),
        constants: dom.constants.clone(),
        predicates,
        operators,
        flattened: true,
        provenance,
    }
}

fn to_original(m: &MacroOperator, flat: &Domain) -> MacroOperator {
    let atoms = |v: &[Atom]| -> Vec<Atom> {
        v.iter()
            .map(|a| Atom {
                predicate: flat.original_predicate(&a.predicate).to_string(),
                args: a.args.clone(),
            })
            .collect()
    };
    MacroOperator {
        params: m.params.clone(),
        steps: m
            .steps
            .iter()
            .map(|s| MacroStep {
                operator: flat.original_operator(&s.operator).to_string(),
                args: s.args.clone(),
            })
            .collect(),
        compiled: m.compiled.as_ref().map(|c| CompiledBody {
            pre: atoms(&c.pre),
            add: atoms(&c.add),
            del: atoms(&c.del),
        }),
    }
    .canonical()
}

/// Merges low-level macro variants back into macros over hierarchical types.
///
/// Variants that agree everywhere except the type of one parameter are merged
/// into the common parent type once they cover every child of that parent.
/// Merging repeats until no group can be merged, so multi-level hierarchies
/// collapse step by step. The root type is never introduced.
pub fn restore_hierarchy(macros: &[MacroOperator], flat: &Domain) -> Vec<MacroOperator> {
    let h = &flat.hierarchy;
    let mut current: Vec<MacroOperator> = Vec::new();
    for m in macros {
        let o = to_original(m, flat);
        if !current.contains(&o) {
            current.push(o);
        }
    }
    loop {
        let mut merged_any = false;
        let width = current.iter().map(|m| m.params.len()).max().unwrap_or(0);
        for pos in 0..width {
            // Group by everything except the type at `pos`.
            let mut groups: BTreeMap<MacroOperator, Vec<usize>> = BTreeMap::new();
            for (i, m) in current.iter().enumerate() {
                if pos < m.params.len() {
                    let mut key = m.clone();
                    key.params[pos].ty.clear();
                    groups.entry(key).or_default().push(i);
                }
            }
            let mut remove = Vec::new();
            let mut add = Vec::new();
            for (key, members) in groups {
                let types: Vec<&str> = members.iter().map(|&i| current[i].params[pos].ty.as_str()).collect();
                let mut parents: Vec<&str> = types.iter().filter_map(|t| h.parent_of(t)).collect();
                parents.sort();
                parents.dedup();
                for parent in parents {
                    if parent == ROOT_TYPE {
                        continue;
                    }
                    let children: Vec<&str> = h.children(parent).collect();
                    if children.iter().all(|c| types.contains(c)) {
                        for &i in &members {
                            if children.contains(&current[i].params[pos].ty.as_str()) {
                                remove.push(i);
                            }
                        }
                        let mut m = key.clone();
                        m.params[pos].ty = parent.to_string();
                        add.push(m);
                    }
                }
            }
            if !add.is_empty() {
                merged_any = true;
                let mut next: Vec<MacroOperator> = current
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !remove.contains(i))
                    .map(|(_, m)| m.clone())
                    .collect();
                for m in add {
                    if !next.contains(&m) {
                        next.push(m);
                    }
                }
                current = next;
                break;
            }
        }
        if !merged_any {
            return current;
        }
    }
}
