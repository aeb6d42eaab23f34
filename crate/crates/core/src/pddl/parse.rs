use std::collections::{BTreeSet, HashMap, HashSet};

use super::model::*;
use super::sexpr::{parse_all, Pos, Sexp};
use super::PddlError;

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing"];

/// Constructs outside the STRIPS + typing subset.
const UNSUPPORTED_FORMULAS: &[&str] = &[
    "not", "or", "imply", "forall", "exists", "when", "=", "increase", "decrease", "assign",
    "either", "preference",
];

fn syntax(pos: Pos, msg: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn unsupported(pos: Pos, what: impl Into<String>) -> PddlError {
    PddlError::Unsupported {
        line: pos.line,
        col: pos.col,
        construct: what.into(),
    }
}

fn expect_atom<'a>(e: &'a Sexp, what: &str) -> Result<&'a str, PddlError> {
    e.as_atom().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

fn expect_list<'a>(e: &'a Sexp, what: &str) -> Result<&'a [Sexp], PddlError> {
    e.as_list().ok_or_else(|| syntax(e.pos(), format!("expected {what}")))
}

/// Parses `a b - t c` into `[(a,t), (b,t), (c,object)]`.
fn typed_list(items: &[Sexp]) -> Result<Vec<(String, String, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if item.as_list().is_some() {
            return Err(unsupported(item.pos(), "either-type"));
        }
        let s = expect_atom(item, "name")?;
        if s == "-" {
            let ty = items
                .get(i + 1)
                .ok_or_else(|| syntax(item.pos(), "missing type after '-'"))?;
            if ty.head() == Some("either") {
                return Err(unsupported(ty.pos(), "either"));
            }
            let ty = expect_atom(ty, "type name")?;
            for (n, p) in pending.drain(..) {
                out.push((n, ty.to_string(), p));
            }
            i += 2;
        } else {
            pending.push((s.to_string(), item.pos()));
            i += 1;
        }
    }
    for (n, p) in pending {
        out.push((n, ROOT_TYPE.to_string(), p));
    }
    Ok(out)
}

fn check_requirements(items: &[Sexp]) -> Result<Vec<String>, PddlError> {
    let mut reqs = Vec::new();
    for r in items {
        let s = expect_atom(r, "requirement")?;
        if !SUPPORTED_REQUIREMENTS.contains(&s) {
            return Err(unsupported(r.pos(), s));
        }
        reqs.push(s.to_string());
    }
    Ok(reqs)
}

/// Collects the atoms of a conjunction; `negatives` receives `(not ...)` atoms when allowed.
fn conjunction(
    e: &Sexp,
    mut negatives: Option<&mut Vec<(Atom, Pos)>>,
    out: &mut Vec<(Atom, Pos)>,
) -> Result<(), PddlError> {
    let items = expect_list(e, "formula")?;
    if items.is_empty() {
        return Ok(());
    }
    let head = expect_atom(&items[0], "formula head")?;
    match head {
        "and" => {
            for sub in &items[1..] {
                conjunction(sub, negatives.as_deref_mut(), out)?;
            }
            Ok(())
        }
        "not" => match negatives {
            Some(neg) => {
                if items.len() != 2 {
                    return Err(syntax(e.pos(), "'not' takes one argument"));
                }
                let mut inner = Vec::new();
                let inner_e = &items[1];
                if inner_e.head() == Some("=") {
                    return Err(unsupported(inner_e.pos(), "="));
                }
                conjunction(inner_e, None, &mut inner)?;
                if inner.len() != 1 {
                    return Err(unsupported(inner_e.pos(), "compound negation"));
                }
                neg.push(inner.pop().unwrap());
                Ok(())
            }
            None => Err(unsupported(e.pos(), "negative precondition")),
        },
        h if UNSUPPORTED_FORMULAS.contains(&h) => Err(unsupported(e.pos(), h)),
        pred => {
            let args = items[1..]
                .iter()
                .map(|a| expect_atom(a, "argument").map(str::to_string))
                .collect::<Result<Vec<_>, _>>()?;
            out.push((Atom::new(pred, args), e.pos()));
            Ok(())
        }
    }
}

struct DomainBuilder {
    dom: Domain,
}

impl DomainBuilder {
    fn check_type(&self, ty: &str, pos: Pos) -> Result<(), PddlError> {
        if self.dom.hierarchy.contains(ty) {
            Ok(())
        } else {
            Err(PddlError::Undeclared {
                kind: "type",
                name: ty.to_string(),
                line: pos.line,
                col: pos.col,
            })
        }
    }

    fn check_atom(&self, atom: &Atom, pos: Pos, vars: &HashMap<String, String>) -> Result<(), PddlError> {
        let pred = self.dom.predicate(&atom.predicate).ok_or_else(|| PddlError::Undeclared {
            kind: "predicate",
            name: atom.predicate.clone(),
            line: pos.line,
            col: pos.col,
        })?;
        if pred.arity() != atom.args.len() {
            return Err(PddlError::Arity {
                predicate: atom.predicate.clone(),
                expected: pred.arity(),
                found: atom.args.len(),
                line: pos.line,
                col: pos.col,
            });
        }
        for a in &atom.args {
            let known = if a.starts_with('?') {
                vars.contains_key(a)
            } else {
                self.dom.constants.iter().any(|c| &c.name == a)
            };
            if !known {
                return Err(PddlError::Undeclared {
                    kind: if a.starts_with('?') { "variable" } else { "constant" },
                    name: a.clone(),
                    line: pos.line,
                    col: pos.col,
                });
            }
        }
        Ok(())
    }

    fn action(&mut self, items: &[Sexp], pos: Pos) -> Result<(), PddlError> {
        let name = expect_atom(items.get(1).ok_or_else(|| syntax(pos, "missing action name"))?, "action name")?;
        if self.dom.operator(name).is_some() {
            return Err(PddlError::NameCollision(name.to_string()));
        }
        let mut params = Vec::new();
        let mut pre = Vec::new();
        let mut eff_add = Vec::new();
        let mut eff_del = Vec::new();
        let mut i = 2;
        while i < items.len() {
            let key = expect_atom(&items[i], "action keyword")?;
            let val = items
                .get(i + 1)
                .ok_or_else(|| syntax(items[i].pos(), format!("missing value for {key}")))?;
            match key {
                ":parameters" => {
                    for (n, t, p) in typed_list(expect_list(val, "parameter list")?)? {
                        if !n.starts_with('?') {
                            return Err(syntax(p, format!("parameter {n} must start with '?'")));
                        }
                        self.check_type(&t, p)?;
                        if params.iter().any(|q: &Param| q.name == n) {
                            return Err(syntax(p, format!("duplicate parameter {n}")));
                        }
                        params.push(Param::new(n, t));
                    }
                }
                ":precondition" => conjunction(val, None, &mut pre)?,
                ":effect" => conjunction(val, Some(&mut eff_del), &mut eff_add)?,
                other => return Err(unsupported(items[i].pos(), other)),
            }
            i += 2;
        }
        let vars: HashMap<String, String> = params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
        for (a, p) in pre.iter().chain(&eff_add).chain(&eff_del) {
            self.check_atom(a, *p, &vars)?;
        }
        let dedup = |v: Vec<(Atom, Pos)>| -> Vec<Atom> {
            let mut seen = HashSet::new();
            v.into_iter().map(|(a, _)| a).filter(|a| seen.insert(a.clone())).collect()
        };
        let add = dedup(eff_add);
        let add_set: HashSet<&Atom> = add.iter().collect();
        // An atom both added and deleted ends up true; keep it only as an add effect.
        let del: Vec<Atom> = dedup(eff_del).into_iter().filter(|d| !add_set.contains(d)).collect();
        self.dom.operators.push(Operator {
            name: name.to_string(),
            params,
            pre: dedup(pre),
            add,
            del,
        });
        Ok(())
    }
}

/// Parses a STRIPS domain restricted to the `:strips :typing` requirements.
pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let exprs = parse_all(text).map_err(|e| syntax(e.pos, e.msg))?;
    let top = exprs.first().ok_or_else(|| syntax(Pos { line: 1, col: 1 }, "empty input"))?;
    if exprs.len() > 1 {
        return Err(syntax(exprs[1].pos(), "trailing input after domain"));
    }
    let items = expect_list(top, "(define ...)")?;
    if items.first().and_then(Sexp::as_atom) != Some("define") {
        return Err(syntax(top.pos(), "expected 'define'"));
    }
    let header = items.get(1).ok_or_else(|| syntax(top.pos(), "missing domain header"))?;
    let name = match header.as_list() {
        Some([kw, n]) if kw.as_atom() == Some("domain") => expect_atom(n, "domain name")?,
        _ => return Err(syntax(header.pos(), "expected (domain NAME)")),
    };
    let mut b = DomainBuilder {
        dom: Domain {
            name: name.to_string(),
            requirements: Vec::new(),
            hierarchy: TypeHierarchy::new(),
            constants: Vec::new(),
            predicates: Vec::new(),
            operators: Vec::new(),
            flattened: false,
            provenance: Provenance::default(),
        },
    };
    for sec in &items[2..] {
        let list = expect_list(sec, "domain section")?;
        let kw = list.first().and_then(Sexp::as_atom).ok_or_else(|| syntax(sec.pos(), "empty section"))?;
        match kw {
            ":requirements" => b.dom.requirements = check_requirements(&list[1..])?,
            ":types" => {
                for (t, parent, p) in typed_list(&list[1..])? {
                    if !b.dom.hierarchy.add(&t, &parent) {
                        return Err(syntax(p, format!("type {t} redeclared or cyclic")));
                    }
                }
            }
            ":constants" => {
                for (c, t, p) in typed_list(&list[1..])? {
                    b.check_type(&t, p)?;
                    b.dom.constants.push(Param::new(c, t));
                }
            }
            ":predicates" => {
                for pe in &list[1..] {
                    let pl = expect_list(pe, "predicate declaration")?;
                    let pname = expect_atom(pl.first().ok_or_else(|| syntax(pe.pos(), "empty predicate"))?, "predicate name")?;
                    let mut params = Vec::new();
                    for (n, t, p) in typed_list(&pl[1..])? {
                        b.check_type(&t, p)?;
                        if params.iter().any(|q: &Param| q.name == n) {
                            return Err(syntax(p, format!("duplicate variable {n} in predicate {pname}")));
                        }
                        params.push(Param::new(n, t));
                    }
                    if b.dom.predicate(pname).is_some() {
                        return Err(syntax(pe.pos(), format!("predicate {pname} declared twice")));
                    }
                    b.dom.predicates.push(Predicate {
                        name: pname.to_string(),
                        params,
                    });
                }
            }
            ":action" => b.action(list, sec.pos())?,
            other => return Err(unsupported(sec.pos(), other)),
        }
    }
    let h = &b.dom.hierarchy;
    b.dom.flattened = b
        .dom
        .predicates
        .iter()
        .flat_map(|p| &p.params)
        .chain(b.dom.operators.iter().flat_map(|o| &o.params))
        .all(|p| h.is_atomic(&p.ty));
    Ok(b.dom)
}

/// Parses a problem against an already parsed domain.
pub fn parse_problem(text: &str, dom: &Domain) -> Result<Problem, PddlError> {
    let exprs = parse_all(text).map_err(|e| syntax(e.pos, e.msg))?;
    let top = exprs.first().ok_or_else(|| syntax(Pos { line: 1, col: 1 }, "empty input"))?;
    let items = expect_list(top, "(define ...)")?;
    if items.first().and_then(Sexp::as_atom) != Some("define") {
        return Err(syntax(top.pos(), "expected 'define'"));
    }
    let name = match items.get(1).and_then(Sexp::as_list) {
        Some([kw, n]) if kw.as_atom() == Some("problem") => expect_atom(n, "problem name")?.to_string(),
        _ => return Err(syntax(top.pos(), "expected (problem NAME)")),
    };
    let mut prob = Problem {
        name,
        domain_name: String::new(),
        objects: dom.constants.clone(),
        init: Vec::new(),
        goal: Vec::new(),
    };
    let mut init_raw = Vec::new();
    let mut goal_raw = Vec::new();
    for sec in &items[2..] {
        let list = expect_list(sec, "problem section")?;
        let kw = list.first().and_then(Sexp::as_atom).ok_or_else(|| syntax(sec.pos(), "empty section"))?;
        match kw {
            ":domain" => {
                let d = expect_atom(list.get(1).ok_or_else(|| syntax(sec.pos(), "missing domain name"))?, "domain name")?;
                if d != dom.name {
                    return Err(PddlError::DomainMismatch {
                        expected: dom.name.clone(),
                        found: d.to_string(),
                    });
                }
                prob.domain_name = d.to_string();
            }
            ":requirements" => {
                check_requirements(&list[1..])?;
            }
            ":objects" => {
                for (o, t, p) in typed_list(&list[1..])? {
                    if !dom.hierarchy.contains(&t) {
                        return Err(PddlError::Undeclared {
                            kind: "type",
                            name: t,
                            line: p.line,
                            col: p.col,
                        });
                    }
                    if !dom.hierarchy.is_atomic(&t) {
                        return Err(PddlError::NonAtomicObjectType { object: o, ty: t });
                    }
                    if prob.objects.iter().any(|x| x.name == o) {
                        return Err(syntax(p, format!("object {o} declared twice")));
                    }
                    prob.objects.push(Param::new(o, t));
                }
            }
            ":init" => {
                for f in &list[1..] {
                    conjunction(f, None, &mut init_raw)?;
                }
            }
            ":goal" => {
                let g = list.get(1).ok_or_else(|| syntax(sec.pos(), "missing goal"))?;
                conjunction(g, None, &mut goal_raw)?;
            }
            other => return Err(unsupported(sec.pos(), other)),
        }
    }
    if prob.domain_name.is_empty() {
        return Err(syntax(top.pos(), "missing (:domain ...)"));
    }
    let types = prob.object_types();
    let check = |(atom, pos): &(Atom, Pos)| -> Result<(), PddlError> {
        let pred = dom.predicate(&atom.predicate).ok_or_else(|| PddlError::Undeclared {
            kind: "predicate",
            name: atom.predicate.clone(),
            line: pos.line,
            col: pos.col,
        })?;
        if pred.arity() != atom.args.len() {
            return Err(PddlError::Arity {
                predicate: atom.predicate.clone(),
                expected: pred.arity(),
                found: atom.args.len(),
                line: pos.line,
                col: pos.col,
            });
        }
        for (arg, param) in atom.args.iter().zip(&pred.params) {
            let ty = types.get(arg.as_str()).ok_or_else(|| PddlError::Undeclared {
                kind: "object",
                name: arg.clone(),
                line: pos.line,
                col: pos.col,
            })?;
            if !dom.hierarchy.is_subtype(ty, &param.ty) {
                return Err(PddlError::TypeMismatch {
                    object: arg.clone(),
                    expected: param.ty.clone(),
                    found: ty.to_string(),
                });
            }
        }
        Ok(())
    };
    let dedup = |raw: &[(Atom, Pos)]| -> Result<Vec<Atom>, PddlError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in raw {
            check(f)?;
            if seen.insert(f.0.clone()) {
                out.push(f.0.clone());
            }
        }
        Ok(out)
    };
    let init = dedup(&init_raw)?;
    let goal = dedup(&goal_raw)?;
    prob.init = init;
    prob.goal = goal;
    Ok(prob)
}
