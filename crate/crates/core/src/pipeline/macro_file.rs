use std::fmt::{self, Write as _};

use super::PipelineError;
use crate::macros::{MacroOperator, MacroStep};
use crate::pddl::sexpr::{parse_all, Sexp};
use crate::pddl::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Caed,
    Solep,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Caed => "caed",
            Method::Solep => "solep",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MacroEntry {
    pub method: Method,
    pub macro_op: MacroOperator,
    pub weight: f64,
}

/// Selected macros in rank order, with the domain name and the training configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MacroFile {
    pub domain: String,
    /// Configuration echo as `(key, value)` pairs.
    pub config: Vec<(String, String)>,
    pub entries: Vec<MacroEntry>,
}

fn bad(line: usize, msg: impl Into<String>) -> PipelineError {
    PipelineError::MacroFile { line, msg: msg.into() }
}

impl MacroFile {
    /// One s-expression per line. Map entries list each step's operator
    /// parameters in order, so the steps can be rebuilt from `dom`.
    pub fn to_text(&self, dom: &Domain) -> Result<String, PipelineError> {
        let mut out = String::new();
        let _ = writeln!(out, "(:domain {})", self.domain);
        out.push_str("(:config");
        for (k, v) in &self.config {
            let _ = write!(out, " :{k} {v}");
        }
        out.push_str(")\n");
        for e in &self.entries {
            let m = &e.macro_op;
            let _ = write!(out, "(:macro ({}) :map (", m.operator_names().join(" "));
            let mut first = true;
            for s in &m.steps {
                let op = dom
                    .operator(&s.operator)
                    .ok_or_else(|| PipelineError::Macro(crate::macros::MacroError::UnknownOperator(s.operator.clone())))?;
                for (p, v) in op.params.iter().zip(&s.args) {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    let _ = write!(out, "({}.{} -> {v})", s.operator, p.name);
                }
            }
            let _ = writeln!(out, ") :weight {} :method {})", e.weight, e.method);
        }
        Ok(out)
    }

    pub fn parse(text: &str, dom: &Domain) -> Result<MacroFile, PipelineError> {
        let items = parse_all(text).map_err(|e| bad(e.pos.line, e.msg))?;
        let mut file = MacroFile::default();
        for item in &items {
            let line = item.pos().line;
            let list = item.as_list().ok_or_else(|| bad(line, "expected a list"))?;
            match item.head() {
                Some(":domain") => {
                    file.domain = list
                        .get(1)
                        .and_then(Sexp::as_atom)
                        .ok_or_else(|| bad(line, "missing domain name"))?
                        .to_string();
                }
                Some(":config") => {
                    for pair in list[1..].chunks(2) {
                        match pair {
                            [k, v] => {
                                let k = k.as_atom().and_then(|k| k.strip_prefix(':')).ok_or_else(|| bad(line, "bad config key"))?;
                                let v = v.as_atom().ok_or_else(|| bad(line, "bad config value"))?;
                                file.config.push((k.to_string(), v.to_string()));
                            }
                            _ => return Err(bad(line, "config keys and values must pair up")),
                        }
                    }
                }
                Some(":macro") => file.entries.push(parse_entry(list, line, dom)?),
                _ => return Err(bad(line, "expected :domain, :config or :macro")),
            }
        }
        if file.domain.is_empty() {
            return Err(bad(1, "missing (:domain ...)"));
        }
        if file.domain != dom.name {
            return Err(PipelineError::MacroDomain {
                expected: dom.name.clone(),
                found: file.domain,
            });
        }
        Ok(file)
    }
}

fn keyword<'a>(list: &'a [Sexp], key: &str, line: usize) -> Result<&'a Sexp, PipelineError> {
    let i = list
        .iter()
        .position(|x| x.as_atom() == Some(key))
        .ok_or_else(|| bad(line, format!("missing {key}")))?;
    list.get(i + 1).ok_or_else(|| bad(line, format!("missing value for {key}")))
}

fn parse_entry(list: &[Sexp], line: usize, dom: &Domain) -> Result<MacroEntry, PipelineError> {
    let ops: Vec<&str> = list
        .get(1)
        .and_then(Sexp::as_list)
        .ok_or_else(|| bad(line, "missing operator list"))?
        .iter()
        .map(|x| x.as_atom().ok_or_else(|| bad(line, "operator names must be symbols")))
        .collect::<Result<_, _>>()?;
    let map = keyword(list, ":map", line)?.as_list().ok_or_else(|| bad(line, ":map must be a list"))?;
    let mut entries = map.iter().map(|e| match e.as_list() {
        Some([lhs, arrow, rhs]) if arrow.as_atom() == Some("->") => {
            let lhs = lhs.as_atom().ok_or_else(|| bad(line, "bad map entry"))?;
            let rhs = rhs.as_atom().ok_or_else(|| bad(line, "bad map entry"))?;
            let (op, var) = lhs.split_once(".?").ok_or_else(|| bad(line, format!("bad map key {lhs}")))?;
            Ok((op.to_string(), format!("?{var}"), rhs.to_string()))
        }
        _ => Err(bad(line, "map entries have the form (op.?v -> ?x)")),
    });
    let mut steps = Vec::new();
    for name in &ops {
        let op = dom.operator(name).ok_or_else(|| bad(line, format!("unknown operator {name}")))?;
        let mut args = Vec::new();
        for p in &op.params {
            let (o, v, x) = entries.next().ok_or_else(|| bad(line, format!("map is missing {name}.{}", p.name)))??;
            if o != *name || v != p.name {
                return Err(bad(line, format!("expected {name}.{}, found {o}.{v}", p.name)));
            }
            args.push(x);
        }
        steps.push(MacroStep {
            operator: name.to_string(),
            args,
        });
    }
    if entries.next().is_some() {
        return Err(bad(line, "map has more entries than the operators have parameters"));
    }
    let weight: f64 = keyword(list, ":weight", line)?
        .as_atom()
        .and_then(|w| w.parse().ok())
        .ok_or_else(|| bad(line, "bad weight"))?;
    let method = match keyword(list, ":method", line)?.as_atom() {
        Some("caed") => Method::Caed,
        Some("solep") => Method::Solep,
        _ => return Err(bad(line, "method must be caed or solep")),
    };
    let macro_op = MacroOperator::from_steps(steps, dom)?;
    Ok(MacroEntry { method, macro_op, weight })
}
