use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

/// The implicit root of every type hierarchy.
pub const ROOT_TYPE: &str = "object";

/// Single-inheritance type tree rooted at [`ROOT_TYPE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeHierarchy {
    /// Declaration order, root first.
    types: Vec<String>,
    parent: BTreeMap<String, String>,
}

impl Default for TypeHierarchy {
    fn default() -> Self {
        TypeHierarchy {
            types: vec![ROOT_TYPE.to_string()],
            parent: BTreeMap::new(),
        }
    }
}

impl TypeHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name` under `parent`. Redeclaring with the same parent is a no-op.
    /// Returns `false` if the edge would create a cycle or reparent a type.
    pub fn add(&mut self, name: &str, parent: &str) -> bool {
        if name == ROOT_TYPE {
            return parent == ROOT_TYPE;
        }
        if !self.contains(parent) {
            self.types.push(parent.to_string());
            self.parent.insert(parent.to_string(), ROOT_TYPE.to_string());
        }
        if let Some(p) = self.parent.get(name) {
            if p == parent {
                return true;
            }
            // Implicitly declared earlier as a child of the root; allow one re-parenting.
            if p != ROOT_TYPE {
                return false;
            }
        }
        if self.is_subtype(parent, name) {
            return false;
        }
        if !self.contains(name) {
            self.types.push(name.to_string());
        }
        self.parent.insert(name.to_string(), parent.to_string());
        true
    }

    pub fn contains(&self, t: &str) -> bool {
        t == ROOT_TYPE || self.parent.contains_key(t)
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn parent_of(&self, t: &str) -> Option<&str> {
        self.parent.get(t).map(String::as_str)
    }

    pub fn children<'a>(&'a self, t: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.types
            .iter()
            .filter(move |c| self.parent.get(c.as_str()).map(String::as_str) == Some(t))
            .map(String::as_str)
    }

    /// True when `t` has no subtypes.
    pub fn is_atomic(&self, t: &str) -> bool {
        self.children(t).next().is_none()
    }

    /// Reflexive subtype test: `sub ⊑ sup`.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = sub;
        loop {
            if cur == sup {
                return true;
            }
            match self.parent.get(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Atomic descendants of `t` in declaration order (`t` itself if atomic).
    pub fn atomic_subtypes(&self, t: &str) -> Vec<String> {
        self.types
            .iter()
            .filter(|c| self.is_atomic(c) && self.is_subtype(c, t))
            .cloned()
            .collect()
    }

    /// The more specific of two comparable types.
    pub fn meet(&self, a: &str, b: &str) -> Option<String> {
        if self.is_subtype(a, b) {
            Some(a.to_string())
        } else if self.is_subtype(b, a) {
            Some(b.to_string())
        } else {
            None
        }
    }

    /// Lowest type that is a supertype of every member of `ts`.
    pub fn common_supertype<'a>(&self, ts: impl IntoIterator<Item = &'a str>) -> Option<String> {
        let mut iter = ts.into_iter();
        let first = iter.next()?;
        let mut cand = first.to_string();
        for t in iter {
            while !self.is_subtype(t, &cand) {
                cand = self.parent.get(&cand)?.clone();
            }
        }
        Some(cand)
    }

    /// True when every declared type is atomic except the root, i.e. the hierarchy is flat.
    pub fn is_flat(&self) -> bool {
        self.types
            .iter()
            .filter(|t| t.as_str() != ROOT_TYPE)
            .all(|t| self.is_atomic(t))
    }
}

/// A typed variable or object declaration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

impl Param {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        Param {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

/// A predicate applied to variables (lifted) or objects (ground).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(predicate: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    /// Applies a variable substitution; arguments missing from `map` are kept.
    pub fn substitute(&self, map: &HashMap<String, String>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|a| map.get(a).cloned().unwrap_or_else(|| a.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A ground operator application, as it appears in a plan.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanAction {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanAction {
    pub fn new<S: Into<String>>(name: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        PlanAction {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for PlanAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<Param>,
}

impl Predicate {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

/// A STRIPS operator `(V, P, A, D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub name: String,
    pub params: Vec<Param>,
    pub pre: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl Operator {
    pub fn param_type(&self, var: &str) -> Option<&str> {
        self.params.iter().find(|p| p.name == var).map(|p| p.ty.as_str())
    }

    /// Renames variables positionally to `?v0, ?v1, ...` and sorts the atom sets.
    pub fn canonical(&self) -> Operator {
        let map: HashMap<String, String> = self
            .params
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), format!("?v{i}")))
            .collect();
        let norm = |atoms: &[Atom]| -> Vec<Atom> {
            let set: BTreeSet<Atom> = atoms.iter().map(|a| a.substitute(&map)).collect();
            set.into_iter().collect()
        };
        Operator {
            name: self.name.clone(),
            params: self
                .params
                .iter()
                .enumerate()
                .map(|(i, p)| Param::new(format!("?v{i}"), p.ty.clone()))
                .collect(),
            pre: norm(&self.pre),
            add: norm(&self.add),
            del: norm(&self.del),
        }
    }
}

/// Maps specialized (flattened) names back to their declared originals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    pub predicates: BTreeMap<String, String>,
    pub operators: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub hierarchy: TypeHierarchy,
    pub constants: Vec<Param>,
    pub predicates: Vec<Predicate>,
    pub operators: Vec<Operator>,
    /// True when every predicate and operator parameter has an atomic type.
    pub flattened: bool,
    pub provenance: Provenance,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn operator(&self, name: &str) -> Option<&Operator> {
        self.operators.iter().find(|o| o.name == name)
    }

    /// Declared name of a (possibly specialized) predicate.
    pub fn original_predicate<'a>(&'a self, name: &'a str) -> &'a str {
        self.provenance.predicates.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Declared name of a (possibly specialized) operator.
    pub fn original_operator<'a>(&'a self, name: &'a str) -> &'a str {
        self.provenance.operators.get(name).map(String::as_str).unwrap_or(name)
    }

    /// Structural equality up to variable renaming and atom order.
    pub fn equivalent(&self, other: &Domain) -> bool {
        let ops = |d: &Domain| -> Vec<Operator> { d.operators.iter().map(Operator::canonical).collect() };
        let consts = |d: &Domain| -> BTreeSet<Param> { d.constants.iter().cloned().collect() };
        self.name == other.name
            && self.hierarchy == other.hierarchy
            && self.predicates == other.predicates
            && consts(self) == consts(other)
            && ops(self) == ops(other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    /// Objects (including domain constants) with their atomic types, in declaration order.
    pub objects: Vec<Param>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}

impl Problem {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str())
    }

    pub fn object_types(&self) -> HashMap<&str, &str> {
        self.objects.iter().map(|o| (o.name.as_str(), o.ty.as_str())).collect()
    }
}
