use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::module::SpecModule;
use crate::term::{Head, Term, Var};

/// A sort-preserving mapping from variables to terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn identity() -> Substitution {
        Substitution::default()
    }

    pub fn singleton(v: Var, t: Term) -> Substitution {
        let mut s = Substitution::default();
        s.bindings.insert(v, t);
        s
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    /// Binds a variable, checking sort preservation. Returns false when the
    /// variable is already bound to a different term.
    pub fn bind(&mut self, m: &SpecModule, v: Var, t: Term) -> Result<bool> {
        if !m.leq(t.sort(), v.sort) {
            return Ok(false);
        }
        match self.bindings.get(&v) {
            Some(prev) => Ok(prev == &t),
            None => {
                self.bindings.insert(v, t);
                Ok(true)
            }
        }
    }

    pub fn insert(&mut self, v: Var, t: Term) {
        self.bindings.insert(v, t);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    /// Homomorphic replacement followed by re-canonicalization.
    pub fn apply(&self, m: &SpecModule, t: &Term) -> Result<Term> {
        if self.bindings.is_empty() {
            return Ok(t.clone());
        }
        match t.head() {
            Head::Var(v) => Ok(self.bindings.get(v).cloned().unwrap_or_else(|| t.clone())),
            Head::Op(op) if !t.args().is_empty() => {
                let args = t
                    .args()
                    .iter()
                    .map(|a| self.apply(m, a))
                    .collect::<Result<Vec<_>>>()?;
                Term::make(m, *op, args).map_err(|e| match e {
                    Error::NoSort(msg) => Error::UnsortableResult(msg),
                    other => other,
                })
            }
            _ => Ok(t.clone()),
        }
    }

    /// `apply(apply(t, self), other) == apply(t, self.compose(other))`.
    pub fn compose(&self, m: &SpecModule, other: &Substitution) -> Result<Substitution> {
        let mut out = Substitution::default();
        for (v, t) in &self.bindings {
            out.bindings.insert(v.clone(), other.apply(m, t)?);
        }
        for (v, t) in &other.bindings {
            out.bindings.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Ok(out)
    }

    /// Merge where `self` provides defaults and `over` wins on conflicts.
    pub fn merged_over(&self, over: &Substitution) -> Substitution {
        let mut out = self.clone();
        for (v, t) in &over.bindings {
            out.bindings.insert(v.clone(), t.clone());
        }
        out
    }

    /// Copy without the given variables.
    pub fn without(&self, vars: &[Var]) -> Substitution {
        let mut out = self.clone();
        for v in vars {
            out.bindings.remove(v);
        }
        out
    }

    pub fn display<'a>(&'a self, m: &'a SpecModule) -> SubstDisplay<'a> {
        SubstDisplay { s: self, m }
    }
}

pub struct SubstDisplay<'a> {
    s: &'a Substitution,
    m: &'a SpecModule,
}

impl fmt::Display for SubstDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, t) in self.s.iter() {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{} <- {}", v.name, t.display(self.m))?;
        }
        Ok(())
    }
}
