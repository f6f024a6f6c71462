//! Order-sorted terms kept in canonical form: associative operators are
//! flattened to variadic argument lists, associative-commutative argument
//! lists are sorted by a fixed total order, and identity elements never
//! appear under their own operator.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::module::{OpId, SortId, SpecModule};

/// A variable with its declared sort.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub sort: SortId,
}

/// Head symbol of a term node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Head {
    Op(OpId),
    Var(Var),
    Int(i64),
    Qid(String),
}

#[derive(Debug)]
pub struct TermNode {
    pub head: Head,
    pub args: Vec<Term>,
    pub sort: SortId,
    hash: u64,
}

/// A reference-counted canonical term. Cloning is cheap; equality uses the
/// cached structural hash as a fast path.
#[derive(Debug, Clone)]
pub struct Term(Arc<TermNode>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        self.0.head == other.0.head && self.0.args == other.0.args
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

fn mix(a: u64, b: u64) -> u64 {
    // FNV-style mixing; only has to be stable within a process.
    (a ^ b).wrapping_mul(0x100000001b3).rotate_left(17)
}

fn head_hash(head: &Head) -> u64 {
    match head {
        Head::Op(op) => mix(1, op.0 as u64),
        Head::Var(v) => {
            let mut h = mix(2, v.sort.0 as u64);
            for b in v.name.as_bytes() {
                h = mix(h, *b as u64);
            }
            h
        }
        Head::Int(n) => mix(3, *n as u64),
        Head::Qid(q) => {
            let mut h = 5;
            for b in q.as_bytes() {
                h = mix(h, *b as u64);
            }
            h
        }
    }
}

impl Term {
    /// Builds a node without any canonicalization. Callers are responsible
    /// for the flattening invariants; use [`Term::make`] for general
    /// construction.
    pub(crate) fn raw(head: Head, args: Vec<Term>, sort: SortId) -> Term {
        let mut h = head_hash(&head);
        for a in &args {
            h = mix(h, a.0.hash);
        }
        h = mix(h, args.len() as u64);
        Term(Arc::new(TermNode {
            head,
            args,
            sort,
            hash: h,
        }))
    }

    pub fn head(&self) -> &Head {
        &self.0.head
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    pub fn sort(&self) -> SortId {
        self.0.sort
    }

    pub fn op(&self) -> Option<OpId> {
        match self.0.head {
            Head::Op(op) => Some(op),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.0.head {
            Head::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self.0.head, Head::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &self.0.head {
            Head::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_ground(&self) -> bool {
        !self.is_var() && self.0.args.iter().all(|a| a.is_ground())
    }

    /// Collects the variables of the term in first-occurrence order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        if let Head::Var(v) = &self.0.head {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
        for a in &self.0.args {
            a.collect_vars(out);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.0.args.iter().map(|a| a.size()).sum::<usize>()
    }

    pub fn var(v: Var) -> Term {
        let sort = v.sort;
        Term::raw(Head::Var(v), Vec::new(), sort)
    }

    pub fn int(m: &SpecModule, n: i64) -> Term {
        Term::raw(Head::Int(n), Vec::new(), m.int_literal_sort(n))
    }

    pub fn qid(m: &SpecModule, q: impl Into<String>) -> Term {
        Term::raw(Head::Qid(q.into()), Vec::new(), m.qid_sort())
    }

    pub fn constant(m: &SpecModule, op: OpId) -> Term {
        Term::raw(Head::Op(op), Vec::new(), m.op(op).result)
    }

    /// Canonical constructor for an operator application: flattens nested
    /// associative arguments, removes identity elements, and sorts the
    /// argument list of associative-commutative operators by the total term
    /// order. Errors with `NoSort` when no declaration covers the argument
    /// sorts.
    pub fn make(m: &SpecModule, op: OpId, args: Vec<Term>) -> Result<Term> {
        let decl = m.op(op);
        let mut flat;
        if decl.assoc {
            flat = Vec::with_capacity(args.len());
            for a in args {
                if a.op() == Some(op) {
                    flat.extend(a.args().iter().cloned());
                } else {
                    flat.push(a);
                }
            }
            if let Some(id) = m.identity_of(op) {
                flat.retain(|a| a != id);
            }
            if flat.is_empty() {
                return match m.identity_of(op) {
                    Some(id) => Ok(id.clone()),
                    None => Err(Error::NoSort(format!(
                        "empty argument list for `{}`",
                        decl.name
                    ))),
                };
            }
            if flat.len() == 1 {
                return Ok(flat.pop().unwrap());
            }
            if decl.comm {
                flat.sort_by(Term::total_cmp);
            }
        } else {
            flat = args;
            if decl.comm {
                flat.sort_by(Term::total_cmp);
            }
        }
        let sort = m.least_result_sort(op, &flat)?;
        Ok(Term::raw(Head::Op(op), flat, sort))
    }

    /// Total order used to canonicalize AC argument lists and to make match
    /// enumeration deterministic. Compares heads, then arity, then arguments.
    pub fn total_cmp(a: &Term, b: &Term) -> Ordering {
        fn head_rank(h: &Head) -> u8 {
            match h {
                Head::Int(_) => 0,
                Head::Qid(_) => 1,
                Head::Op(_) => 2,
                Head::Var(_) => 3,
            }
        }
        let ra = head_rank(a.head());
        let rb = head_rank(b.head());
        ra.cmp(&rb)
            .then_with(|| match (a.head(), b.head()) {
                (Head::Int(x), Head::Int(y)) => x.cmp(y),
                (Head::Qid(x), Head::Qid(y)) => x.cmp(y),
                (Head::Op(x), Head::Op(y)) => x.0.cmp(&y.0),
                (Head::Var(x), Head::Var(y)) => x.cmp(y),
                _ => Ordering::Equal,
            })
            .then_with(|| a.args().len().cmp(&b.args().len()))
            .then_with(|| {
                for (x, y) in a.args().iter().zip(b.args()) {
                    let c = Term::total_cmp(x, y);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                Ordering::Equal
            })
    }

    /// Renders the term in the surface syntax of the specification language.
    pub fn display<'a>(&'a self, m: &'a SpecModule) -> TermDisplay<'a> {
        TermDisplay { term: self, m }
    }

    pub fn to_text(&self, m: &SpecModule) -> String {
        self.display(m).to_string()
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    m: &'a SpecModule,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, self.m)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &Term, m: &SpecModule) -> fmt::Result {
    match t.head() {
        Head::Int(n) => write!(f, "{n}"),
        Head::Qid(q) => write!(f, "'{q}"),
        Head::Var(v) => {
            if m.declared_var_sort(&v.name) == Some(v.sort) {
                write!(f, "{}", v.name)
            } else {
                write!(f, "{}:{}", v.name, m.sort_name(v.sort))
            }
        }
        Head::Op(op) => {
            write!(f, "{}", m.op(*op).name)?;
            if !t.args().is_empty() {
                write!(f, "(")?;
                for (i, a) in t.args().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write_term(f, a, m)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}
