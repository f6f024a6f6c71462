//! Pattern matching modulo associativity, commutativity and identity.
//!
//! Matching returns every substitution/context pair modulo the declared
//! axioms: commutative arguments are paired as multisets, flattened
//! associative argument lists are split into contiguous segments, and
//! variables under an operator with an identity may take the identity
//! element. Enumeration order is deterministic given the canonical term
//! order, and result sets are deduplicated.

use std::collections::HashSet;

use crate::error::Result;
use crate::module::{Builtin, ConditionFragment, OpId, SpecModule};
use crate::rewrite::{check_eq_condition_with, Budget};
use crate::strategy::MatchMode;
use crate::subst::Substitution;
use crate::term::{Head, Term};

/// A position inside a subject term: a path of argument indices, plus an
/// optional set of consumed argument slots when the match covers a segment
/// of a flattened associative argument list. Plugging re-normalizes every
/// rebuilt node, so spliced segments flatten back in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Context {
    subject: Term,
    path: Vec<usize>,
    segment: Option<Vec<usize>>,
}

impl Context {
    pub fn whole(subject: &Term) -> Context {
        Context {
            subject: subject.clone(),
            path: Vec::new(),
            segment: None,
        }
    }

    /// True when the context is the whole subject (an empty context).
    pub fn is_whole(&self) -> bool {
        self.path.is_empty() && self.segment.is_none()
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn plug(&self, m: &SpecModule, replacement: &Term) -> Result<Term> {
        fn rec(
            m: &SpecModule,
            t: &Term,
            path: &[usize],
            segment: &Option<Vec<usize>>,
            repl: &Term,
        ) -> Result<Term> {
            if path.is_empty() {
                return match segment {
                    None => Ok(repl.clone()),
                    Some(consumed) => {
                        let op = t.op().expect("segment context sits at an op node");
                        let first = *consumed.iter().min().unwrap();
                        let set: HashSet<usize> = consumed.iter().copied().collect();
                        let mut args = Vec::with_capacity(t.args().len());
                        for (i, a) in t.args().iter().enumerate() {
                            if i == first {
                                args.push(repl.clone());
                            }
                            if !set.contains(&i) {
                                args.push(a.clone());
                            }
                        }
                        Term::make(m, op, args)
                    }
                };
            }
            let i = path[0];
            let op = t.op().expect("path context descends through op nodes");
            let mut args = t.args().to_vec();
            args[i] = rec(m, &args[i], &path[1..], segment, repl)?;
            Term::make(m, op, args)
        }
        rec(m, &self.subject, &self.path, &self.segment, replacement)
    }
}

/// Matches `pattern` against `subject` and filters the raw matches through
/// the equational condition. `ext` permits a pattern headed by an
/// associative operator (or a variable) to cover a proper segment at the
/// top; anywhere mode always includes segment positions.
pub fn match_with(
    m: &SpecModule,
    pattern: &Term,
    subject: &Term,
    cond: &[ConditionFragment],
    mode: MatchMode,
    ext: bool,
    base: &Substitution,
    budget: &Budget,
) -> Result<Vec<(Substitution, Context)>> {
    let mut raw: Vec<(Substitution, Context)> = Vec::new();
    match mode {
        MatchMode::Top => {
            for s in match_at(m, pattern, subject, base)? {
                raw.push((s, Context::whole(subject)));
            }
            if ext {
                segment_matches(m, pattern, subject, subject, &[], base, 1, &mut raw)?;
            }
        }
        MatchMode::Anywhere => {
            let mut path = Vec::new();
            walk_positions(m, pattern, subject, subject, &mut path, base, &mut raw)?;
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (s, ctx) in raw {
        for ext_s in check_eq_condition_with(m, cond, &s, budget)? {
            if seen.insert((ext_s.clone(), ctx.clone())) {
                out.push((ext_s, ctx));
            }
        }
    }
    Ok(out)
}

/// All substitutions matching `pattern` against the whole of `subject`.
pub fn match_at(
    m: &SpecModule,
    pattern: &Term,
    subject: &Term,
    base: &Substitution,
) -> Result<Vec<Substitution>> {
    let mut out = Vec::new();
    match pattern.head() {
        Head::Var(v) => {
            let mut s = base.clone();
            if s.bind(m, v.clone(), subject.clone())? {
                out.push(s);
            }
        }
        Head::Int(n) => {
            if subject.as_int() == Some(*n) {
                out.push(base.clone());
            }
        }
        Head::Qid(q) => {
            if matches!(subject.head(), Head::Qid(sq) if sq == q) {
                out.push(base.clone());
            }
        }
        Head::Op(op) => {
            let decl = m.op(*op);
            // `s` patterns destructure numeric literals.
            if decl.builtin == Some(Builtin::Succ) {
                if let Some(k) = subject.as_int() {
                    if k >= 1 {
                        let pred = Term::int(m, k - 1);
                        return match_at(m, &pattern.args()[0], &pred, base);
                    }
                    return Ok(out);
                }
            }
            if decl.assoc {
                let subj_args = subject_arg_list(m, *op, subject);
                if decl.comm {
                    for (s, _) in ac_match(m, *op, pattern.args(), &subj_args, base, false, 0)? {
                        out.push(s);
                    }
                } else {
                    assoc_rec(m, *op, pattern.args(), &subj_args, 0, 0, base, &mut out)?;
                }
            } else if decl.comm {
                if subject.op() == Some(*op) {
                    let (p1, p2) = (&pattern.args()[0], &pattern.args()[1]);
                    let (t1, t2) = (&subject.args()[0], &subject.args()[1]);
                    for s in match_at(m, p1, t1, base)? {
                        out.extend(match_at(m, p2, t2, &s)?);
                    }
                    for s in match_at(m, p1, t2, base)? {
                        out.extend(match_at(m, p2, t1, &s)?);
                    }
                }
            } else if subject.op() == Some(*op) && subject.args().len() == pattern.args().len() {
                let mut partial = vec![base.clone()];
                for (p, t) in pattern.args().iter().zip(subject.args()) {
                    let mut next = Vec::new();
                    for s in &partial {
                        next.extend(match_at(m, p, t, s)?);
                    }
                    partial = next;
                    if partial.is_empty() {
                        break;
                    }
                }
                out.extend(partial);
            }
        }
    }
    dedup_substs(&mut out);
    Ok(out)
}

/// The argument list of `subject` viewed as a (possibly unary or empty)
/// flattened application of the associative operator `op`: the identity
/// element is the empty list and any other foreign term is a singleton.
fn subject_arg_list(m: &SpecModule, op: OpId, subject: &Term) -> Vec<Term> {
    if subject.op() == Some(op) {
        subject.args().to_vec()
    } else if m.identity_of(op) == Some(subject) {
        Vec::new()
    } else {
        vec![subject.clone()]
    }
}

fn dedup_substs(v: &mut Vec<Substitution>) {
    let mut seen = HashSet::new();
    v.retain(|s| seen.insert(s.clone()));
}

/// Contiguous-segment assignment of a flattened pattern argument list.
/// Variables may take empty segments when the operator has an identity, a
/// single element, or a rebuilt sub-list.
#[allow(clippy::too_many_arguments)]
fn assoc_rec(
    m: &SpecModule,
    op: OpId,
    pargs: &[Term],
    sargs: &[Term],
    pi: usize,
    si: usize,
    subst: &Substitution,
    out: &mut Vec<Substitution>,
) -> Result<()> {
    if pi == pargs.len() {
        if si == sargs.len() {
            out.push(subst.clone());
        }
        return Ok(());
    }
    let p = &pargs[pi];
    let min_rest: usize = pargs[pi + 1..].iter().filter(|q| !q.is_var()).count();
    let avail = sargs.len() - si;
    if let Head::Var(v) = p.head() {
        let max_len = avail.saturating_sub(min_rest);
        for len in 0..=max_len {
            let bound = match len {
                0 => match m.identity_of(op) {
                    Some(id) => id.clone(),
                    None => continue,
                },
                1 => sargs[si].clone(),
                _ => match Term::make(m, op, sargs[si..si + len].to_vec()) {
                    Ok(t) => t,
                    Err(_) => continue,
                },
            };
            let mut s = subst.clone();
            if s.bind(m, v.clone(), bound)? {
                assoc_rec(m, op, pargs, sargs, pi + 1, si + len, &s, out)?;
            }
        }
    } else if si < sargs.len() {
        for s in match_at(m, p, &sargs[si], subst)? {
            assoc_rec(m, op, pargs, sargs, pi + 1, si + 1, &s, out)?;
        }
    }
    Ok(())
}

/// Multiset matching for associative-commutative operators. Non-variable
/// pattern arguments consume exactly one subject element each; variables
/// collect arbitrary submultisets (the empty one only under an identity).
/// With `allow_remainder` the match may leave at least one element over,
/// reported through the consumed index set.
fn ac_match(
    m: &SpecModule,
    op: OpId,
    pargs: &[Term],
    sargs: &[Term],
    base: &Substitution,
    allow_remainder: bool,
    min_consumed: usize,
) -> Result<Vec<(Substitution, Vec<usize>)>> {
    struct Ctx<'a> {
        m: &'a SpecModule,
        op: OpId,
        sargs: &'a [Term],
        nonvars: Vec<&'a Term>,
        vars: Vec<&'a Term>,
        allow_remainder: bool,
        min_consumed: usize,
    }

    fn nonvar_phase(
        c: &Ctx,
        k: usize,
        available: &[usize],
        subst: &Substitution,
        out: &mut Vec<(Substitution, Vec<usize>)>,
    ) -> Result<()> {
        if k == c.nonvars.len() {
            let mut buckets: Vec<Vec<usize>> =
                vec![Vec::new(); c.vars.len() + usize::from(c.allow_remainder)];
            return var_phase(c, available, 0, &mut buckets, subst, out);
        }
        for (slot, idx) in available.iter().enumerate() {
            for s in match_at(c.m, c.nonvars[k], &c.sargs[*idx], subst)? {
                let mut rest = available.to_vec();
                rest.remove(slot);
                nonvar_phase(c, k + 1, &rest, &s, out)?;
            }
        }
        Ok(())
    }

    fn var_phase(
        c: &Ctx,
        remaining: &[usize],
        pos: usize,
        buckets: &mut Vec<Vec<usize>>,
        subst: &Substitution,
        out: &mut Vec<(Substitution, Vec<usize>)>,
    ) -> Result<()> {
        if pos == remaining.len() {
            let remainder_len = if c.allow_remainder {
                buckets[c.vars.len()].len()
            } else {
                0
            };
            if c.allow_remainder && remainder_len == 0 {
                return Ok(());
            }
            let consumed_total = c.sargs.len() - remainder_len;
            if consumed_total < c.min_consumed {
                return Ok(());
            }
            let mut s = subst.clone();
            for (v, bucket) in c.vars.iter().zip(buckets.iter()) {
                let var = v.as_var().expect("variable pattern");
                let bound = if bucket.is_empty() {
                    match c.m.identity_of(c.op) {
                        Some(id) => id.clone(),
                        None => return Ok(()),
                    }
                } else if bucket.len() == 1 {
                    c.sargs[bucket[0]].clone()
                } else {
                    let elems: Vec<Term> = bucket.iter().map(|i| c.sargs[*i].clone()).collect();
                    match Term::make(c.m, c.op, elems) {
                        Ok(t) => t,
                        Err(_) => return Ok(()),
                    }
                };
                if !s.bind(c.m, var.clone(), bound)? {
                    return Ok(());
                }
            }
            let remainder: HashSet<usize> = if c.allow_remainder {
                buckets[c.vars.len()].iter().copied().collect()
            } else {
                HashSet::new()
            };
            let consumed: Vec<usize> = (0..c.sargs.len())
                .filter(|i| !remainder.contains(i))
                .collect();
            out.push((s, consumed));
            return Ok(());
        }
        for b in 0..buckets.len() {
            buckets[b].push(remaining[pos]);
            var_phase(c, remaining, pos + 1, buckets, subst, out)?;
            buckets[b].pop();
        }
        Ok(())
    }

    let c = Ctx {
        m,
        op,
        sargs,
        nonvars: pargs.iter().filter(|p| !p.is_var()).collect(),
        vars: pargs.iter().filter(|p| p.is_var()).collect(),
        allow_remainder,
        min_consumed,
    };
    let available: Vec<usize> = (0..sargs.len()).collect();
    let mut out = Vec::new();
    nonvar_phase(&c, 0, &available, base, &mut out)?;
    let mut seen = HashSet::new();
    out.retain(|entry| seen.insert(entry.clone()));
    Ok(out)
}

/// Extension matches of `pattern` against proper sub-segments of the
/// flattened node at `path` inside `root`. `min_len` is 1 for top-level
/// extension matching and 2 in anywhere mode, where one-element segments
/// coincide with child positions.
#[allow(clippy::too_many_arguments)]
fn segment_matches(
    m: &SpecModule,
    pattern: &Term,
    root: &Term,
    node: &Term,
    path: &[usize],
    base: &Substitution,
    min_len: usize,
    raw: &mut Vec<(Substitution, Context)>,
) -> Result<()> {
    let op = match node.op() {
        Some(op) if m.op(op).assoc => op,
        _ => return Ok(()),
    };
    let decl = m.op(op);
    let n = node.args().len();
    let mut push = |s: Substitution, consumed: Vec<usize>, raw: &mut Vec<(Substitution, Context)>| {
        raw.push((
            s,
            Context {
                subject: root.clone(),
                path: path.to_vec(),
                segment: Some(consumed),
            },
        ));
    };
    if let Head::Var(v) = pattern.head() {
        if decl.comm {
            if n > 20 {
                return Ok(());
            }
            for mask in 1u32..(1u32 << n) {
                let size = mask.count_ones() as usize;
                if size < min_len || size >= n {
                    continue;
                }
                let idxs: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let elems: Vec<Term> = idxs.iter().map(|i| node.args()[*i].clone()).collect();
                let bound = if elems.len() == 1 {
                    elems[0].clone()
                } else {
                    match Term::make(m, op, elems) {
                        Ok(t) => t,
                        Err(_) => continue,
                    }
                };
                let mut s = base.clone();
                if s.bind(m, v.clone(), bound)? {
                    push(s, idxs, raw);
                }
            }
        } else {
            for start in 0..n {
                for len in min_len..=(n - start) {
                    if len >= n {
                        continue;
                    }
                    let elems: Vec<Term> = node.args()[start..start + len].to_vec();
                    let bound = if elems.len() == 1 {
                        elems[0].clone()
                    } else {
                        match Term::make(m, op, elems) {
                            Ok(t) => t,
                            Err(_) => continue,
                        }
                    };
                    let mut s = base.clone();
                    if s.bind(m, v.clone(), bound)? {
                        push(s, (start..start + len).collect(), raw);
                    }
                }
            }
        }
        return Ok(());
    }
    if pattern.op() != Some(op) {
        return Ok(());
    }
    if decl.comm {
        for (s, consumed) in ac_match(m, op, pattern.args(), node.args(), base, true, min_len)? {
            push(s, consumed, raw);
        }
    } else {
        for start in 0..n {
            for len in min_len..=(n - start) {
                if len >= n {
                    continue;
                }
                let window = &node.args()[start..start + len];
                let mut found = Vec::new();
                assoc_rec(m, op, pattern.args(), window, 0, 0, base, &mut found)?;
                for s in found {
                    push(s, (start..start + len).collect(), raw);
                }
            }
        }
    }
    Ok(())
}

/// Anywhere matching: every node of the subject plus, at flattened
/// associative nodes, every proper segment of length at least two.
fn walk_positions(
    m: &SpecModule,
    pattern: &Term,
    root: &Term,
    node: &Term,
    path: &mut Vec<usize>,
    base: &Substitution,
    raw: &mut Vec<(Substitution, Context)>,
) -> Result<()> {
    for s in match_at(m, pattern, node, base)? {
        raw.push((
            s,
            Context {
                subject: root.clone(),
                path: path.clone(),
                segment: None,
            },
        ));
    }
    if let Some(op) = node.op() {
        if m.op(op).assoc {
            segment_matches(m, pattern, root, node, path, base, 2, raw)?;
        }
        for i in 0..node.args().len() {
            path.push(i);
            walk_positions(m, pattern, root, &node.args()[i], path, base, raw)?;
            path.pop();
        }
    }
    Ok(())
}
