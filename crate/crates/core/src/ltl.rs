//! Linear temporal logic: formulas over ground proposition terms,
//! negation normal form, a tableau translation to Büchi automata, and the
//! exact evaluation of formulas on ultimately periodic words.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::module::SpecModule;
use crate::rewrite::reduce;
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// Dual of until; produced by normalization only.
    Release(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }
    pub fn eventually(f: Formula) -> Formula {
        Formula::Eventually(Box::new(f))
    }
    pub fn always(f: Formula) -> Formula {
        Formula::Always(Box::new(f))
    }
    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    /// Ground proposition terms of the formula, in first-occurrence order.
    pub fn props(&self) -> Vec<Term> {
        let mut out = Vec::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut Vec<Term>) {
        match self {
            Formula::Prop(t) => {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            Formula::True | Formula::False => {}
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::Eventually(a)
            | Formula::Always(a) => a.collect_props(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    /// Rewrites every proposition leaf to its equational normal form, so
    /// that guards and state labels compare equal terms.
    pub fn normalize_props(&self, m: &SpecModule) -> Result<Formula> {
        Ok(match self {
            Formula::Prop(t) => Formula::Prop(reduce(m, t)?),
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Not(a) => Formula::not(a.normalize_props(m)?),
            Formula::And(a, b) => Formula::and(a.normalize_props(m)?, b.normalize_props(m)?),
            Formula::Or(a, b) => Formula::or(a.normalize_props(m)?, b.normalize_props(m)?),
            Formula::Implies(a, b) => {
                Formula::implies(a.normalize_props(m)?, b.normalize_props(m)?)
            }
            Formula::Next(a) => Formula::next(a.normalize_props(m)?),
            Formula::Eventually(a) => Formula::eventually(a.normalize_props(m)?),
            Formula::Always(a) => Formula::always(a.normalize_props(m)?),
            Formula::Until(a, b) => Formula::until(a.normalize_props(m)?, b.normalize_props(m)?),
            Formula::Release(a, b) => Formula::Release(
                Box::new(a.normalize_props(m)?),
                Box::new(b.normalize_props(m)?),
            ),
        })
    }

    pub fn display<'a>(&'a self, m: &'a SpecModule) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, m }
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    m: &'a SpecModule,
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(f: &Formula, m: &SpecModule, out: &mut fmt::Formatter<'_>) -> fmt::Result {
            match f {
                Formula::True => write!(out, "True"),
                Formula::False => write!(out, "False"),
                Formula::Prop(t) => write!(out, "{}", t.display(m)),
                Formula::Not(a) => {
                    wrap(a, m, out, "~ ")
                }
                Formula::Next(a) => wrap(a, m, out, "O "),
                Formula::Eventually(a) => wrap(a, m, out, "<> "),
                Formula::Always(a) => wrap(a, m, out, "[] "),
                Formula::And(a, b) => binop(a, b, m, out, "/\\"),
                Formula::Or(a, b) => binop(a, b, m, out, "\\/"),
                Formula::Implies(a, b) => binop(a, b, m, out, "->"),
                Formula::Until(a, b) => binop(a, b, m, out, "U"),
                Formula::Release(a, b) => binop(a, b, m, out, "R"),
            }
        }
        fn wrap(
            a: &Formula,
            m: &SpecModule,
            out: &mut fmt::Formatter<'_>,
            op: &str,
        ) -> fmt::Result {
            write!(out, "{op}")?;
            if matches!(a, Formula::Prop(_) | Formula::True | Formula::False) {
                rec(a, m, out)
            } else {
                write!(out, "(")?;
                rec(a, m, out)?;
                write!(out, ")")
            }
        }
        fn binop(
            a: &Formula,
            b: &Formula,
            m: &SpecModule,
            out: &mut fmt::Formatter<'_>,
            op: &str,
        ) -> fmt::Result {
            write!(out, "(")?;
            rec(a, m, out)?;
            write!(out, " {op} ")?;
            rec(b, m, out)?;
            write!(out, ")")
        }
        rec(self.f, self.m, out)
    }
}

/// Converts a reduced formula-sorted term into a formula. Terms of sort
/// `Prop` become atoms; applications of the prelude formula constructors
/// recurse.
pub fn term_to_formula(m: &SpecModule, t: &Term) -> Result<Formula> {
    let p = &m.prelude;
    if let Some(op) = t.op() {
        let args = t.args();
        if op == p.f_true {
            return Ok(Formula::True);
        }
        if op == p.f_false {
            return Ok(Formula::False);
        }
        if op == p.f_not {
            return Ok(Formula::not(term_to_formula(m, &args[0])?));
        }
        if op == p.f_and {
            return Ok(Formula::and(
                term_to_formula(m, &args[0])?,
                term_to_formula(m, &args[1])?,
            ));
        }
        if op == p.f_or {
            return Ok(Formula::or(
                term_to_formula(m, &args[0])?,
                term_to_formula(m, &args[1])?,
            ));
        }
        if op == p.f_implies {
            return Ok(Formula::implies(
                term_to_formula(m, &args[0])?,
                term_to_formula(m, &args[1])?,
            ));
        }
        if op == p.f_next {
            return Ok(Formula::next(term_to_formula(m, &args[0])?));
        }
        if op == p.f_eventually {
            return Ok(Formula::eventually(term_to_formula(m, &args[0])?));
        }
        if op == p.f_always {
            return Ok(Formula::always(term_to_formula(m, &args[0])?));
        }
        if op == p.f_until {
            return Ok(Formula::until(
                term_to_formula(m, &args[0])?,
                term_to_formula(m, &args[1])?,
            ));
        }
    }
    if m.leq(t.sort(), p.prop_sort) {
        return Ok(Formula::Prop(t.clone()));
    }
    Err(Error::PropSortMismatch(t.to_text(m)))
}

/// Negates the formula and pushes negation to the atoms, expanding
/// implication, eventually and always into the `{¬, ∧, ∨, X, U, R}` core.
pub fn negate_and_normalize(f: &Formula) -> Formula {
    normalize(&Formula::not(f.clone()))
}

/// Negation normal form over the core connectives.
pub fn normalize(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Prop(_) => f.clone(),
        Formula::Not(a) => negate(a),
        Formula::And(a, b) => Formula::and(normalize(a), normalize(b)),
        Formula::Or(a, b) => Formula::or(normalize(a), normalize(b)),
        Formula::Implies(a, b) => Formula::or(negate(a), normalize(b)),
        Formula::Next(a) => Formula::next(normalize(a)),
        Formula::Eventually(a) => Formula::until(Formula::True, normalize(a)),
        Formula::Always(a) => Formula::Release(Box::new(Formula::False), Box::new(normalize(a))),
        Formula::Until(a, b) => Formula::until(normalize(a), normalize(b)),
        Formula::Release(a, b) => {
            Formula::Release(Box::new(normalize(a)), Box::new(normalize(b)))
        }
    }
}

fn negate(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Prop(_) => Formula::not(f.clone()),
        Formula::Not(a) => normalize(a),
        Formula::And(a, b) => Formula::or(negate(a), negate(b)),
        Formula::Or(a, b) => Formula::and(negate(a), negate(b)),
        Formula::Implies(a, b) => Formula::and(normalize(a), negate(b)),
        Formula::Next(a) => Formula::next(negate(a)),
        Formula::Eventually(a) => Formula::Release(Box::new(Formula::False), Box::new(negate(a))),
        Formula::Always(a) => Formula::until(Formula::True, negate(a)),
        Formula::Until(a, b) => Formula::Release(Box::new(negate(a)), Box::new(negate(b))),
        Formula::Release(a, b) => Formula::until(negate(a), negate(b)),
    }
}

/// A conjunction of proposition literals; a letter satisfies the guard when
/// it contains every positive literal and no negative one.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Guard {
    pub pos: BTreeSet<Term>,
    pub neg: BTreeSet<Term>,
}

impl Guard {
    pub fn satisfied(&self, letter: &BTreeSet<Term>) -> bool {
        self.pos.iter().all(|p| letter.contains(p))
            && self.neg.iter().all(|p| !letter.contains(p))
    }
}

/// Büchi automaton with state-attached guards: entering a state consumes
/// one letter, which must satisfy that state's guard.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    pub guards: Vec<Guard>,
    pub succ: Vec<Vec<usize>>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
}

impl BuchiAutomaton {
    pub fn state_count(&self) -> usize {
        self.guards.len()
    }

    /// Transition view as (from, guard-of-target, to) triples.
    pub fn transitions(&self) -> Vec<(usize, Guard, usize)> {
        let mut out = Vec::new();
        for (from, succs) in self.succ.iter().enumerate() {
            for to in succs {
                out.push((from, self.guards[*to].clone(), *to));
            }
        }
        out
    }
}

const INIT: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: Vec<Formula>,
    old: BTreeSet<Formula>,
    next: BTreeSet<Formula>,
}

/// Tableau translation of a normal-form formula into a Büchi automaton
/// (generalized acceptance from the until subformulas, then degeneralized
/// with a counter). The automaton is language-correct but not minimal.
pub fn to_buchi(f: &Formula) -> BuchiAutomaton {
    // Node construction.
    let mut done: Vec<Node> = Vec::new();
    let mut work: Vec<Node> = vec![Node {
        incoming: BTreeSet::from([INIT]),
        new: vec![f.clone()],
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    while let Some(mut node) = work.pop() {
        let eta = match node.new.pop() {
            None => {
                if let Some(existing) = done
                    .iter_mut()
                    .find(|d| d.old == node.old && d.next == node.next)
                {
                    existing.incoming.extend(node.incoming.iter().copied());
                } else {
                    let id = done.len();
                    done.push(node.clone());
                    work.push(Node {
                        incoming: BTreeSet::from([id]),
                        new: node.next.iter().cloned().collect(),
                        old: BTreeSet::new(),
                        next: BTreeSet::new(),
                    });
                }
                continue;
            }
            Some(eta) => eta,
        };
        if node.old.contains(&eta) {
            work.push(node);
            continue;
        }
        match &eta {
            Formula::True => work.push(node),
            Formula::False => {}
            Formula::Prop(_) => {
                let contradiction = Formula::not(eta.clone());
                if node.old.contains(&contradiction) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Formula::Not(inner) => {
                debug_assert!(matches!(**inner, Formula::Prop(_)));
                if node.old.contains(inner) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Formula::And(a, b) => {
                node.old.insert(eta.clone());
                for part in [a, b] {
                    if !node.old.contains(part) {
                        node.new.push((**part).clone());
                    }
                }
                work.push(node);
            }
            Formula::Or(a, b) => {
                node.old.insert(eta.clone());
                let mut left = node.clone();
                left.new.push((**a).clone());
                let mut right = node;
                right.new.push((**b).clone());
                work.push(left);
                work.push(right);
            }
            Formula::Next(a) => {
                node.old.insert(eta.clone());
                node.next.insert((**a).clone());
                work.push(node);
            }
            Formula::Until(a, b) => {
                node.old.insert(eta.clone());
                let mut cont = node.clone();
                cont.new.push((**a).clone());
                cont.next.insert(eta.clone());
                let mut fin = node;
                fin.new.push((**b).clone());
                work.push(cont);
                work.push(fin);
            }
            Formula::Release(a, b) => {
                node.old.insert(eta.clone());
                let mut cont = node.clone();
                cont.new.push((**b).clone());
                cont.next.insert(eta.clone());
                let mut fin = node;
                fin.new.push((**a).clone());
                fin.new.push((**b).clone());
                work.push(cont);
                work.push(fin);
            }
            Formula::Implies(_, _) | Formula::Eventually(_) | Formula::Always(_) => {
                unreachable!("input to to_buchi must be in normal form")
            }
        }
    }

    // Until subformulas drive the generalized acceptance condition.
    let mut untils: Vec<(Formula, Formula)> = Vec::new();
    collect_untils(f, &mut untils);

    let n = done.len();
    let guards: Vec<Guard> = done
        .iter()
        .map(|node| {
            let mut g = Guard::default();
            for o in &node.old {
                match o {
                    Formula::Prop(t) => {
                        g.pos.insert(t.clone());
                    }
                    Formula::Not(inner) => {
                        if let Formula::Prop(t) = &**inner {
                            g.neg.insert(t.clone());
                        }
                    }
                    _ => {}
                }
            }
            g
        })
        .collect();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut initial: Vec<usize> = Vec::new();
    for (id, node) in done.iter().enumerate() {
        for inc in &node.incoming {
            if *inc == INIT {
                initial.push(id);
            } else {
                succ[*inc].push(id);
            }
        }
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    initial.sort_unstable();
    initial.dedup();

    let k = untils.len();
    if k == 0 {
        return BuchiAutomaton {
            guards,
            succ,
            initial,
            accepting: vec![true; n],
        };
    }
    // Acceptance sets: F_i = { q : (a U b) not in old(q), or b in old(q) }.
    let f_sets: Vec<Vec<bool>> = untils
        .iter()
        .map(|(a, b)| {
            let u = Formula::until(a.clone(), b.clone());
            done.iter()
                .map(|node| !node.old.contains(&u) || node.old.contains(b))
                .collect()
        })
        .collect();
    // Counter construction: copy i tracks progress towards F_i.
    let id_of = |q: usize, i: usize| q * k + i;
    let mut dguards = Vec::with_capacity(n * k);
    let mut dsucc: Vec<Vec<usize>> = vec![Vec::new(); n * k];
    let mut daccepting = vec![false; n * k];
    for q in 0..n {
        for i in 0..k {
            dguards.push(guards[q].clone());
            let j = if f_sets[i][q] { (i + 1) % k } else { i };
            for r in &succ[q] {
                dsucc[id_of(q, i)].push(id_of(*r, j));
            }
            if i == 0 && f_sets[0][q] {
                daccepting[id_of(q, 0)] = true;
            }
        }
    }
    let dinitial: Vec<usize> = initial.iter().map(|q| id_of(*q, 0)).collect();
    BuchiAutomaton {
        guards: dguards,
        succ: dsucc,
        initial: dinitial,
        accepting: daccepting,
    }
}

fn collect_untils(f: &Formula, out: &mut Vec<(Formula, Formula)>) {
    match f {
        Formula::Until(a, b) => {
            let pair = ((**a).clone(), (**b).clone());
            if !out.contains(&pair) {
                out.push(pair);
            }
            collect_untils(a, out);
            collect_untils(b, out);
        }
        Formula::Not(a) | Formula::Next(a) | Formula::Eventually(a) | Formula::Always(a) => {
            collect_untils(a, out)
        }
        Formula::And(a, b)
        | Formula::Or(a, b)
        | Formula::Implies(a, b)
        | Formula::Release(a, b) => {
            collect_untils(a, out);
            collect_untils(b, out);
        }
        _ => {}
    }
}

/// Does the automaton accept `prefix · cycle^ω`? Decided by searching for a
/// reachable accepting cycle in the product with the lasso.
pub fn accepts_lasso(
    b: &BuchiAutomaton,
    prefix: &[BTreeSet<Term>],
    cycle: &[BTreeSet<Term>],
) -> bool {
    assert!(!cycle.is_empty());
    let p = prefix.len();
    let total = p + cycle.len();
    let letter = |i: usize| -> &BTreeSet<Term> {
        if i < p {
            &prefix[i]
        } else {
            &cycle[i - p]
        }
    };
    let norm = |i: usize| -> usize {
        if i < total {
            i
        } else {
            p + (i - p) % cycle.len()
        }
    };
    // Product node (i, q): automaton in q, next letter index i.
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for q in &b.initial {
        if b.guards[*q].satisfied(letter(0)) {
            let node = (norm(1), *q);
            if seen.insert(node) {
                stack.push(node);
            }
        }
    }
    let mut reachable = Vec::new();
    while let Some(node) = stack.pop() {
        reachable.push(node);
        let (i, q) = node;
        for r in &b.succ[q] {
            if b.guards[*r].satisfied(letter(i)) {
                let next = (norm(i + 1), *r);
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    // An accepting node on a cycle: search from each for a path to itself.
    for start in reachable.iter().filter(|(_, q)| b.accepting[*q]) {
        let mut seen2: HashSet<(usize, usize)> = HashSet::new();
        let mut stack2 = vec![*start];
        while let Some((i, q)) = stack2.pop() {
            for r in &b.succ[q] {
                if b.guards[*r].satisfied(letter(i)) {
                    let next = (norm(i + 1), *r);
                    if next == *start {
                        return true;
                    }
                    if seen2.insert(next) {
                        stack2.push(next);
                    }
                }
            }
        }
    }
    false
}

/// Exact satisfaction of a formula on the ultimately periodic word
/// `prefix · cycle^ω`, by pointwise fixpoints over the lasso positions.
pub fn eval_ltl_on_lasso(
    f: &Formula,
    prefix: &[BTreeSet<Term>],
    cycle: &[BTreeSet<Term>],
) -> bool {
    assert!(!cycle.is_empty());
    let p = prefix.len();
    let total = p + cycle.len();
    let succ = |i: usize| -> usize {
        if i + 1 < total {
            i + 1
        } else {
            p
        }
    };
    let letter = |i: usize| -> &BTreeSet<Term> {
        if i < p {
            &prefix[i]
        } else {
            &cycle[i - p]
        }
    };

    let mut memo: HashMap<Formula, Vec<bool>> = HashMap::new();

    fn eval(
        f: &Formula,
        total: usize,
        succ: &dyn Fn(usize) -> usize,
        letter: &dyn Fn(usize) -> &BTreeSet<Term>,
        memo: &mut HashMap<Formula, Vec<bool>>,
    ) -> Vec<bool> {
        if let Some(v) = memo.get(f) {
            return v.clone();
        }
        let out = match f {
            Formula::True => vec![true; total],
            Formula::False => vec![false; total],
            Formula::Prop(t) => (0..total).map(|i| letter(i).contains(t)).collect(),
            Formula::Not(a) => {
                let va = eval(a, total, succ, letter, memo);
                va.iter().map(|b| !b).collect()
            }
            Formula::And(a, b) => {
                let va = eval(a, total, succ, letter, memo);
                let vb = eval(b, total, succ, letter, memo);
                va.iter().zip(&vb).map(|(x, y)| *x && *y).collect()
            }
            Formula::Or(a, b) => {
                let va = eval(a, total, succ, letter, memo);
                let vb = eval(b, total, succ, letter, memo);
                va.iter().zip(&vb).map(|(x, y)| *x || *y).collect()
            }
            Formula::Implies(a, b) => {
                let va = eval(a, total, succ, letter, memo);
                let vb = eval(b, total, succ, letter, memo);
                va.iter().zip(&vb).map(|(x, y)| !*x || *y).collect()
            }
            Formula::Next(a) => {
                let va = eval(a, total, succ, letter, memo);
                (0..total).map(|i| va[succ(i)]).collect()
            }
            Formula::Eventually(a) => {
                let va = eval(a, total, succ, letter, memo);
                lfp(total, succ, |i, v: &[bool]| va[i] || v[succ(i)])
            }
            Formula::Always(a) => {
                let va = eval(a, total, succ, letter, memo);
                gfp(total, succ, |i, v: &[bool]| va[i] && v[succ(i)])
            }
            Formula::Until(a, b) => {
                let va = eval(a, total, succ, letter, memo);
                let vb = eval(b, total, succ, letter, memo);
                lfp(total, succ, |i, v: &[bool]| vb[i] || (va[i] && v[succ(i)]))
            }
            Formula::Release(a, b) => {
                let va = eval(a, total, succ, letter, memo);
                let vb = eval(b, total, succ, letter, memo);
                gfp(total, succ, |i, v: &[bool]| vb[i] && (va[i] || v[succ(i)]))
            }
        };
        memo.insert(f.clone(), out.clone());
        out
    }

    fn lfp(total: usize, _succ: &dyn Fn(usize) -> usize, step: impl Fn(usize, &[bool]) -> bool) -> Vec<bool> {
        let mut v = vec![false; total];
        loop {
            let mut changed = false;
            for i in (0..total).rev() {
                let next = step(i, &v);
                if next != v[i] {
                    v[i] = next;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn gfp(total: usize, _succ: &dyn Fn(usize) -> usize, step: impl Fn(usize, &[bool]) -> bool) -> Vec<bool> {
        let mut v = vec![true; total];
        loop {
            let mut changed = false;
            for i in (0..total).rev() {
                let next = step(i, &v);
                if next != v[i] {
                    v[i] = next;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    eval(f, total, &succ, &letter, &mut memo)[0]
}
