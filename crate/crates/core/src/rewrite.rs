//! Equational reduction to canonical normal form, native evaluation of the
//! builtin arithmetic and boolean operators, condition checking, and rule
//! match enumeration.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::matching::{match_at, match_with, Context};
use crate::module::{Builtin, ConditionFragment, Rule, SpecModule};
use crate::strategy::MatchMode;
use crate::subst::Substitution;
use crate::term::{Head, Term};

pub const DEFAULT_REDUCE_CEILING: u64 = 1_000_000;

/// A rewrite-count budget shared across one reduction (including the
/// reductions triggered by condition checking). Exceeding it reports the
/// ceiling instead of looping forever on a non-terminating equation set.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    remaining: Cell<u64>,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget {
            limit,
            remaining: Cell::new(limit),
        }
    }

    pub fn charge(&self) -> Result<()> {
        let r = self.remaining.get();
        if r == 0 {
            return Err(Error::ReduceCeiling(self.limit));
        }
        self.remaining.set(r - 1);
        Ok(())
    }
}

/// Reduces a term to its equational normal form with the default ceiling.
pub fn reduce(m: &SpecModule, t: &Term) -> Result<Term> {
    reduce_with(m, t, &Budget::new(DEFAULT_REDUCE_CEILING))
}

/// Reduces a term to its equational normal form: arguments first, builtin
/// evaluation, then equations applied at the top (with extension at
/// flattened associative nodes) until none applies. Non-owise equations are
/// tried in declaration order before owise ones.
pub fn reduce_with(m: &SpecModule, t: &Term, budget: &Budget) -> Result<Term> {
    let mut current = t.clone();
    loop {
        current = normalize_args(m, &current, budget)?;
        current = eval_builtin(m, &current)?;
        match top_rewrite(m, &current, budget)? {
            Some(next) => {
                budget.charge()?;
                current = next;
            }
            None => return Ok(current),
        }
    }
}

fn normalize_args(m: &SpecModule, t: &Term, budget: &Budget) -> Result<Term> {
    match t.head() {
        Head::Op(op) if !t.args().is_empty() => {
            let args = t
                .args()
                .iter()
                .map(|a| reduce_with(m, a, budget))
                .collect::<Result<Vec<_>>>()?;
            if args.iter().zip(t.args()).all(|(a, b)| a == b) {
                Ok(t.clone())
            } else {
                Term::make(m, *op, args)
            }
        }
        _ => Ok(t.clone()),
    }
}

fn top_rewrite(m: &SpecModule, t: &Term, budget: &Budget) -> Result<Option<Term>> {
    for owise in [false, true] {
        for eq in &m.equations {
            if eq.owise != owise {
                continue;
            }
            let found = match_with(
                m,
                &eq.lhs,
                t,
                &eq.cond,
                MatchMode::Top,
                true,
                &Substitution::identity(),
                budget,
            )?;
            if let Some((s, ctx)) = found.into_iter().next() {
                let rhs = s.apply(m, &eq.rhs)?;
                let plugged = ctx.plug(m, &rhs)?;
                return Ok(Some(plugged));
            }
        }
    }
    Ok(None)
}

fn bool_const(m: &SpecModule, t: &Term) -> Option<bool> {
    match t.op() {
        Some(op) if op == m.prelude.op_true => Some(true),
        Some(op) if op == m.prelude.op_false => Some(false),
        _ => None,
    }
}

fn make_bool(m: &SpecModule, b: bool) -> Term {
    if b {
        m.bool_true()
    } else {
        m.bool_false()
    }
}

/// Evaluates one builtin application whose arguments are already normal.
/// Leaves the term untouched when an argument is symbolic or the operation
/// is undefined (division by zero, overflow).
fn eval_builtin(m: &SpecModule, t: &Term) -> Result<Term> {
    let op = match t.op() {
        Some(op) => op,
        None => return Ok(t.clone()),
    };
    let builtin = match m.op(op).builtin {
        Some(b) => b,
        None => return Ok(t.clone()),
    };
    let ints: Vec<Option<i64>> = t.args().iter().map(|a| a.as_int()).collect();
    let out = match builtin {
        Builtin::Succ => ints[0].and_then(|n| n.checked_add(1)).map(|n| Term::int(m, n)),
        Builtin::Plus => match (ints[0], ints[1]) {
            (Some(a), Some(b)) => a.checked_add(b).map(|n| Term::int(m, n)),
            _ => None,
        },
        Builtin::Minus => match (ints[0], ints[1]) {
            (Some(a), Some(b)) => a.checked_sub(b).map(|n| Term::int(m, n)),
            _ => None,
        },
        Builtin::Times => match (ints[0], ints[1]) {
            (Some(a), Some(b)) => a.checked_mul(b).map(|n| Term::int(m, n)),
            _ => None,
        },
        Builtin::Rem => match (ints[0], ints[1]) {
            (Some(a), Some(b)) if b != 0 => Some(Term::int(m, a % b)),
            _ => None,
        },
        Builtin::Divides => match (ints[0], ints[1]) {
            (Some(d), Some(n)) if d != 0 => Some(make_bool(m, n % d == 0)),
            _ => None,
        },
        Builtin::Lte => match (ints[0], ints[1]) {
            (Some(a), Some(b)) => Some(make_bool(m, a <= b)),
            _ => None,
        },
        Builtin::Lt => match (ints[0], ints[1]) {
            (Some(a), Some(b)) => Some(make_bool(m, a < b)),
            _ => None,
        },
        Builtin::BoolAnd => match (bool_const(m, &t.args()[0]), bool_const(m, &t.args()[1])) {
            (Some(a), Some(b)) => Some(make_bool(m, a && b)),
            _ => None,
        },
        Builtin::BoolOr => match (bool_const(m, &t.args()[0]), bool_const(m, &t.args()[1])) {
            (Some(a), Some(b)) => Some(make_bool(m, a || b)),
            _ => None,
        },
        Builtin::BoolNot => bool_const(m, &t.args()[0]).map(|a| make_bool(m, !a)),
    };
    Ok(out.unwrap_or_else(|| t.clone()))
}

fn require_ground(t: &Term) -> Result<()> {
    match t.vars().first() {
        Some(v) => Err(Error::UnboundVariable(v.name.clone())),
        None => Ok(()),
    }
}

/// Checks an equational condition with a fresh budget.
pub fn check_eq_condition(
    m: &SpecModule,
    cond: &[ConditionFragment],
    subst: &Substitution,
) -> Result<Vec<Substitution>> {
    check_eq_condition_with(m, cond, subst, &Budget::new(DEFAULT_REDUCE_CEILING))
}

/// Evaluates condition fragments left to right over a set of candidate
/// substitutions. Equality fragments reduce both sides and compare canonical
/// forms; matching fragments reduce the subject and enumerate matches,
/// possibly branching; sort tests compare the least sort of the reduced
/// term. Rewriting fragments are rejected here (the strategy engine owns
/// them).
pub fn check_eq_condition_with(
    m: &SpecModule,
    cond: &[ConditionFragment],
    subst: &Substitution,
    budget: &Budget,
) -> Result<Vec<Substitution>> {
    let mut states = vec![subst.clone()];
    for frag in cond {
        if states.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for s in &states {
            match frag {
                ConditionFragment::Equality(a, b) => {
                    let ia = s.apply(m, a)?;
                    let ib = s.apply(m, b)?;
                    require_ground(&ia)?;
                    require_ground(&ib)?;
                    if reduce_with(m, &ia, budget)? == reduce_with(m, &ib, budget)? {
                        next.push(s.clone());
                    }
                }
                ConditionFragment::Assign(p, t) => {
                    let it = s.apply(m, t)?;
                    require_ground(&it)?;
                    let nt = reduce_with(m, &it, budget)?;
                    let ip = s.apply(m, p)?;
                    next.extend(match_at(m, &ip, &nt, s)?);
                }
                ConditionFragment::SortTest(t, sort) => {
                    let it = s.apply(m, t)?;
                    require_ground(&it)?;
                    let nt = reduce_with(m, &it, budget)?;
                    if m.leq(nt.sort(), *sort) {
                        next.push(s.clone());
                    }
                }
                ConditionFragment::Rewrite(_, _) => {
                    return Err(Error::Other(
                        "rewriting fragment in an equational condition".into(),
                    ))
                }
            }
        }
        states = next;
    }
    let mut seen = std::collections::HashSet::new();
    states.retain(|s| seen.insert(s.clone()));
    Ok(states)
}

/// A rule match: where the (instantiated) left-hand side matched, the
/// accumulated substitution, and the condition fragments still pending from
/// the first rewriting fragment on. When no fragments remain the rewrite is
/// complete and [`complete_rewrite`] yields the successor term.
#[derive(Debug, Clone)]
pub struct PendingRewrite {
    pub label: String,
    pub context: Context,
    pub subst: Substitution,
    pub remaining_cond: Vec<ConditionFragment>,
    pub rhs: Term,
}

impl PendingRewrite {
    pub fn is_complete(&self) -> bool {
        self.remaining_cond.is_empty()
    }
}

/// Enumerates matches of a rule against a subject: the rule is instantiated
/// with the strategy-supplied substitution, its left-hand side is matched at
/// the top or at every position (including associative segments), and the
/// equational fragments before the first rewriting fragment are resolved.
pub fn rule_matches(
    m: &SpecModule,
    subject: &Term,
    rule: &Rule,
    rho: &Substitution,
    top_only: bool,
    budget: &Budget,
) -> Result<Vec<PendingRewrite>> {
    let lhs = rho.apply(m, &rule.lhs)?;
    let rhs = rho.apply(m, &rule.rhs)?;
    let cond: Vec<ConditionFragment> = rule
        .cond
        .iter()
        .map(|f| apply_fragment(m, f, rho))
        .collect::<Result<Vec<_>>>()?;
    let first_rewrite = cond.iter().position(ConditionFragment::is_rewrite);
    let (prefix, remaining) = match first_rewrite {
        Some(i) => (&cond[..i], cond[i..].to_vec()),
        None => (&cond[..], Vec::new()),
    };
    let (mode, ext) = if top_only {
        (MatchMode::Top, true)
    } else {
        (MatchMode::Anywhere, true)
    };
    let found = match_with(
        m,
        &lhs,
        subject,
        prefix,
        mode,
        ext,
        &Substitution::identity(),
        budget,
    )?;
    Ok(found
        .into_iter()
        .map(|(subst, context)| PendingRewrite {
            label: rule.label.clone(),
            context,
            subst,
            remaining_cond: remaining.clone(),
            rhs: rhs.clone(),
        })
        .collect())
}

pub fn apply_fragment(
    m: &SpecModule,
    f: &ConditionFragment,
    s: &Substitution,
) -> Result<ConditionFragment> {
    Ok(match f {
        ConditionFragment::Equality(a, b) => {
            ConditionFragment::Equality(s.apply(m, a)?, s.apply(m, b)?)
        }
        ConditionFragment::Assign(p, t) => {
            ConditionFragment::Assign(s.apply(m, p)?, s.apply(m, t)?)
        }
        ConditionFragment::SortTest(t, sort) => {
            ConditionFragment::SortTest(s.apply(m, t)?, *sort)
        }
        ConditionFragment::Rewrite(l, p) => {
            ConditionFragment::Rewrite(s.apply(m, l)?, s.apply(m, p)?)
        }
    })
}

/// The finished rewrite of a complete pending match: instantiate the
/// right-hand side, plug it into the context, and reduce.
pub fn complete_rewrite(m: &SpecModule, pr: &PendingRewrite, budget: &Budget) -> Result<Term> {
    let rhs = pr.subst.apply(m, &pr.rhs)?;
    require_ground(&rhs)?;
    let plugged = pr.context.plug(m, &rhs)?;
    reduce_with(m, &plugged, budget)
}

/// One-step rewrites of the uncontrolled system: every rule without
/// rewriting conditions, applied at every position. Deduplicated
/// (term, label) pairs in deterministic order.
pub fn one_step_rewrites(m: &SpecModule, t: &Term, budget: &Budget) -> Result<Vec<(Term, String)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for rule in &m.rules {
        if rule.rewrite_fragments() > 0 {
            continue;
        }
        for pr in rule_matches(m, t, rule, &Substitution::identity(), false, budget)? {
            debug_assert!(pr.is_complete());
            let next = complete_rewrite(m, &pr, budget)?;
            let entry = (next, rule.label.clone());
            if seen.insert(entry.clone()) {
                out.push(entry);
            }
        }
    }
    Ok(out)
}
