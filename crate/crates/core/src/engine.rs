//! Small-step operational semantics of the strategy language: execution
//! states, control and system transitions, solution detection, and the
//! rewriting search driven by strategies.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matching::{match_at, match_with, Context};
use crate::module::{ConditionFragment, SpecModule};
use crate::rewrite::{
    check_eq_condition_with, complete_rewrite, reduce_with, rule_matches, Budget,
    DEFAULT_REDUCE_CEILING,
};
use crate::strategy::{desugar, RuleTarget, StrategyExpr};
use crate::subst::Substitution;
use crate::term::{Term, Var};

pub const DEFAULT_STATE_LIMIT: usize = 5_000_000;

/// Execution options shared by searches, graph construction and checking.
#[derive(Debug, Clone)]
pub struct StratConfig {
    /// Expose only the left-to-right interleaving of matchrew subterms.
    pub biased: bool,
    /// Strategy names whose whole execution is one atomic transition.
    pub opaque: HashSet<String>,
    /// Ceiling on states per search (model construction and subsearches).
    pub state_limit: usize,
    /// Ceiling on equation applications per reduction.
    pub reduce_ceiling: u64,
}

impl Default for StratConfig {
    fn default() -> StratConfig {
        StratConfig {
            biased: true,
            opaque: HashSet::new(),
            state_limit: DEFAULT_STATE_LIMIT,
            reduce_ceiling: DEFAULT_REDUCE_CEILING,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EngineCtx<'m> {
    pub module: &'m SpecModule,
    pub config: &'m StratConfig,
}

/// One pending item: a strategy still to execute or a substitution frame
/// delimiting a call environment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StackItem {
    Strat(Arc<StrategyExpr>),
    Ctx(Substitution),
}

/// An execution state of the semantics: a subject term with its pending
/// stack, a subterm aggregate opened by a matchrew, or a rewriting-condition
/// search frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExecState {
    Term {
        subject: Term,
        stack: Vec<StackItem>,
    },
    Subterm {
        parts: Vec<(Var, ExecState)>,
        /// The matched context with the part variables as placeholders.
        shell: Term,
        stack: Vec<StackItem>,
    },
    Rewc(Box<RewcState>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RewcState {
    pub label: String,
    /// Right-hand side pattern of the fragment under evaluation.
    pub pattern: Term,
    pub inner: ExecState,
    /// Substitution accumulated from the rule match and solved fragments.
    pub sigma: Substitution,
    /// Fragments after the active one (later rewrites and equational glue).
    pub remaining_cond: Vec<ConditionFragment>,
    pub remaining_strats: Vec<Arc<StrategyExpr>>,
    /// The variable context of the rule application.
    pub env: Substitution,
    pub rhs: Term,
    pub context: Context,
    pub initial: Term,
    pub stack: Vec<StackItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionLabel {
    Rule(String),
    Unlabeled,
    Opaque(String),
    Solution,
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::Rule(r) => write!(f, "{r}"),
            TransitionLabel::Unlabeled => write!(f, "unlabeled"),
            TransitionLabel::Opaque(s) => write!(f, "opaque({s})"),
            TransitionLabel::Solution => write!(f, "solution"),
        }
    }
}

impl ExecState {
    pub fn start(subject: Term, strat: Arc<StrategyExpr>) -> ExecState {
        ExecState::Term {
            subject,
            stack: vec![StackItem::Strat(strat)],
        }
    }

    /// A state with nothing pending: where finite executions end.
    pub fn is_solution(&self) -> bool {
        matches!(self, ExecState::Term { stack, .. } if stack.is_empty())
    }
}

/// The active substitution of a stack: its first frame, identity if none.
pub fn vctx(stack: &[StackItem]) -> Substitution {
    for item in stack {
        if let StackItem::Ctx(s) = item {
            return s.clone();
        }
    }
    Substitution::identity()
}

/// The term a state is rewriting.
pub fn cterm(ctx: &EngineCtx, q: &ExecState) -> Result<Term> {
    match q {
        ExecState::Term { subject, .. } => Ok(subject.clone()),
        ExecState::Subterm { parts, shell, .. } => {
            let mut s = Substitution::identity();
            for (v, part) in parts {
                s.insert(v.clone(), cterm(ctx, part)?);
            }
            let raw = s.apply(ctx.module, shell)?;
            let budget = Budget::new(ctx.config.reduce_ceiling);
            reduce_with(ctx.module, &raw, &budget)
        }
        ExecState::Rewc(r) => Ok(r.initial.clone()),
    }
}

#[derive(Debug, Default)]
pub struct Steps {
    pub control: Vec<ExecState>,
    pub system: Vec<(ExecState, TransitionLabel)>,
}

/// Control transitions of a state (the `→c` relation), including inner
/// steps of rewriting-condition frames.
pub fn control_steps(ctx: &EngineCtx, q: &ExecState) -> Result<Vec<ExecState>> {
    Ok(steps(ctx, q)?.control)
}

/// System transitions of a state (the `→s` relation): one rule rewrite of
/// the subject term, or one atomic opaque-strategy execution.
pub fn system_steps(ctx: &EngineCtx, q: &ExecState) -> Result<Vec<(ExecState, TransitionLabel)>> {
    Ok(steps(ctx, q)?.system)
}

/// Both transition relations of the semantics in one dispatch.
pub fn steps(ctx: &EngineCtx, q: &ExecState) -> Result<Steps> {
    let budget = Budget::new(ctx.config.reduce_ceiling);
    steps_with(ctx, q, &budget)
}

fn steps_with(ctx: &EngineCtx, q: &ExecState, budget: &Budget) -> Result<Steps> {
    let m = ctx.module;
    let mut out = Steps::default();
    match q {
        ExecState::Term { subject, stack } => {
            let Some(head) = stack.first() else {
                return Ok(out); // solution: nothing pending
            };
            let rest: Vec<StackItem> = stack[1..].to_vec();
            let strat = match head {
                StackItem::Ctx(_) => {
                    // A finished call pops its environment frame.
                    out.control.push(ExecState::Term {
                        subject: subject.clone(),
                        stack: rest,
                    });
                    return Ok(out);
                }
                StackItem::Strat(s) => s.clone(),
            };
            match &*strat {
                StrategyExpr::Idle => out.control.push(ExecState::Term {
                    subject: subject.clone(),
                    stack: rest,
                }),
                StrategyExpr::Fail => {}
                StrategyExpr::Seq(a, b) => {
                    let mut stack2 = Vec::with_capacity(rest.len() + 2);
                    stack2.push(StackItem::Strat(a.clone()));
                    stack2.push(StackItem::Strat(b.clone()));
                    stack2.extend(rest);
                    out.control.push(ExecState::Term {
                        subject: subject.clone(),
                        stack: stack2,
                    });
                }
                StrategyExpr::Union(a, b) => {
                    for branch in [a, b] {
                        let mut stack2 = Vec::with_capacity(rest.len() + 1);
                        stack2.push(StackItem::Strat(branch.clone()));
                        stack2.extend(rest.iter().cloned());
                        out.control.push(ExecState::Term {
                            subject: subject.clone(),
                            stack: stack2,
                        });
                    }
                }
                StrategyExpr::Star(a) => {
                    out.control.push(ExecState::Term {
                        subject: subject.clone(),
                        stack: rest.clone(),
                    });
                    let mut unroll = Vec::with_capacity(rest.len() + 2);
                    unroll.push(StackItem::Strat(a.clone()));
                    unroll.push(StackItem::Strat(strat.clone()));
                    unroll.extend(rest);
                    out.control.push(ExecState::Term {
                        subject: subject.clone(),
                        stack: unroll,
                    });
                }
                StrategyExpr::Test {
                    mode,
                    ext,
                    pattern,
                    cond,
                } => {
                    let theta = vctx(&rest);
                    let pat = theta.apply(m, pattern)?;
                    let cond = cond
                        .iter()
                        .map(|f| crate::rewrite::apply_fragment(m, f, &theta))
                        .collect::<Result<Vec<_>>>()?;
                    let found = match_with(
                        m,
                        &pat,
                        subject,
                        &cond,
                        *mode,
                        *ext,
                        &Substitution::identity(),
                        budget,
                    )?;
                    if !found.is_empty() {
                        out.control.push(ExecState::Term {
                            subject: subject.clone(),
                            stack: rest,
                        });
                    }
                }
                StrategyExpr::Conditional(a, b, g) => {
                    let mut push_branch = |first: &Arc<StrategyExpr>, second: Option<&Arc<StrategyExpr>>| {
                        let mut stack2 = Vec::with_capacity(rest.len() + 2);
                        stack2.push(StackItem::Strat(first.clone()));
                        if let Some(s) = second {
                            stack2.push(StackItem::Strat(s.clone()));
                        }
                        stack2.extend(rest.iter().cloned());
                        ExecState::Term {
                            subject: subject.clone(),
                            stack: stack2,
                        }
                    };
                    out.control.push(push_branch(a, Some(b)));
                    // [else]: the negative branch opens only when the
                    // condition reaches no solution at all.
                    let theta = vctx(&rest);
                    let probe = ExecState::Term {
                        subject: subject.clone(),
                        stack: vec![StackItem::Strat(a.clone()), StackItem::Ctx(theta)],
                    };
                    if !solution_search(ctx, &probe)? {
                        out.control.push(push_branch(g, None));
                    }
                }
                StrategyExpr::MatchRew {
                    mode,
                    ext,
                    pattern,
                    cond,
                    parts,
                } => {
                    let theta = vctx(&rest);
                    let pat = theta.apply(m, pattern)?;
                    let cond = cond
                        .iter()
                        .map(|f| crate::rewrite::apply_fragment(m, f, &theta))
                        .collect::<Result<Vec<_>>>()?;
                    let part_vars: Vec<Var> = parts.iter().map(|(v, _)| v.clone()).collect();
                    let found = match_with(
                        m,
                        &pat,
                        subject,
                        &cond,
                        *mode,
                        *ext,
                        &Substitution::identity(),
                        budget,
                    )?;
                    for (sigma, mctx) in found {
                        let env = theta.merged_over(&sigma);
                        let shell_inner = sigma.without(&part_vars).apply(m, &pat)?;
                        let shell = mctx.plug(m, &shell_inner)?;
                        let mut sub_parts = Vec::with_capacity(parts.len());
                        let mut ok = true;
                        for (v, sub_strat) in parts {
                            let Some(bound) = sigma.get(v) else {
                                ok = false;
                                break;
                            };
                            sub_parts.push((
                                v.clone(),
                                ExecState::Term {
                                    subject: bound.clone(),
                                    stack: vec![
                                        StackItem::Strat(sub_strat.clone()),
                                        StackItem::Ctx(env.clone()),
                                    ],
                                },
                            ));
                        }
                        if ok {
                            out.control.push(ExecState::Subterm {
                                parts: sub_parts,
                                shell,
                                stack: rest.clone(),
                            });
                        }
                    }
                }
                StrategyExpr::Call { name, args } => {
                    if ctx.config.opaque.contains(name) {
                        let succ =
                            opaque_successors(ctx, subject, name, args, &rest, budget)?;
                        out.system.extend(succ);
                        return Ok(out);
                    }
                    let theta = vctx(&rest);
                    let mut arg_vals = Vec::with_capacity(args.len());
                    for a in args {
                        let inst = theta.apply(m, a)?;
                        if let Some(v) = inst.vars().first() {
                            return Err(Error::UnboundVariable(v.name.clone()));
                        }
                        arg_vals.push(reduce_with(m, &inst, budget)?);
                    }
                    // Tail calls replace the environment frame on top.
                    let tail_rest: &[StackItem] = match rest.first() {
                        Some(StackItem::Ctx(_)) => &rest[1..],
                        _ => &rest[..],
                    };
                    for def in m.strat_defs_for(name, args.len()) {
                        let mut sigmas = vec![Substitution::identity()];
                        for (p, arg) in def.params.iter().zip(&arg_vals) {
                            let mut next = Vec::new();
                            for s in &sigmas {
                                next.extend(match_at(m, p, arg, s)?);
                            }
                            sigmas = next;
                            if sigmas.is_empty() {
                                break;
                            }
                        }
                        for s in sigmas {
                            for s2 in check_eq_condition_with(m, &def.cond, &s, budget)? {
                                let mut stack2 = Vec::with_capacity(tail_rest.len() + 2);
                                stack2.push(StackItem::Strat(def.body.clone()));
                                stack2.push(StackItem::Ctx(s2));
                                stack2.extend(tail_rest.iter().cloned());
                                out.control.push(ExecState::Term {
                                    subject: subject.clone(),
                                    stack: stack2,
                                });
                            }
                        }
                    }
                }
                StrategyExpr::RuleApp {
                    target,
                    subst,
                    cond_strats,
                    top,
                } => {
                    let theta = vctx(&rest);
                    let mut rho = Substitution::identity();
                    for (v, t) in subst {
                        let inst = theta.apply(m, t)?;
                        if let Some(fv) = inst.vars().first() {
                            return Err(Error::UnboundVariable(fv.name.clone()));
                        }
                        rho.insert(v.clone(), reduce_with(m, &inst, budget)?);
                    }
                    let rules: Vec<&crate::module::Rule> = match target {
                        RuleTarget::All => m.rules.iter().collect(),
                        RuleTarget::Label(l) => m.rules_with_label(l),
                    };
                    for rule in rules {
                        let frags = rule.rewrite_fragments();
                        if frags != cond_strats.len() {
                            if matches!(target, RuleTarget::All) {
                                continue;
                            }
                            return Err(Error::ArityMismatch {
                                label: rule.label.clone(),
                                fragments: frags,
                                strategies: cond_strats.len(),
                            });
                        }
                        let pending = rule_matches(m, subject, rule, &rho, *top, budget)?;
                        for pr in pending {
                            if pr.is_complete() {
                                let next = complete_rewrite(m, &pr, budget)?;
                                out.system.push((
                                    ExecState::Term {
                                        subject: next,
                                        stack: rest.clone(),
                                    },
                                    TransitionLabel::Rule(rule.label.clone()),
                                ));
                            } else {
                                let ConditionFragment::Rewrite(l, p) = &pr.remaining_cond[0]
                                else {
                                    unreachable!("remaining_cond starts at a rewrite fragment")
                                };
                                let lhs_inst = pr.subst.apply(m, l)?;
                                if let Some(fv) = lhs_inst.vars().first() {
                                    return Err(Error::UnboundVariable(fv.name.clone()));
                                }
                                let seed = reduce_with(m, &lhs_inst, budget)?;
                                out.control.push(ExecState::Rewc(Box::new(RewcState {
                                    label: rule.label.clone(),
                                    pattern: p.clone(),
                                    inner: ExecState::Term {
                                        subject: seed,
                                        stack: vec![
                                            StackItem::Strat(cond_strats[0].clone()),
                                            StackItem::Ctx(theta.clone()),
                                        ],
                                    },
                                    sigma: pr.subst,
                                    remaining_cond: pr.remaining_cond[1..].to_vec(),
                                    remaining_strats: cond_strats[1..].to_vec(),
                                    env: theta.clone(),
                                    rhs: pr.rhs,
                                    context: pr.context,
                                    initial: subject.clone(),
                                    stack: rest.clone(),
                                })));
                            }
                        }
                    }
                }
                StrategyExpr::Plus(_)
                | StrategyExpr::Bang(_)
                | StrategyExpr::OrElse(_, _)
                | StrategyExpr::Not(_)
                | StrategyExpr::Try(_)
                | StrategyExpr::TestComb(_) => {
                    return Err(Error::Other(
                        "derived strategy combinator reached the engine; desugar first".into(),
                    ))
                }
            }
        }
        ExecState::Subterm {
            parts,
            shell,
            stack,
        } => {
            if parts.iter().all(|(_, p)| p.is_solution()) {
                let mut s = Substitution::identity();
                for (v, part) in parts {
                    let ExecState::Term { subject, .. } = part else {
                        unreachable!()
                    };
                    s.insert(v.clone(), subject.clone());
                }
                let raw = s.apply(m, shell)?;
                let reassembled = reduce_with(m, &raw, budget)?;
                out.control.push(ExecState::Term {
                    subject: reassembled,
                    stack: stack.clone(),
                });
                return Ok(out);
            }
            let allowed: Vec<usize> = if ctx.config.biased {
                parts
                    .iter()
                    .position(|(_, p)| !p.is_solution())
                    .into_iter()
                    .collect()
            } else {
                parts
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, p))| !p.is_solution())
                    .map(|(i, _)| i)
                    .collect()
            };
            for i in allowed {
                let inner = steps_with(ctx, &parts[i].1, budget)?;
                let rebuild = |new_part: ExecState| {
                    let mut parts2 = parts.clone();
                    parts2[i].1 = new_part;
                    ExecState::Subterm {
                        parts: parts2,
                        shell: shell.clone(),
                        stack: stack.clone(),
                    }
                };
                for c in inner.control {
                    out.control.push(rebuild(c));
                }
                for (s, lbl) in inner.system {
                    out.system.push((rebuild(s), lbl));
                }
            }
        }
        ExecState::Rewc(r) => {
            // Inner progress of any kind is a control step of the frame.
            let inner = steps_with(ctx, &r.inner, budget)?;
            for q2 in inner
                .control
                .into_iter()
                .chain(inner.system.into_iter().map(|(s, _)| s))
            {
                let mut r2 = r.clone();
                r2.inner = q2;
                out.control.push(ExecState::Rewc(r2));
            }
            if let ExecState::Term { subject, stack } = &r.inner {
                if stack.is_empty() {
                    // The fragment's subsearch found a solution; match the
                    // right-hand side pattern and continue the condition.
                    let (eq_prefix, rest_cond) =
                        match r.remaining_cond.iter().position(|f| f.is_rewrite()) {
                            Some(i) => (&r.remaining_cond[..i], &r.remaining_cond[i..]),
                            None => (&r.remaining_cond[..], &[][..]),
                        };
                    for s in match_at(m, &r.pattern, subject, &r.sigma)? {
                        for s2 in check_eq_condition_with(m, eq_prefix, &s, budget)? {
                            if let Some(ConditionFragment::Rewrite(l2, p2)) = rest_cond.first() {
                                let lhs_inst = s2.apply(m, l2)?;
                                if let Some(fv) = lhs_inst.vars().first() {
                                    return Err(Error::UnboundVariable(fv.name.clone()));
                                }
                                let seed = reduce_with(m, &lhs_inst, budget)?;
                                let mut r2 = (**r).clone();
                                r2.pattern = p2.clone();
                                r2.inner = ExecState::Term {
                                    subject: seed,
                                    stack: vec![
                                        StackItem::Strat(r.remaining_strats[0].clone()),
                                        StackItem::Ctx(r.env.clone()),
                                    ],
                                };
                                r2.sigma = s2;
                                r2.remaining_cond = rest_cond[1..].to_vec();
                                r2.remaining_strats = r.remaining_strats[1..].to_vec();
                                out.control.push(ExecState::Rewc(Box::new(r2)));
                            } else {
                                let rhs = s2.apply(m, &r.rhs)?;
                                if let Some(fv) = rhs.vars().first() {
                                    return Err(Error::UnboundVariable(fv.name.clone()));
                                }
                                let plugged = r.context.plug(m, &rhs)?;
                                let next = reduce_with(m, &plugged, budget)?;
                                out.system.push((
                                    ExecState::Term {
                                        subject: next,
                                        stack: r.stack.clone(),
                                    },
                                    TransitionLabel::Rule(r.label.clone()),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Executes an opaque call to completion: each solution term of the nested
/// search becomes one atomic successor.
pub fn opaque_successors(
    ctx: &EngineCtx,
    subject: &Term,
    name: &str,
    args: &[Term],
    rest: &[StackItem],
    budget: &Budget,
) -> Result<Vec<(ExecState, TransitionLabel)>> {
    let m = ctx.module;
    let theta = vctx(rest);
    let mut arg_vals = Vec::with_capacity(args.len());
    for a in args {
        let inst = theta.apply(m, a)?;
        if let Some(v) = inst.vars().first() {
            return Err(Error::UnboundVariable(v.name.clone()));
        }
        arg_vals.push(reduce_with(m, &inst, budget)?);
    }
    let mut seeds = Vec::new();
    for def in m.strat_defs_for(name, args.len()) {
        let mut sigmas = vec![Substitution::identity()];
        for (p, arg) in def.params.iter().zip(&arg_vals) {
            let mut next = Vec::new();
            for s in &sigmas {
                next.extend(match_at(m, p, arg, s)?);
            }
            sigmas = next;
            if sigmas.is_empty() {
                break;
            }
        }
        for s in sigmas {
            for s2 in check_eq_condition_with(m, &def.cond, &s, budget)? {
                seeds.push(ExecState::Term {
                    subject: subject.clone(),
                    stack: vec![StackItem::Strat(def.body.clone()), StackItem::Ctx(s2)],
                });
            }
        }
    }
    let mut terms = Vec::new();
    let mut term_seen = HashSet::new();
    let mut visited: HashSet<Arc<ExecState>> = HashSet::new();
    let mut queue: VecDeque<Arc<ExecState>> = VecDeque::new();
    for seed in seeds {
        let seed = Arc::new(seed);
        if visited.insert(seed.clone()) {
            queue.push_back(seed);
        }
    }
    while let Some(q) = queue.pop_front() {
        if visited.len() > ctx.config.state_limit {
            return Err(Error::StateSpaceCeiling(ctx.config.state_limit));
        }
        if q.is_solution() {
            let t = cterm(ctx, &q)?;
            if term_seen.insert(t.clone()) {
                terms.push(t);
            }
        }
        let st = steps_with(ctx, &q, budget)?;
        for next in st
            .control
            .into_iter()
            .chain(st.system.into_iter().map(|(s, _)| s))
        {
            let next = Arc::new(next);
            if visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(terms
        .into_iter()
        .map(|t| {
            (
                ExecState::Term {
                    subject: t,
                    stack: rest.to_vec(),
                },
                TransitionLabel::Opaque(name.to_string()),
            )
        })
        .collect())
}

/// The `⇒` relation: the closure of control steps followed by one system
/// step, deduplicated by canonical state equality.
pub fn successors(
    ctx: &EngineCtx,
    q: &ExecState,
) -> Result<Vec<(Arc<ExecState>, TransitionLabel)>> {
    let budget = Budget::new(ctx.config.reduce_ceiling);
    let mut visited: HashSet<Arc<ExecState>> = HashSet::new();
    let mut queue: VecDeque<Arc<ExecState>> = VecDeque::new();
    let start = Arc::new(q.clone());
    visited.insert(start.clone());
    queue.push_back(start);
    let mut out: Vec<(Arc<ExecState>, TransitionLabel)> = Vec::new();
    let mut out_seen: HashSet<(Arc<ExecState>, TransitionLabel)> = HashSet::new();
    while let Some(state) = queue.pop_front() {
        if visited.len() > ctx.config.state_limit {
            return Err(Error::StateSpaceCeiling(ctx.config.state_limit));
        }
        let st = steps_with(ctx, &state, &budget)?;
        for (s, lbl) in st.system {
            let s = Arc::new(s);
            if out_seen.insert((s.clone(), lbl.clone())) {
                out.push((s, lbl));
            }
        }
        for c in st.control {
            let c = Arc::new(c);
            if visited.insert(c.clone()) {
                queue.push_back(c);
            }
        }
    }
    Ok(out)
}

/// Membership in `Sol`: can an empty-stack state be reached by control
/// steps alone?
pub fn solution_reachable(ctx: &EngineCtx, q: &ExecState) -> Result<bool> {
    let budget = Budget::new(ctx.config.reduce_ceiling);
    let mut visited: HashSet<Arc<ExecState>> = HashSet::new();
    let mut queue: VecDeque<Arc<ExecState>> = VecDeque::new();
    let start = Arc::new(q.clone());
    visited.insert(start.clone());
    queue.push_back(start);
    while let Some(state) = queue.pop_front() {
        if visited.len() > ctx.config.state_limit {
            return Err(Error::StateSpaceCeiling(ctx.config.state_limit));
        }
        if state.is_solution() {
            return Ok(true);
        }
        for c in steps_with(ctx, &state, &budget)?.control {
            let c = Arc::new(c);
            if visited.insert(c.clone()) {
                queue.push_back(c);
            }
        }
    }
    Ok(false)
}

/// Exhaustive bounded search over both transition kinds for any solution
/// state; decides the negative branch of the conditional.
pub fn solution_search(ctx: &EngineCtx, q: &ExecState) -> Result<bool> {
    let budget = Budget::new(ctx.config.reduce_ceiling);
    let mut visited: HashSet<Arc<ExecState>> = HashSet::new();
    let mut queue: VecDeque<Arc<ExecState>> = VecDeque::new();
    let start = Arc::new(q.clone());
    visited.insert(start.clone());
    queue.push_back(start);
    while let Some(state) = queue.pop_front() {
        if visited.len() > ctx.config.state_limit {
            return Err(Error::StateSpaceCeiling(ctx.config.state_limit));
        }
        if state.is_solution() {
            return Ok(true);
        }
        let st = steps_with(ctx, &state, &budget)?;
        for next in st
            .control
            .into_iter()
            .chain(st.system.into_iter().map(|(s, _)| s))
        {
            let next = Arc::new(next);
            if visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOrder {
    Breadth,
    Depth,
}

/// Enumerates the terms of the solution states reachable under the
/// strategy, duplicates suppressed, up to `limit` results.
pub fn srewrite(
    ctx: &EngineCtx,
    t: &Term,
    strat: &Arc<StrategyExpr>,
    order: SearchOrder,
    limit: Option<usize>,
) -> Result<Vec<Term>> {
    let budget = Budget::new(ctx.config.reduce_ceiling);
    let t0 = reduce_with(ctx.module, t, &budget)?;
    let start = Arc::new(ExecState::start(t0, desugar(strat)));
    let mut visited: HashSet<Arc<ExecState>> = HashSet::new();
    let mut queue: VecDeque<Arc<ExecState>> = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    let mut results = Vec::new();
    let mut seen_terms = HashSet::new();
    while let Some(state) = match order {
        SearchOrder::Breadth => queue.pop_front(),
        SearchOrder::Depth => queue.pop_back(),
    } {
        if visited.len() > ctx.config.state_limit {
            return Err(Error::StateSpaceCeiling(ctx.config.state_limit));
        }
        if state.is_solution() {
            let t = cterm(ctx, &state)?;
            if seen_terms.insert(t.clone()) {
                results.push(t);
                if let Some(max) = limit {
                    if results.len() >= max {
                        return Ok(results);
                    }
                }
            }
        }
        let st = steps_with(ctx, &state, &budget)?;
        let nexts: Vec<ExecState> = match order {
            SearchOrder::Breadth => st
                .control
                .into_iter()
                .chain(st.system.into_iter().map(|(s, _)| s))
                .collect(),
            SearchOrder::Depth => {
                // Reverse so the first successor is explored first.
                let mut v: Vec<ExecState> = st
                    .control
                    .into_iter()
                    .chain(st.system.into_iter().map(|(s, _)| s))
                    .collect();
                v.reverse();
                v
            }
        };
        for next in nexts {
            let next = Arc::new(next);
            if visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(results)
}
