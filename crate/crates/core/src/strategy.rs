//! Resolved strategy expressions and the desugaring of the derived
//! combinators into the core grammar.

use std::sync::Arc;

use crate::module::ConditionFragment;
use crate::term::{Term, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    Top,
    Anywhere,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleTarget {
    Label(String),
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StrategyExpr {
    Idle,
    Fail,
    RuleApp {
        target: RuleTarget,
        /// The bracketed substitution, applied to the rule before matching.
        subst: Vec<(Var, Term)>,
        /// One strategy per rewriting condition fragment of the rule.
        cond_strats: Vec<Arc<StrategyExpr>>,
        top: bool,
    },
    Test {
        mode: MatchMode,
        ext: bool,
        pattern: Term,
        cond: Vec<ConditionFragment>,
    },
    Seq(Arc<StrategyExpr>, Arc<StrategyExpr>),
    Union(Arc<StrategyExpr>, Arc<StrategyExpr>),
    Star(Arc<StrategyExpr>),
    Conditional(Arc<StrategyExpr>, Arc<StrategyExpr>, Arc<StrategyExpr>),
    MatchRew {
        mode: MatchMode,
        ext: bool,
        pattern: Term,
        cond: Vec<ConditionFragment>,
        parts: Vec<(Var, Arc<StrategyExpr>)>,
    },
    Call {
        name: String,
        args: Vec<Term>,
    },
    // Derived combinators, removed by `desugar`.
    Plus(Arc<StrategyExpr>),
    Bang(Arc<StrategyExpr>),
    OrElse(Arc<StrategyExpr>, Arc<StrategyExpr>),
    Not(Arc<StrategyExpr>),
    Try(Arc<StrategyExpr>),
    TestComb(Arc<StrategyExpr>),
}

impl StrategyExpr {
    pub fn is_core(&self) -> bool {
        use StrategyExpr::*;
        match self {
            Idle | Fail => true,
            RuleApp { cond_strats, .. } => cond_strats.iter().all(|s| s.is_core()),
            Test { .. } => true,
            Seq(a, b) | Union(a, b) => a.is_core() && b.is_core(),
            Star(a) => a.is_core(),
            Conditional(a, b, c) => a.is_core() && b.is_core() && c.is_core(),
            MatchRew { parts, .. } => parts.iter().all(|(_, s)| s.is_core()),
            Call { .. } => true,
            Plus(_) | Bang(_) | OrElse(_, _) | Not(_) | Try(_) | TestComb(_) => false,
        }
    }
}

/// Rewrites the derived combinators into the core grammar:
/// `a or-else b` as `a ? idle : b`, `try(a)` as `a ? idle : idle`,
/// `a +` as `a ; a *`, `a !` as `a * ; not(a)`, `test(a)` as `not(not(a))`,
/// and `not(a)` as the conditional that fails exactly when `a` succeeds,
/// discarding its rewrites.
pub fn desugar(e: &Arc<StrategyExpr>) -> Arc<StrategyExpr> {
    use StrategyExpr::*;
    match &**e {
        Idle | Fail | Call { .. } | Test { .. } => e.clone(),
        RuleApp {
            target,
            subst,
            cond_strats,
            top,
        } => {
            let ds: Vec<_> = cond_strats.iter().map(desugar).collect();
            if ds.iter().zip(cond_strats).all(|(a, b)| Arc::ptr_eq(a, b)) {
                e.clone()
            } else {
                Arc::new(RuleApp {
                    target: target.clone(),
                    subst: subst.clone(),
                    cond_strats: ds,
                    top: *top,
                })
            }
        }
        Seq(a, b) => Arc::new(Seq(desugar(a), desugar(b))),
        Union(a, b) => Arc::new(Union(desugar(a), desugar(b))),
        Star(a) => Arc::new(Star(desugar(a))),
        Conditional(a, b, c) => Arc::new(Conditional(desugar(a), desugar(b), desugar(c))),
        MatchRew {
            mode,
            ext,
            pattern,
            cond,
            parts,
        } => Arc::new(MatchRew {
            mode: *mode,
            ext: *ext,
            pattern: pattern.clone(),
            cond: cond.clone(),
            parts: parts.iter().map(|(v, s)| (v.clone(), desugar(s))).collect(),
        }),
        Plus(a) => {
            let da = desugar(a);
            Arc::new(Seq(da.clone(), Arc::new(Star(da))))
        }
        Bang(a) => {
            let da = desugar(a);
            Arc::new(Seq(Arc::new(Star(da.clone())), not_core(da)))
        }
        OrElse(a, b) => Arc::new(Conditional(desugar(a), Arc::new(Idle), desugar(b))),
        Not(a) => not_core(desugar(a)),
        Try(a) => Arc::new(Conditional(desugar(a), Arc::new(Idle), Arc::new(Idle))),
        TestComb(a) => not_core(not_core(desugar(a))),
    }
}

fn not_core(a: Arc<StrategyExpr>) -> Arc<StrategyExpr> {
    Arc::new(StrategyExpr::Conditional(
        a,
        Arc::new(StrategyExpr::Fail),
        Arc::new(StrategyExpr::Idle),
    ))
}
