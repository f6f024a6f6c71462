//! Import resolution and module flattening: the union of all transitively
//! imported declarations over the builtin prelude, with raw parse trees
//! resolved into canonical terms and strategy expressions. Variables scope
//! to the module that declares them.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::module::{
    ConditionFragment, Equation, ModuleKind, OpDecl, OpId, Rule, SortId, SpecModule, StratDecl,
    StratDef,
};
use crate::strategy::{MatchMode, RuleTarget, StrategyExpr};
use crate::syntax::ast::*;
use crate::syntax::parse;
use crate::term::{Term, Var};

pub(crate) struct TermResolver<'a> {
    pub m: &'a SpecModule,
    /// Variable scope; `None` falls back to the union of every module's
    /// declarations (used when parsing user-supplied text).
    pub local_vars: Option<&'a HashMap<String, SortId>>,
}

impl<'a> TermResolver<'a> {
    fn var_sort(&self, name: &str) -> Option<SortId> {
        match self.local_vars {
            Some(map) => map.get(name).copied(),
            None => self.m.declared_var_sort(name),
        }
    }

    pub fn term(&self, raw: &RawTerm) -> Result<Term> {
        match raw {
            RawTerm::Int(n) => Ok(Term::int(self.m, *n)),
            RawTerm::Qid(q) => Ok(Term::qid(self.m, q.clone())),
            RawTerm::AnnotatedVar { name, sort } => {
                let sort = self
                    .m
                    .sort_id(sort)
                    .ok_or_else(|| Error::UnknownSort(sort.clone()))?;
                Ok(Term::var(Var {
                    name: name.clone(),
                    sort,
                }))
            }
            RawTerm::Apply { name, args } => {
                if args.is_empty() {
                    if let Some(sort) = self.var_sort(name) {
                        return Ok(Term::var(Var {
                            name: name.clone(),
                            sort,
                        }));
                    }
                }
                let rargs = args
                    .iter()
                    .map(|a| self.term(a))
                    .collect::<Result<Vec<_>>>()?;
                self.apply_op(name, rargs)
            }
        }
    }

    fn apply_op(&self, name: &str, args: Vec<Term>) -> Result<Term> {
        let n = args.len();
        let mut fam: Vec<OpId> = self.m.family(name, n).to_vec();
        if fam.is_empty() && n > 2 {
            fam = self
                .m
                .family(name, 2)
                .iter()
                .copied()
                .filter(|id| self.m.op(*id).assoc)
                .collect();
        }
        if fam.is_empty() {
            return Err(Error::UnknownIdentifier(name.to_string()));
        }
        let mut built = Vec::new();
        for id in &fam {
            if let Ok(t) = Term::make(self.m, *id, args.clone()) {
                built.push(t);
            }
        }
        built.dedup();
        match built.len() {
            0 => {
                let shown: Vec<String> = args
                    .iter()
                    .map(|a| self.m.sort_name(a.sort()).to_string())
                    .collect();
                Err(Error::NoSort(format!("{name}({})", shown.join(", "))))
            }
            1 => Ok(built.pop().unwrap()),
            _ => Err(Error::AmbiguousOverload {
                name: name.to_string(),
                candidates: fam
                    .iter()
                    .map(|id| {
                        let d = self.m.op(*id);
                        let args: Vec<&str> =
                            d.args.iter().map(|s| self.m.sort_name(*s)).collect();
                        format!(
                            "{} : {} -> {}",
                            d.name,
                            args.join(" "),
                            self.m.sort_name(d.result)
                        )
                    })
                    .collect(),
            }),
        }
    }

    pub fn fragment(&self, raw: &RawFragment) -> Result<ConditionFragment> {
        Ok(match raw {
            RawFragment::Equality(a, b) => {
                ConditionFragment::Equality(self.term(a)?, self.term(b)?)
            }
            RawFragment::Assign(p, t) => ConditionFragment::Assign(self.term(p)?, self.term(t)?),
            RawFragment::SortTest(t, s) => {
                let sort = self
                    .m
                    .sort_id(s)
                    .ok_or_else(|| Error::UnknownSort(s.clone()))?;
                ConditionFragment::SortTest(self.term(t)?, sort)
            }
            RawFragment::Rewrite(l, p) => {
                ConditionFragment::Rewrite(self.term(l)?, self.term(p)?)
            }
        })
    }

    pub fn fragments(&self, raw: &[RawFragment]) -> Result<Vec<ConditionFragment>> {
        raw.iter().map(|f| self.fragment(f)).collect()
    }

    pub fn strategy(&self, raw: &RawStrategy) -> Result<Arc<StrategyExpr>> {
        Ok(Arc::new(match raw {
            RawStrategy::Idle => StrategyExpr::Idle,
            RawStrategy::Fail => StrategyExpr::Fail,
            RawStrategy::All => StrategyExpr::RuleApp {
                target: RuleTarget::All,
                subst: Vec::new(),
                cond_strats: Vec::new(),
                top: false,
            },
            RawStrategy::Top(inner) => {
                let resolved = self.strategy(inner)?;
                match &*resolved {
                    StrategyExpr::RuleApp {
                        target,
                        subst,
                        cond_strats,
                        ..
                    } => StrategyExpr::RuleApp {
                        target: target.clone(),
                        subst: subst.clone(),
                        cond_strats: cond_strats.clone(),
                        top: true,
                    },
                    _ => {
                        return Err(Error::Other(
                            "top(..) applies only to rule applications".into(),
                        ))
                    }
                }
            }
            RawStrategy::RuleApp {
                label,
                subst,
                cond_strats,
            } => {
                if !self.m.has_rule_label(label) {
                    return Err(Error::UnknownRuleLabel(label.clone()));
                }
                let mut pairs = Vec::new();
                for (name, t) in subst {
                    let sort = self
                        .var_sort(name)
                        .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                    pairs.push((
                        Var {
                            name: name.clone(),
                            sort,
                        },
                        self.term(t)?,
                    ));
                }
                StrategyExpr::RuleApp {
                    target: RuleTarget::Label(label.clone()),
                    subst: pairs,
                    cond_strats: cond_strats
                        .iter()
                        .map(|s| self.strategy(s))
                        .collect::<Result<Vec<_>>>()?,
                    top: false,
                }
            }
            RawStrategy::Test {
                kind,
                pattern,
                cond,
            } => {
                let (mode, ext) = test_kind_flags(*kind);
                StrategyExpr::Test {
                    mode,
                    ext,
                    pattern: self.term(pattern)?,
                    cond: self.fragments(cond)?,
                }
            }
            RawStrategy::MatchRew {
                kind,
                pattern,
                cond,
                parts,
            } => {
                let (mode, ext) = test_kind_flags(*kind);
                let pattern = self.term(pattern)?;
                let pattern_vars = pattern.vars();
                let mut seen = HashSet::new();
                let mut rparts = Vec::new();
                for (name, s) in parts {
                    let sort = self
                        .var_sort(name)
                        .ok_or_else(|| Error::UnknownIdentifier(name.clone()))?;
                    let v = Var {
                        name: name.clone(),
                        sort,
                    };
                    if !pattern_vars.contains(&v) {
                        return Err(Error::Other(format!(
                            "matchrew variable `{name}` does not occur in the pattern"
                        )));
                    }
                    if !seen.insert(v.clone()) {
                        return Err(Error::Other(format!(
                            "matchrew variable `{name}` is repeated"
                        )));
                    }
                    rparts.push((v, self.strategy(s)?));
                }
                StrategyExpr::MatchRew {
                    mode,
                    ext,
                    pattern,
                    cond: self.fragments(cond)?,
                    parts: rparts,
                }
            }
            RawStrategy::Seq(a, b) => StrategyExpr::Seq(self.strategy(a)?, self.strategy(b)?),
            RawStrategy::Union(a, b) => StrategyExpr::Union(self.strategy(a)?, self.strategy(b)?),
            RawStrategy::Star(a) => StrategyExpr::Star(self.strategy(a)?),
            RawStrategy::Plus(a) => StrategyExpr::Plus(self.strategy(a)?),
            RawStrategy::Bang(a) => StrategyExpr::Bang(self.strategy(a)?),
            RawStrategy::Conditional(a, b, c) => {
                StrategyExpr::Conditional(self.strategy(a)?, self.strategy(b)?, self.strategy(c)?)
            }
            RawStrategy::OrElse(a, b) => {
                StrategyExpr::OrElse(self.strategy(a)?, self.strategy(b)?)
            }
            RawStrategy::Not(a) => StrategyExpr::Not(self.strategy(a)?),
            RawStrategy::Try(a) => StrategyExpr::Try(self.strategy(a)?),
            RawStrategy::TestComb(a) => StrategyExpr::TestComb(self.strategy(a)?),
            RawStrategy::Call { name, args } => {
                if self.m.strat_declared(name, args.len()) {
                    StrategyExpr::Call {
                        name: name.clone(),
                        args: args
                            .iter()
                            .map(|a| self.term(a))
                            .collect::<Result<Vec<_>>>()?,
                    }
                } else if args.is_empty() && self.m.has_rule_label(name) {
                    StrategyExpr::RuleApp {
                        target: RuleTarget::Label(name.clone()),
                        subst: Vec::new(),
                        cond_strats: Vec::new(),
                        top: false,
                    }
                } else {
                    return Err(Error::UnknownStrategy(name.clone()));
                }
            }
        }))
    }
}

fn test_kind_flags(kind: TestKind) -> (MatchMode, bool) {
    match kind {
        TestKind::Plain => (MatchMode::Top, false),
        TestKind::Extension => (MatchMode::Top, true),
        TestKind::Anywhere => (MatchMode::Anywhere, false),
    }
}

/// Flattens the named module together with its transitive imports into one
/// executable module over the prelude.
pub fn flatten(name: &str, modules: &[ParsedModule]) -> Result<SpecModule> {
    let mut by_name: HashMap<&str, &ParsedModule> = HashMap::new();
    for pm in modules {
        if by_name.insert(pm.name.as_str(), pm).is_some() {
            return Err(Error::DuplicateDeclaration(format!("module {}", pm.name)));
        }
    }
    let target = *by_name
        .get(name)
        .ok_or_else(|| Error::MissingModule(name.to_string()))?;

    // Topological order over imports, each module once.
    let mut order: Vec<&ParsedModule> = Vec::new();
    let mut state: HashMap<&str, u8> = HashMap::new();
    fn visit<'a>(
        pm: &'a ParsedModule,
        by_name: &HashMap<&str, &'a ParsedModule>,
        state: &mut HashMap<&'a str, u8>,
        order: &mut Vec<&'a ParsedModule>,
    ) -> Result<()> {
        match state.get(pm.name.as_str()) {
            Some(2) => return Ok(()),
            Some(1) => return Err(Error::CyclicImport(pm.name.clone())),
            _ => {}
        }
        state.insert(&pm.name, 1);
        for d in &pm.decls {
            if let RawDecl::Import(dep) = d {
                let dep_pm = by_name
                    .get(dep.as_str())
                    .ok_or_else(|| Error::MissingModule(dep.clone()))?;
                visit(dep_pm, by_name, state, order)?;
            }
        }
        state.insert(&pm.name, 2);
        order.push(pm);
        Ok(())
    }
    visit(target, &by_name, &mut state, &mut order)?;

    let mut m = SpecModule::with_prelude(name, target.kind);

    for pm in &order {
        for d in &pm.decls {
            if let RawDecl::Sorts(names) = d {
                for s in names {
                    m.add_sort(s)?;
                }
            }
        }
    }
    for pm in &order {
        for d in &pm.decls {
            if let RawDecl::Subsort(groups) = d {
                for pair in groups.windows(2) {
                    for a in &pair[0] {
                        for b in &pair[1] {
                            let sa = m
                                .sort_id(a)
                                .ok_or_else(|| Error::UnknownSort(a.clone()))?;
                            let sb = m
                                .sort_id(b)
                                .ok_or_else(|| Error::UnknownSort(b.clone()))?;
                            m.add_subsort(sa, sb)?;
                        }
                    }
                }
            }
        }
    }
    let mut pending_identities: Vec<(OpId, RawTerm)> = Vec::new();
    for pm in &order {
        for d in &pm.decls {
            if let RawDecl::Op {
                names,
                args,
                result,
                attrs,
            } = d
            {
                let arg_ids = args
                    .iter()
                    .map(|s| m.sort_id(s).ok_or_else(|| Error::UnknownSort(s.clone())))
                    .collect::<Result<Vec<_>>>()?;
                let result_id = m
                    .sort_id(result)
                    .ok_or_else(|| Error::UnknownSort(result.clone()))?;
                for n in names {
                    let id = m.add_op(OpDecl {
                        name: n.clone(),
                        args: arg_ids.clone(),
                        result: result_id,
                        assoc: attrs.assoc,
                        comm: attrs.comm,
                        identity: None,
                        ctor: attrs.ctor,
                        frozen: attrs.frozen,
                        builtin: None,
                    })?;
                    if let Some(idt) = &attrs.identity {
                        pending_identities.push((id, idt.clone()));
                    }
                }
            }
        }
    }
    let empty_vars = HashMap::new();
    for (op, raw) in pending_identities {
        let t = {
            let r = TermResolver {
                m: &m,
                local_vars: Some(&empty_vars),
            };
            r.term(&raw)?
        };
        m.set_identity(op, t);
    }

    let mut def_seen: HashSet<(String, Vec<Term>, Vec<ConditionFragment>, Arc<StrategyExpr>)> =
        HashSet::new();
    for pm in &order {
        // Strategy declarations first so definitions in the same module
        // resolve their calls.
        for d in &pm.decls {
            if let RawDecl::StratDecl {
                names,
                params,
                subject,
            } = d
            {
                if pm.kind != ModuleKind::Strategy {
                    return Err(Error::Other(format!(
                        "strategy declaration outside an smod in {}",
                        pm.name
                    )));
                }
                let param_ids = params
                    .iter()
                    .map(|s| m.sort_id(s).ok_or_else(|| Error::UnknownSort(s.clone())))
                    .collect::<Result<Vec<_>>>()?;
                let subject_id = m
                    .sort_id(subject)
                    .ok_or_else(|| Error::UnknownSort(subject.clone()))?;
                for n in names {
                    m.strat_decls.push(StratDecl {
                        name: n.clone(),
                        params: param_ids.clone(),
                        subject: subject_id,
                    });
                }
            }
        }

        let mut local: HashMap<String, SortId> = HashMap::new();
        for d in &pm.decls {
            if let RawDecl::Var { names, sort } = d {
                let sid = m
                    .sort_id(sort)
                    .ok_or_else(|| Error::UnknownSort(sort.clone()))?;
                for n in names {
                    local.insert(n.clone(), sid);
                }
            }
        }

        let mut equations: Vec<Equation> = Vec::new();
        let mut rules: Vec<Rule> = Vec::new();
        let mut defs: Vec<StratDef> = Vec::new();
        {
            let r = TermResolver {
                m: &m,
                local_vars: Some(&local),
            };
            for d in &pm.decls {
                match d {
                    RawDecl::Eq {
                        lhs,
                        rhs,
                        cond,
                        owise,
                    } => {
                        let eq = Equation {
                            lhs: r.term(lhs)?,
                            rhs: r.term(rhs)?,
                            cond: r.fragments(cond)?,
                            owise: *owise,
                        };
                        validate_equation(&eq)?;
                        equations.push(eq);
                    }
                    RawDecl::Rule {
                        label,
                        lhs,
                        rhs,
                        cond,
                    } => {
                        if pm.kind == ModuleKind::Functional {
                            return Err(Error::Other(format!(
                                "rule in functional module {}",
                                pm.name
                            )));
                        }
                        rules.push(Rule {
                            label: label.clone(),
                            lhs: r.term(lhs)?,
                            rhs: r.term(rhs)?,
                            cond: r.fragments(cond)?,
                        });
                    }
                    RawDecl::StratDef {
                        name,
                        params,
                        body,
                        cond,
                    } => {
                        if pm.kind != ModuleKind::Strategy {
                            return Err(Error::Other(format!(
                                "strategy definition outside an smod in {}",
                                pm.name
                            )));
                        }
                        if !m.strat_declared(name, params.len()) {
                            return Err(Error::UnknownStrategy(name.clone()));
                        }
                        let rparams = params
                            .iter()
                            .map(|p| r.term(p))
                            .collect::<Result<Vec<_>>>()?;
                        let rcond = r.fragments(cond)?;
                        for f in &rcond {
                            if f.is_rewrite() {
                                return Err(Error::Other(format!(
                                    "rewriting fragment in the condition of strategy {name}"
                                )));
                            }
                        }
                        let rbody = r.strategy(body)?;
                        defs.push(StratDef {
                            name: name.clone(),
                            params: rparams,
                            cond: rcond,
                            body: rbody,
                        });
                    }
                    _ => {}
                }
            }
        }
        for (n, s) in local {
            m.add_var(&n, s);
        }
        m.equations.extend(equations);
        for rule in rules {
            m.add_rule(rule);
        }
        for def in defs {
            let key = (
                def.name.clone(),
                def.params.clone(),
                def.cond.clone(),
                def.body.clone(),
            );
            if !def_seen.insert(key) {
                return Err(Error::DuplicateDeclaration(format!(
                    "strategy definition for {}",
                    def.name
                )));
            }
            check_def_vars(&def)?;
            m.strat_defs.push(def);
        }
    }
    Ok(m)
}

fn validate_equation(eq: &Equation) -> Result<()> {
    if eq.lhs.is_var() {
        return Err(Error::Other(
            "equation left-hand side is a bare variable".into(),
        ));
    }
    let mut bound: HashSet<Var> = eq.lhs.vars().into_iter().collect();
    for f in &eq.cond {
        match f {
            ConditionFragment::Equality(a, b) => {
                require_bound(a, &bound)?;
                require_bound(b, &bound)?;
            }
            ConditionFragment::Assign(p, t) => {
                require_bound(t, &bound)?;
                bound.extend(p.vars());
            }
            ConditionFragment::SortTest(t, _) => require_bound(t, &bound)?,
            ConditionFragment::Rewrite(_, _) => {
                return Err(Error::Other(
                    "rewriting fragment in an equation condition".into(),
                ))
            }
        }
    }
    require_bound(&eq.rhs, &bound)
}

fn require_bound(t: &Term, bound: &HashSet<Var>) -> Result<()> {
    for v in t.vars() {
        if !bound.contains(&v) {
            return Err(Error::UnboundVariable(v.name));
        }
    }
    Ok(())
}

/// Free variables of a definition body must come from the parameters, the
/// condition, or binders introduced by enclosing tests and matchrews.
fn check_def_vars(def: &StratDef) -> Result<()> {
    let mut bound: HashSet<Var> = HashSet::new();
    for p in &def.params {
        bound.extend(p.vars());
    }
    for f in &def.cond {
        if let ConditionFragment::Assign(p, _) = f {
            bound.extend(p.vars());
        }
    }
    check_strat_vars(&def.body, &bound)
}

fn check_strat_vars(e: &StrategyExpr, bound: &HashSet<Var>) -> Result<()> {
    use StrategyExpr::*;
    match e {
        Idle | Fail => Ok(()),
        RuleApp {
            subst, cond_strats, ..
        } => {
            for (_, t) in subst {
                require_bound(t, bound)?;
            }
            for s in cond_strats {
                check_strat_vars(s, bound)?;
            }
            Ok(())
        }
        Test { pattern, cond, .. } => {
            let mut inner = bound.clone();
            inner.extend(pattern.vars());
            thread_cond_binders(cond, &mut inner)
        }
        MatchRew {
            pattern,
            cond,
            parts,
            ..
        } => {
            let mut inner = bound.clone();
            inner.extend(pattern.vars());
            thread_cond_binders(cond, &mut inner)?;
            for (_, s) in parts {
                check_strat_vars(s, &inner)?;
            }
            Ok(())
        }
        Seq(a, b) | Union(a, b) | OrElse(a, b) => {
            check_strat_vars(a, bound)?;
            check_strat_vars(b, bound)
        }
        Star(a) | Plus(a) | Bang(a) | Not(a) | Try(a) | TestComb(a) => check_strat_vars(a, bound),
        Conditional(a, b, c) => {
            check_strat_vars(a, bound)?;
            check_strat_vars(b, bound)?;
            check_strat_vars(c, bound)
        }
        Call { args, .. } => {
            for t in args {
                require_bound(t, bound)?;
            }
            Ok(())
        }
    }
}

fn thread_cond_binders(cond: &[ConditionFragment], bound: &mut HashSet<Var>) -> Result<()> {
    for f in cond {
        match f {
            ConditionFragment::Equality(a, b) => {
                require_bound(a, bound)?;
                require_bound(b, bound)?;
            }
            ConditionFragment::Assign(p, t) => {
                require_bound(t, bound)?;
                bound.extend(p.vars());
            }
            ConditionFragment::SortTest(t, _) => require_bound(t, bound)?,
            ConditionFragment::Rewrite(_, _) => {
                return Err(Error::Other(
                    "rewriting fragment in a strategy condition".into(),
                ))
            }
        }
    }
    Ok(())
}

/// Parses and resolves a term against a flattened module.
pub fn parse_term(text: &str, m: &SpecModule) -> Result<Term> {
    let raw = parse::parse_term_text(text)?;
    let r = TermResolver {
        m,
        local_vars: None,
    };
    r.term(&raw)
}

/// Parses and resolves a strategy expression against a flattened module.
pub fn parse_strategy_expr(text: &str, m: &SpecModule) -> Result<Arc<StrategyExpr>> {
    let raw = parse::parse_strategy_text(text)?;
    let r = TermResolver {
        m,
        local_vars: None,
    };
    r.strategy(&raw)
}
