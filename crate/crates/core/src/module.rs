//! Flattened specification modules: the order-sorted signature, equations,
//! rules, strategy declarations and definitions, plus the builtin prelude
//! (booleans, integer arithmetic, quoted identifiers, and the formula
//! constructors used for temporal properties).

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::strategy::StrategyExpr;
use crate::term::{Head, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SortId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleKind {
    Functional,
    System,
    Strategy,
}

/// Builtin operators evaluated natively during reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Succ,
    Plus,
    Minus,
    Times,
    Rem,
    Divides,
    Lte,
    Lt,
    BoolAnd,
    BoolOr,
    BoolNot,
}

#[derive(Debug, Clone)]
pub struct OpDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub result: SortId,
    pub assoc: bool,
    pub comm: bool,
    pub identity: Option<Term>,
    pub ctor: bool,
    pub frozen: bool,
    pub builtin: Option<Builtin>,
}

/// One fragment of a statement condition, evaluated left to right.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConditionFragment {
    /// `t = t'` — both sides reduce to the same canonical form.
    Equality(Term, Term),
    /// `p := t` — `t` is reduced and matched against the pattern `p`,
    /// possibly extending the substitution in several ways.
    Assign(Term, Term),
    /// `t : s` — the least sort of the reduced `t` is below `s`.
    SortTest(Term, SortId),
    /// `l => p` — a rewriting condition; only allowed in rules.
    Rewrite(Term, Term),
}

impl ConditionFragment {
    pub fn is_rewrite(&self) -> bool {
        matches!(self, ConditionFragment::Rewrite(_, _))
    }
}

#[derive(Debug, Clone)]
pub struct Equation {
    pub lhs: Term,
    pub rhs: Term,
    pub cond: Vec<ConditionFragment>,
    pub owise: bool,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub label: String,
    pub lhs: Term,
    pub rhs: Term,
    pub cond: Vec<ConditionFragment>,
}

impl Rule {
    pub fn rewrite_fragments(&self) -> usize {
        self.cond.iter().filter(|f| f.is_rewrite()).count()
    }
}

#[derive(Debug, Clone)]
pub struct StratDecl {
    pub name: String,
    pub params: Vec<SortId>,
    pub subject: SortId,
}

#[derive(Debug, Clone)]
pub struct StratDef {
    pub name: String,
    pub params: Vec<Term>,
    pub cond: Vec<ConditionFragment>,
    pub body: Arc<StrategyExpr>,
}

/// Well-known prelude identifiers, resolved once at module construction.
#[derive(Debug, Clone)]
pub struct PreludeIds {
    pub bool_sort: SortId,
    pub zero_sort: SortId,
    pub nznat_sort: SortId,
    pub nat_sort: SortId,
    pub int_sort: SortId,
    pub qid_sort: SortId,
    pub prop_sort: SortId,
    pub formula_sort: SortId,
    pub state_sort: SortId,
    pub op_true: OpId,
    pub op_false: OpId,
    pub op_satisfies: OpId,
    pub f_true: OpId,
    pub f_false: OpId,
    pub f_not: OpId,
    pub f_and: OpId,
    pub f_or: OpId,
    pub f_implies: OpId,
    pub f_next: OpId,
    pub f_eventually: OpId,
    pub f_always: OpId,
    pub f_until: OpId,
}

#[derive(Debug, Clone)]
pub struct SpecModule {
    pub name: String,
    pub kind: ModuleKind,
    sort_names: Vec<String>,
    sort_ids: HashMap<String, SortId>,
    /// Reflexive-transitive closure of the declared subsort pairs.
    leq: Vec<Vec<bool>>,
    declared_pairs: Vec<(SortId, SortId)>,
    ops: Vec<OpDecl>,
    families: HashMap<(String, usize), Vec<OpId>>,
    vars: HashMap<String, SortId>,
    pub equations: Vec<Equation>,
    pub rules: Vec<Rule>,
    rules_by_label: HashMap<String, Vec<usize>>,
    pub strat_decls: Vec<StratDecl>,
    pub strat_defs: Vec<StratDef>,
    pub prelude: PreludeIds,
}

impl SpecModule {
    /// Creates an empty module containing only the builtin prelude.
    pub fn with_prelude(name: impl Into<String>, kind: ModuleKind) -> SpecModule {
        let mut m = SpecModule {
            name: name.into(),
            kind,
            sort_names: Vec::new(),
            sort_ids: HashMap::new(),
            leq: Vec::new(),
            declared_pairs: Vec::new(),
            ops: Vec::new(),
            families: HashMap::new(),
            vars: HashMap::new(),
            equations: Vec::new(),
            rules: Vec::new(),
            rules_by_label: HashMap::new(),
            strat_decls: Vec::new(),
            strat_defs: Vec::new(),
            prelude: PreludeIds {
                bool_sort: SortId(0),
                zero_sort: SortId(0),
                nznat_sort: SortId(0),
                nat_sort: SortId(0),
                int_sort: SortId(0),
                qid_sort: SortId(0),
                prop_sort: SortId(0),
                formula_sort: SortId(0),
                state_sort: SortId(0),
                op_true: OpId(0),
                op_false: OpId(0),
                op_satisfies: OpId(0),
                f_true: OpId(0),
                f_false: OpId(0),
                f_not: OpId(0),
                f_and: OpId(0),
                f_or: OpId(0),
                f_implies: OpId(0),
                f_next: OpId(0),
                f_eventually: OpId(0),
                f_always: OpId(0),
                f_until: OpId(0),
            },
        };
        m.install_prelude();
        m
    }

    fn install_prelude(&mut self) {
        let bool_s = self.add_sort("Bool").unwrap();
        let zero = self.add_sort("Zero").unwrap();
        let nznat = self.add_sort("NzNat").unwrap();
        let nat = self.add_sort("Nat").unwrap();
        let int = self.add_sort("Int").unwrap();
        let qid = self.add_sort("Qid").unwrap();
        let prop = self.add_sort("Prop").unwrap();
        let formula = self.add_sort("Formula").unwrap();
        let state = self.add_sort("State").unwrap();
        self.add_subsort(zero, nat).unwrap();
        self.add_subsort(nznat, nat).unwrap();
        self.add_subsort(nat, int).unwrap();
        self.add_subsort(prop, formula).unwrap();

        let plain = |name: &str, args: Vec<SortId>, result: SortId| OpDecl {
            name: name.into(),
            args,
            result,
            assoc: false,
            comm: false,
            identity: None,
            ctor: true,
            frozen: false,
            builtin: None,
        };
        let builtin = |name: &str, args: Vec<SortId>, result: SortId, b: Builtin| OpDecl {
            builtin: Some(b),
            ctor: false,
            ..plain(name, args, result)
        };

        let op_true = self.add_op(plain("true", vec![], bool_s)).unwrap();
        let op_false = self.add_op(plain("false", vec![], bool_s)).unwrap();
        self.add_op(builtin("s", vec![nat], nznat, Builtin::Succ))
            .unwrap();
        self.add_op(builtin("plus", vec![int, int], int, Builtin::Plus))
            .unwrap();
        self.add_op(builtin("minus", vec![int, int], int, Builtin::Minus))
            .unwrap();
        self.add_op(builtin("times", vec![int, int], int, Builtin::Times))
            .unwrap();
        self.add_op(builtin("rem", vec![int, nznat], nat, Builtin::Rem))
            .unwrap();
        self.add_op(builtin(
            "divides",
            vec![nznat, nat],
            bool_s,
            Builtin::Divides,
        ))
        .unwrap();
        self.add_op(builtin("lte", vec![int, int], bool_s, Builtin::Lte))
            .unwrap();
        self.add_op(builtin("lt", vec![int, int], bool_s, Builtin::Lt))
            .unwrap();
        self.add_op(builtin(
            "and",
            vec![bool_s, bool_s],
            bool_s,
            Builtin::BoolAnd,
        ))
        .unwrap();
        self.add_op(builtin("or", vec![bool_s, bool_s], bool_s, Builtin::BoolOr))
            .unwrap();
        self.add_op(builtin("not", vec![bool_s], bool_s, Builtin::BoolNot))
            .unwrap();

        let op_satisfies = self
            .add_op(OpDecl {
                frozen: true,
                ctor: false,
                ..plain("satisfies", vec![state, prop], bool_s)
            })
            .unwrap();

        let f_true = self.add_op(plain("True", vec![], formula)).unwrap();
        let f_false = self.add_op(plain("False", vec![], formula)).unwrap();
        let f_not = self.add_op(plain("Not", vec![formula], formula)).unwrap();
        let f_and = self
            .add_op(plain("And", vec![formula, formula], formula))
            .unwrap();
        let f_or = self
            .add_op(plain("Or", vec![formula, formula], formula))
            .unwrap();
        let f_implies = self
            .add_op(plain("Implies", vec![formula, formula], formula))
            .unwrap();
        let f_next = self.add_op(plain("Next", vec![formula], formula)).unwrap();
        let f_eventually = self
            .add_op(plain("Eventually", vec![formula], formula))
            .unwrap();
        let f_always = self
            .add_op(plain("Always", vec![formula], formula))
            .unwrap();
        let f_until = self
            .add_op(plain("Until", vec![formula, formula], formula))
            .unwrap();

        self.prelude = PreludeIds {
            bool_sort: bool_s,
            zero_sort: zero,
            nznat_sort: nznat,
            nat_sort: nat,
            int_sort: int,
            qid_sort: qid,
            prop_sort: prop,
            formula_sort: formula,
            state_sort: state,
            op_true,
            op_false,
            op_satisfies,
            f_true,
            f_false,
            f_not,
            f_and,
            f_or,
            f_implies,
            f_next,
            f_eventually,
            f_always,
            f_until,
        };
    }

    pub fn add_sort(&mut self, name: &str) -> Result<SortId> {
        if self.sort_ids.contains_key(name) {
            return Err(Error::DuplicateDeclaration(format!("sort {name}")));
        }
        let id = SortId(self.sort_names.len() as u32);
        self.sort_names.push(name.to_string());
        self.sort_ids.insert(name.to_string(), id);
        for row in &mut self.leq {
            row.push(false);
        }
        let n = self.sort_names.len();
        let mut row = vec![false; n];
        row[id.0 as usize] = true;
        self.leq.push(row);
        Ok(id)
    }

    /// Declares `a < b` and recomputes the closure, rejecting cycles.
    pub fn add_subsort(&mut self, a: SortId, b: SortId) -> Result<()> {
        if a == b {
            return Err(Error::Other(format!(
                "subsort {0} < {0} is reflexive",
                self.sort_name(a)
            )));
        }
        self.declared_pairs.push((a, b));
        self.leq[a.0 as usize][b.0 as usize] = true;
        let n = self.sort_names.len();
        for k in 0..n {
            for i in 0..n {
                if self.leq[i][k] {
                    for j in 0..n {
                        if self.leq[k][j] {
                            self.leq[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && self.leq[i][j] && self.leq[j][i] {
                    return Err(Error::Other(format!(
                        "subsort cycle between {} and {}",
                        self.sort_names[i], self.sort_names[j]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn add_op(&mut self, decl: OpDecl) -> Result<OpId> {
        if decl.identity.is_some() && !decl.assoc {
            return Err(Error::Other(format!(
                "operator `{}` declares an identity without assoc",
                decl.name
            )));
        }
        if decl.assoc && decl.args.len() != 2 {
            return Err(Error::Other(format!(
                "assoc operator `{}` must take exactly 2 arguments",
                decl.name
            )));
        }
        let key = (decl.name.clone(), decl.args.len());
        if let Some(existing) = self.families.get(&key) {
            for id in existing {
                let old = &self.ops[id.0 as usize];
                if old.args == decl.args && old.result == decl.result {
                    return Err(Error::DuplicateDeclaration(format!(
                        "operator {} (arity {})",
                        decl.name,
                        decl.args.len()
                    )));
                }
            }
        }
        let id = OpId(self.ops.len() as u32);
        self.ops.push(decl);
        self.families.entry(key).or_default().push(id);
        Ok(id)
    }

    pub fn add_var(&mut self, name: &str, sort: SortId) {
        self.vars.insert(name.to_string(), sort);
    }

    pub fn add_rule(&mut self, rule: Rule) {
        let idx = self.rules.len();
        self.rules_by_label
            .entry(rule.label.clone())
            .or_default()
            .push(idx);
        self.rules.push(rule);
    }

    pub fn op(&self, id: OpId) -> &OpDecl {
        &self.ops[id.0 as usize]
    }

    pub fn set_identity(&mut self, id: OpId, identity: Term) {
        self.ops[id.0 as usize].identity = Some(identity);
    }

    pub fn ops(&self) -> impl Iterator<Item = (OpId, &OpDecl)> {
        self.ops
            .iter()
            .enumerate()
            .map(|(i, d)| (OpId(i as u32), d))
    }

    pub fn identity_of(&self, id: OpId) -> Option<&Term> {
        self.ops[id.0 as usize].identity.as_ref()
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sort_ids.get(name).copied()
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sort_names[id.0 as usize]
    }

    pub fn sort_count(&self) -> usize {
        self.sort_names.len()
    }

    /// `a ≤ b` in the subsort order.
    pub fn leq(&self, a: SortId, b: SortId) -> bool {
        self.leq[a.0 as usize][b.0 as usize]
    }

    pub fn declared_var_sort(&self, name: &str) -> Option<SortId> {
        self.vars.get(name).copied()
    }

    pub fn family(&self, name: &str, arity: usize) -> &[OpId] {
        self.families
            .get(&(name.to_string(), arity))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn rules_with_label(&self, label: &str) -> Vec<&Rule> {
        self.rules_by_label
            .get(label)
            .map(|ids| ids.iter().map(|i| &self.rules[*i]).collect())
            .unwrap_or_default()
    }

    pub fn has_rule_label(&self, label: &str) -> bool {
        self.rules_by_label.contains_key(label)
    }

    pub fn strat_declared(&self, name: &str, arity: usize) -> bool {
        self.strat_decls
            .iter()
            .any(|d| d.name == name && d.params.len() == arity)
    }

    pub fn strat_defs_for(&self, name: &str, arity: usize) -> Vec<&StratDef> {
        self.strat_defs
            .iter()
            .filter(|d| d.name == name && d.params.len() == arity)
            .collect()
    }

    pub fn int_literal_sort(&self, n: i64) -> SortId {
        if n == 0 {
            self.prelude.zero_sort
        } else if n > 0 {
            self.prelude.nznat_sort
        } else {
            self.prelude.int_sort
        }
    }

    pub fn qid_sort(&self) -> SortId {
        self.prelude.qid_sort
    }

    pub fn bool_true(&self) -> Term {
        Term::constant(self, self.prelude.op_true)
    }

    pub fn bool_false(&self) -> Term {
        Term::constant(self, self.prelude.op_false)
    }

    /// Least sort of a term, as cached during construction.
    pub fn least_sort(&self, t: &Term) -> SortId {
        t.sort()
    }

    /// Minimal result sort for applying `op` to arguments with the given
    /// least sorts, considering every declaration of the same name and arity.
    /// Flattened associative applications are folded pairwise.
    pub fn least_result_sort(&self, op: OpId, args: &[Term]) -> Result<SortId> {
        let decl = self.op(op);
        let pairs: Vec<(SortId, bool)> = args.iter().map(|a| (a.sort(), a.is_var())).collect();
        if decl.assoc && pairs.len() > 2 {
            let mut acc = pairs[0];
            for s in &pairs[1..] {
                acc = (self.family_result(&decl.name, &[acc, *s])?, false);
            }
            Ok(acc.0)
        } else {
            self.family_result(&decl.name, &pairs)
        }
    }

    fn family_result(&self, name: &str, args: &[(SortId, bool)]) -> Result<SortId> {
        let fam = self.family(name, args.len());
        let mut best: Option<SortId> = None;
        for id in fam {
            let d = self.op(*id);
            // A variable argument also fits when its sort sits above the
            // declared one: the variable may later be instantiated to fit.
            let fits = d.args.iter().zip(args).all(|(declared, (actual, is_var))| {
                self.leq(*actual, *declared) || (*is_var && self.leq(*declared, *actual))
            });
            if fits {
                best = match best {
                    None => Some(d.result),
                    Some(r) if self.leq(d.result, r) => Some(d.result),
                    other => other,
                };
            }
        }
        best.ok_or_else(|| {
            let shown: Vec<&str> = args.iter().map(|(s, _)| self.sort_name(*s)).collect();
            Error::NoSort(format!("{name}({})", shown.join(", ")))
        })
    }

    /// Ground proposition constructors: operators whose result sort is below
    /// `Prop`.
    pub fn prop_ops(&self) -> Vec<OpId> {
        self.ops()
            .filter(|(_, d)| self.leq(d.result, self.prelude.prop_sort))
            .map(|(id, _)| id)
            .collect()
    }

    pub fn is_formula_head(&self, t: &Term) -> bool {
        match t.head() {
            Head::Op(op) => {
                let p = &self.prelude;
                [
                    p.f_true,
                    p.f_false,
                    p.f_not,
                    p.f_and,
                    p.f_or,
                    p.f_implies,
                    p.f_next,
                    p.f_eventually,
                    p.f_always,
                    p.f_until,
                ]
                .contains(op)
            }
            _ => false,
        }
    }
}
