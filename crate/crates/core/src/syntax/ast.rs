//! Raw parse trees for module files, before operator resolution and
//! flattening, together with a printer that re-emits the surface syntax.

use std::fmt;

use crate::module::ModuleKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Apply { name: String, args: Vec<RawTerm> },
    AnnotatedVar { name: String, sort: String },
    Int(i64),
    Qid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawFragment {
    Equality(RawTerm, RawTerm),
    Assign(RawTerm, RawTerm),
    SortTest(RawTerm, String),
    Rewrite(RawTerm, RawTerm),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Plain,
    Extension,
    Anywhere,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawStrategy {
    Idle,
    Fail,
    All,
    Top(Box<RawStrategy>),
    RuleApp {
        label: String,
        subst: Vec<(String, RawTerm)>,
        cond_strats: Vec<RawStrategy>,
    },
    Test {
        kind: TestKind,
        pattern: RawTerm,
        cond: Vec<RawFragment>,
    },
    MatchRew {
        kind: TestKind,
        pattern: RawTerm,
        cond: Vec<RawFragment>,
        parts: Vec<(String, RawStrategy)>,
    },
    Seq(Box<RawStrategy>, Box<RawStrategy>),
    Union(Box<RawStrategy>, Box<RawStrategy>),
    Star(Box<RawStrategy>),
    Plus(Box<RawStrategy>),
    Bang(Box<RawStrategy>),
    Conditional(Box<RawStrategy>, Box<RawStrategy>, Box<RawStrategy>),
    OrElse(Box<RawStrategy>, Box<RawStrategy>),
    Not(Box<RawStrategy>),
    Try(Box<RawStrategy>),
    TestComb(Box<RawStrategy>),
    Call { name: String, args: Vec<RawTerm> },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawAttrs {
    pub assoc: bool,
    pub comm: bool,
    pub identity: Option<RawTerm>,
    pub ctor: bool,
    pub frozen: bool,
    pub owise: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawDecl {
    Import(String),
    Sorts(Vec<String>),
    /// `subsort(s) G1 < G2 < ... Gn`: every sort of a group is below every
    /// sort of the following groups.
    Subsort(Vec<Vec<String>>),
    Op {
        names: Vec<String>,
        args: Vec<String>,
        result: String,
        attrs: RawAttrs,
    },
    Var {
        names: Vec<String>,
        sort: String,
    },
    Eq {
        lhs: RawTerm,
        rhs: RawTerm,
        cond: Vec<RawFragment>,
        owise: bool,
    },
    Rule {
        label: String,
        lhs: RawTerm,
        rhs: RawTerm,
        cond: Vec<RawFragment>,
    },
    StratDecl {
        names: Vec<String>,
        params: Vec<String>,
        subject: String,
    },
    StratDef {
        name: String,
        params: Vec<RawTerm>,
        body: RawStrategy,
        cond: Vec<RawFragment>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedModule {
    pub name: String,
    pub kind: ModuleKind,
    pub decls: Vec<RawDecl>,
}

impl fmt::Display for RawTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawTerm::Apply { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            RawTerm::AnnotatedVar { name, sort } => write!(f, "{name}:{sort}"),
            RawTerm::Int(n) => write!(f, "{n}"),
            RawTerm::Qid(q) => write!(f, "'{q}"),
        }
    }
}

impl fmt::Display for RawFragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawFragment::Equality(a, b) => write!(f, "{a} = {b}"),
            RawFragment::Assign(a, b) => write!(f, "{a} := {b}"),
            RawFragment::SortTest(t, s) => write!(f, "{t} : {s}"),
            RawFragment::Rewrite(a, b) => write!(f, "{a} => {b}"),
        }
    }
}

fn write_cond(f: &mut fmt::Formatter<'_>, cond: &[RawFragment]) -> fmt::Result {
    for (i, frag) in cond.iter().enumerate() {
        if i == 0 {
            write!(f, " s.t {frag}")?;
        } else {
            write!(f, " /\\ {frag}")?;
        }
    }
    Ok(())
}

impl fmt::Display for RawStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawStrategy::Idle => write!(f, "idle"),
            RawStrategy::Fail => write!(f, "fail"),
            RawStrategy::All => write!(f, "all"),
            RawStrategy::Top(s) => write!(f, "top({s})"),
            RawStrategy::RuleApp {
                label,
                subst,
                cond_strats,
            } => {
                write!(f, "{label}")?;
                if !subst.is_empty() {
                    write!(f, "[")?;
                    for (i, (x, t)) in subst.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{x} <- {t}")?;
                    }
                    write!(f, "]")?;
                }
                if !cond_strats.is_empty() {
                    write!(f, "{{")?;
                    for (i, s) in cond_strats.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{s}")?;
                    }
                    write!(f, "}}")?;
                }
                Ok(())
            }
            RawStrategy::Test {
                kind,
                pattern,
                cond,
            } => {
                let kw = match kind {
                    TestKind::Plain => "match",
                    TestKind::Extension => "xmatch",
                    TestKind::Anywhere => "amatch",
                };
                write!(f, "{kw} {pattern}")?;
                write_cond(f, cond)
            }
            RawStrategy::MatchRew {
                kind,
                pattern,
                cond,
                parts,
            } => {
                let kw = match kind {
                    TestKind::Plain => "matchrew",
                    TestKind::Extension => "xmatchrew",
                    TestKind::Anywhere => "amatchrew",
                };
                write!(f, "{kw} {pattern}")?;
                write_cond(f, cond)?;
                write!(f, " by ")?;
                for (i, (x, s)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x} using {s}")?;
                }
                Ok(())
            }
            RawStrategy::Seq(a, b) => write!(f, "({a} ; {b})"),
            RawStrategy::Union(a, b) => write!(f, "({a} | {b})"),
            RawStrategy::Star(a) => write!(f, "({a}) *"),
            RawStrategy::Plus(a) => write!(f, "({a}) +"),
            RawStrategy::Bang(a) => write!(f, "({a}) !"),
            RawStrategy::Conditional(a, b, c) => write!(f, "({a} ? {b} : {c})"),
            RawStrategy::OrElse(a, b) => write!(f, "({a} or-else {b})"),
            RawStrategy::Not(a) => write!(f, "not({a})"),
            RawStrategy::Try(a) => write!(f, "try({a})"),
            RawStrategy::TestComb(a) => write!(f, "test({a})"),
            RawStrategy::Call { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

fn write_stmt_cond(f: &mut fmt::Formatter<'_>, cond: &[RawFragment]) -> fmt::Result {
    for (i, frag) in cond.iter().enumerate() {
        if i == 0 {
            write!(f, " if {frag}")?;
        } else {
            write!(f, " /\\ {frag}")?;
        }
    }
    Ok(())
}

impl fmt::Display for ParsedModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (open, close) = match self.kind {
            ModuleKind::Functional => ("fmod", "endfm"),
            ModuleKind::System => ("mod", "endm"),
            ModuleKind::Strategy => ("smod", "endsm"),
        };
        writeln!(f, "{open} {} is", self.name)?;
        for d in &self.decls {
            match d {
                RawDecl::Import(name) => writeln!(f, "  protecting {name} .")?,
                RawDecl::Sorts(names) => writeln!(f, "  sorts {} .", names.join(" "))?,
                RawDecl::Subsort(groups) => {
                    let joined: Vec<String> = groups.iter().map(|g| g.join(" ")).collect();
                    writeln!(f, "  subsorts {} .", joined.join(" < "))?
                }
                RawDecl::Op {
                    names,
                    args,
                    result,
                    attrs,
                } => {
                    let kw = if names.len() > 1 { "ops" } else { "op" };
                    write!(f, "  {kw} {} :", names.join(" "))?;
                    for a in args {
                        write!(f, " {a}")?;
                    }
                    write!(f, " -> {result}")?;
                    let mut items = Vec::new();
                    if attrs.assoc {
                        items.push("assoc".to_string());
                    }
                    if attrs.comm {
                        items.push("comm".to_string());
                    }
                    if let Some(id) = &attrs.identity {
                        items.push(format!("id({id})"));
                    }
                    if attrs.ctor {
                        items.push("ctor".to_string());
                    }
                    if attrs.frozen {
                        items.push("frozen".to_string());
                    }
                    if !items.is_empty() {
                        write!(f, " [{}]", items.join(" "))?;
                    }
                    writeln!(f, " .")?
                }
                RawDecl::Var { names, sort } => {
                    let kw = if names.len() > 1 { "vars" } else { "var" };
                    writeln!(f, "  {kw} {} : {sort} .", names.join(" "))?
                }
                RawDecl::Eq {
                    lhs,
                    rhs,
                    cond,
                    owise,
                } => {
                    let kw = if cond.is_empty() { "eq" } else { "ceq" };
                    write!(f, "  {kw} {lhs} = {rhs}")?;
                    write_stmt_cond(f, cond)?;
                    if *owise {
                        write!(f, " [owise]")?;
                    }
                    writeln!(f, " .")?
                }
                RawDecl::Rule {
                    label,
                    lhs,
                    rhs,
                    cond,
                } => {
                    let kw = if cond.is_empty() { "rl" } else { "crl" };
                    write!(f, "  {kw} [{label}] : {lhs} => {rhs}")?;
                    write_stmt_cond(f, cond)?;
                    writeln!(f, " .")?
                }
                RawDecl::StratDecl {
                    names,
                    params,
                    subject,
                } => {
                    let kw = if names.len() > 1 { "strats" } else { "strat" };
                    write!(f, "  {kw} {}", names.join(" "))?;
                    if !params.is_empty() {
                        write!(f, " : {}", params.join(" "))?;
                    }
                    writeln!(f, " @ {subject} .")?
                }
                RawDecl::StratDef {
                    name,
                    params,
                    body,
                    cond,
                } => {
                    let kw = if cond.is_empty() { "sd" } else { "csd" };
                    write!(f, "  {kw} {name}")?;
                    if !params.is_empty() {
                        write!(f, "(")?;
                        for (i, p) in params.iter().enumerate() {
                            if i > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "{p}")?;
                        }
                        write!(f, ")")?;
                    }
                    write!(f, " := {body}")?;
                    write_stmt_cond(f, cond)?;
                    writeln!(f, " .")?
                }
            }
        }
        writeln!(f, "{close}")
    }
}
