//! Term rewriting modulo structural axioms, a strategy language with a
//! small-step operational semantics, and explicit-state LTL model checking
//! over the strategy-controlled transition system.

pub mod error;
pub mod module;
pub mod subst;
pub mod term;

pub mod matching;
pub mod rewrite;
pub mod strategy;
pub mod syntax;

pub mod engine;
pub mod graph;

pub mod check;
pub mod ltl;

pub use error::{Error, Result};
pub use module::{ConditionFragment, ModuleKind, OpId, SortId, SpecModule};
pub use subst::Substitution;
pub use term::{Head, Term, Var};
