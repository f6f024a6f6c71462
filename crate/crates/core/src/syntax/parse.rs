//! Recursive-descent parser for module files, terms and strategy
//! expressions.

use crate::error::{Error, Result};
use crate::module::ModuleKind;
use crate::syntax::ast::*;
use crate::syntax::lexer::{lex, Tok, Token};

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Parser> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, off: usize) -> Option<&Tok> {
        self.toks.get(self.pos + off).map(|t| &t.tok)
    }

    fn token(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .toks
                .last()
                .map(|t| (t.line, t.end_col))
                .unwrap_or((1, 1)),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        let found = match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".to_string(),
        };
        Error::syntax(line, col, format!("{} (found {found})", msg.into()))
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected {tok:?}")))
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn peek_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected an identifier")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // ----- terms -------------------------------------------------------

    pub(crate) fn parse_term(&mut self) -> Result<RawTerm> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(RawTerm::Int(n))
            }
            Some(Tok::Qid(q)) => {
                let q = q.clone();
                self.pos += 1;
                Ok(RawTerm::Qid(q))
            }
            Some(Tok::Ident(_)) => {
                let tok = self.advance().unwrap();
                let name = match tok.tok {
                    Tok::Ident(s) => s,
                    _ => unreachable!(),
                };
                // `X:Sort` with no intervening space is a variable annotation.
                if let (Some(Tok::Colon), Some(colon_tok)) = (self.peek(), self.token()) {
                    let adjacent = colon_tok.line == tok.line && colon_tok.col == tok.end_col;
                    if adjacent {
                        if let Some(Tok::Ident(_)) = self.peek_at(1) {
                            let sort_tok = &self.toks[self.pos + 1];
                            if sort_tok.line == colon_tok.line && sort_tok.col == colon_tok.end_col
                            {
                                self.pos += 1; // colon
                                let sort = self.expect_ident()?;
                                return Ok(RawTerm::AnnotatedVar { name, sort });
                            }
                        }
                    }
                }
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    loop {
                        args.push(self.parse_term()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RParen)?;
                        break;
                    }
                }
                Ok(RawTerm::Apply { name, args })
            }
            _ => Err(self.err("expected a term")),
        }
    }

    /// One condition fragment; a lone boolean term abbreviates `t = true`.
    fn parse_fragment(&mut self) -> Result<RawFragment> {
        let lhs = self.parse_term()?;
        match self.peek() {
            Some(Tok::Eq) => {
                self.pos += 1;
                Ok(RawFragment::Equality(lhs, self.parse_term()?))
            }
            Some(Tok::ColonEq) => {
                self.pos += 1;
                Ok(RawFragment::Assign(lhs, self.parse_term()?))
            }
            Some(Tok::FatArrow) => {
                self.pos += 1;
                Ok(RawFragment::Rewrite(lhs, self.parse_term()?))
            }
            Some(Tok::Colon) => {
                self.pos += 1;
                Ok(RawFragment::SortTest(lhs, self.expect_ident()?))
            }
            _ => Ok(RawFragment::Equality(
                lhs,
                RawTerm::Apply {
                    name: "true".into(),
                    args: vec![],
                },
            )),
        }
    }

    fn parse_fragments(&mut self) -> Result<Vec<RawFragment>> {
        let mut out = vec![self.parse_fragment()?];
        while self.eat(&Tok::And) {
            out.push(self.parse_fragment()?);
        }
        Ok(out)
    }

    // ----- strategies --------------------------------------------------

    /// Full strategy grammar. Postfix `* ! +` bind tightest, then `;`,
    /// then `|`; the conditional `? :` and `or-else` are loosest and may
    /// not be mixed without parentheses.
    pub(crate) fn parse_strategy(&mut self) -> Result<RawStrategy> {
        let first = self.parse_strat_union()?;
        if self.eat(&Tok::Question) {
            let pos = self.parse_strat_union()?;
            self.expect(Tok::Colon)?;
            let neg = self.parse_strat_union()?;
            if self.peek() == Some(&Tok::Question) || self.peek_kw("or-else") {
                return Err(self.err("ambiguous mix of `? :` and `or-else`; add parentheses"));
            }
            Ok(RawStrategy::Conditional(
                Box::new(first),
                Box::new(pos),
                Box::new(neg),
            ))
        } else if self.peek_kw("or-else") {
            let mut acc = first;
            while self.eat_kw("or-else") {
                let rhs = self.parse_strat_union()?;
                acc = RawStrategy::OrElse(Box::new(acc), Box::new(rhs));
            }
            if self.peek() == Some(&Tok::Question) {
                return Err(self.err("ambiguous mix of `or-else` and `? :`; add parentheses"));
            }
            Ok(acc)
        } else {
            Ok(first)
        }
    }

    fn parse_strat_union(&mut self) -> Result<RawStrategy> {
        let mut acc = self.parse_strat_seq()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.parse_strat_seq()?;
            acc = RawStrategy::Union(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_strat_seq(&mut self) -> Result<RawStrategy> {
        let mut acc = self.parse_strat_postfix()?;
        while self.eat(&Tok::Semi) {
            let rhs = self.parse_strat_postfix()?;
            acc = RawStrategy::Seq(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_strat_postfix(&mut self) -> Result<RawStrategy> {
        let mut acc = self.parse_strat_primary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = RawStrategy::Star(Box::new(acc));
                }
                Some(Tok::Bang) => {
                    self.pos += 1;
                    acc = RawStrategy::Bang(Box::new(acc));
                }
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = RawStrategy::Plus(Box::new(acc));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_strat_primary(&mut self) -> Result<RawStrategy> {
        if self.eat(&Tok::LParen) {
            let s = self.parse_strategy()?;
            self.expect(Tok::RParen)?;
            return Ok(s);
        }
        if self.eat_kw("idle") {
            return Ok(RawStrategy::Idle);
        }
        if self.eat_kw("fail") {
            return Ok(RawStrategy::Fail);
        }
        if self.eat_kw("all") {
            return Ok(RawStrategy::All);
        }
        if self.eat_kw("top") {
            self.expect(Tok::LParen)?;
            let inner = self.parse_strategy()?;
            self.expect(Tok::RParen)?;
            return Ok(RawStrategy::Top(Box::new(inner)));
        }
        for (kw, wrap) in [
            ("not", RawStrategy::Not as fn(_) -> _),
            ("try", RawStrategy::Try as fn(_) -> _),
            ("test", RawStrategy::TestComb as fn(_) -> _),
        ] {
            if self.peek_kw(kw) && self.peek_at(1) == Some(&Tok::LParen) {
                self.pos += 2;
                let inner = self.parse_strategy()?;
                self.expect(Tok::RParen)?;
                return Ok(wrap(Box::new(inner)));
            }
        }
        for (kw, kind) in [
            ("match", TestKind::Plain),
            ("xmatch", TestKind::Extension),
            ("amatch", TestKind::Anywhere),
        ] {
            if self.eat_kw(kw) {
                let pattern = self.parse_term()?;
                let cond = if self.eat_kw("s.t") {
                    self.parse_fragments()?
                } else {
                    Vec::new()
                };
                return Ok(RawStrategy::Test {
                    kind,
                    pattern,
                    cond,
                });
            }
        }
        for (kw, kind) in [
            ("matchrew", TestKind::Plain),
            ("xmatchrew", TestKind::Extension),
            ("amatchrew", TestKind::Anywhere),
        ] {
            if self.eat_kw(kw) {
                let pattern = self.parse_term()?;
                let cond = if self.eat_kw("s.t") {
                    self.parse_fragments()?
                } else {
                    Vec::new()
                };
                if !self.eat_kw("by") {
                    return Err(self.err("expected `by` in matchrew"));
                }
                let mut parts = Vec::new();
                loop {
                    let var = self.expect_ident()?;
                    if !self.eat_kw("using") {
                        return Err(self.err("expected `using` in matchrew"));
                    }
                    let s = self.parse_strategy()?;
                    parts.push((var, s));
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    break;
                }
                return Ok(RawStrategy::MatchRew {
                    kind,
                    pattern,
                    cond,
                    parts,
                });
            }
        }
        // Rule application or strategy call.
        let name = self.expect_ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.parse_term()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RParen)?;
                break;
            }
        }
        let mut subst = Vec::new();
        let mut cond_strats = Vec::new();
        let mut bracketed = false;
        if self.eat(&Tok::LBracket) {
            bracketed = true;
            loop {
                let var = self.expect_ident()?;
                self.expect(Tok::LeftArrow)?;
                let t = self.parse_term()?;
                subst.push((var, t));
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RBracket)?;
                break;
            }
        }
        if self.eat(&Tok::LBrace) {
            bracketed = true;
            loop {
                cond_strats.push(self.parse_strategy()?);
                if self.eat(&Tok::Comma) {
                    continue;
                }
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        if bracketed {
            if !args.is_empty() {
                return Err(self.err("rule applications do not take parenthesised arguments"));
            }
            Ok(RawStrategy::RuleApp {
                label: name,
                subst,
                cond_strats,
            })
        } else {
            Ok(RawStrategy::Call { name, args })
        }
    }

    // ----- modules -----------------------------------------------------

    fn parse_module(&mut self) -> Result<ParsedModule> {
        let kind = if self.eat_kw("mod") {
            ModuleKind::System
        } else if self.eat_kw("fmod") {
            ModuleKind::Functional
        } else if self.eat_kw("smod") {
            ModuleKind::Strategy
        } else {
            return Err(self.err("expected `mod`, `fmod` or `smod`"));
        };
        let name = self.expect_ident()?;
        if !self.eat_kw("is") {
            return Err(self.err("expected `is`"));
        }
        let end_kw = match kind {
            ModuleKind::Functional => "endfm",
            ModuleKind::System => "endm",
            ModuleKind::Strategy => "endsm",
        };
        let mut decls = Vec::new();
        loop {
            if self.eat_kw(end_kw) {
                break;
            }
            if self.at_end() {
                return Err(self.err(format!("missing `{end_kw}`")));
            }
            decls.push(self.parse_decl()?);
        }
        Ok(ParsedModule { name, kind, decls })
    }

    fn parse_decl(&mut self) -> Result<RawDecl> {
        if self.eat_kw("protecting") || self.eat_kw("including") {
            let name = self.expect_ident()?;
            self.expect(Tok::Dot)?;
            return Ok(RawDecl::Import(name));
        }
        if self.eat_kw("sorts") || self.eat_kw("sort") {
            let mut names = Vec::new();
            while let Some(Tok::Ident(_)) = self.peek() {
                names.push(self.expect_ident()?);
            }
            self.expect(Tok::Dot)?;
            if names.is_empty() {
                return Err(self.err("empty sort declaration"));
            }
            return Ok(RawDecl::Sorts(names));
        }
        if self.eat_kw("subsort") || self.eat_kw("subsorts") {
            let mut groups = Vec::new();
            let mut group = Vec::new();
            loop {
                match self.peek() {
                    Some(Tok::Ident(_)) => group.push(self.expect_ident()?),
                    Some(Tok::Lt) => {
                        self.pos += 1;
                        if group.is_empty() {
                            return Err(self.err("expected sort names before `<`"));
                        }
                        groups.push(std::mem::take(&mut group));
                    }
                    Some(Tok::Dot) => {
                        self.pos += 1;
                        if group.is_empty() || groups.is_empty() {
                            return Err(self.err("subsort declaration needs `<`"));
                        }
                        groups.push(group);
                        return Ok(RawDecl::Subsort(groups));
                    }
                    _ => return Err(self.err("malformed subsort declaration")),
                }
            }
        }
        if self.eat_kw("op") || self.eat_kw("ops") {
            let mut names = Vec::new();
            while let Some(Tok::Ident(_)) = self.peek() {
                names.push(self.expect_ident()?);
            }
            self.expect(Tok::Colon)?;
            let mut args = Vec::new();
            while let Some(Tok::Ident(_)) = self.peek() {
                args.push(self.expect_ident()?);
            }
            self.expect(Tok::Arrow)?;
            let result = self.expect_ident()?;
            let attrs = self.parse_attrs()?;
            self.expect(Tok::Dot)?;
            if names.is_empty() {
                return Err(self.err("operator declaration without a name"));
            }
            return Ok(RawDecl::Op {
                names,
                args,
                result,
                attrs,
            });
        }
        if self.eat_kw("var") || self.eat_kw("vars") {
            let mut names = Vec::new();
            while let Some(Tok::Ident(_)) = self.peek() {
                names.push(self.expect_ident()?);
            }
            self.expect(Tok::Colon)?;
            let sort = self.expect_ident()?;
            self.expect(Tok::Dot)?;
            if names.is_empty() {
                return Err(self.err("variable declaration without a name"));
            }
            return Ok(RawDecl::Var { names, sort });
        }
        if self.eat_kw("eq") || self.eat_kw("ceq") {
            let lhs = self.parse_term()?;
            self.expect(Tok::Eq)?;
            let rhs = self.parse_term()?;
            let cond = if self.eat_kw("if") {
                self.parse_fragments()?
            } else {
                Vec::new()
            };
            let attrs = self.parse_attrs()?;
            self.expect(Tok::Dot)?;
            return Ok(RawDecl::Eq {
                lhs,
                rhs,
                cond,
                owise: attrs.owise,
            });
        }
        if self.eat_kw("rl") || self.eat_kw("crl") {
            self.expect(Tok::LBracket)?;
            let label = self.expect_ident()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Colon)?;
            let lhs = self.parse_term()?;
            self.expect(Tok::FatArrow)?;
            let rhs = self.parse_term()?;
            let cond = if self.eat_kw("if") {
                self.parse_fragments()?
            } else {
                Vec::new()
            };
            self.expect(Tok::Dot)?;
            return Ok(RawDecl::Rule {
                label,
                lhs,
                rhs,
                cond,
            });
        }
        if self.eat_kw("strat") || self.eat_kw("strats") {
            let mut names = Vec::new();
            while let Some(Tok::Ident(_)) = self.peek() {
                names.push(self.expect_ident()?);
            }
            let mut params = Vec::new();
            if self.eat(&Tok::Colon) {
                while let Some(Tok::Ident(_)) = self.peek() {
                    params.push(self.expect_ident()?);
                }
            }
            self.expect(Tok::At)?;
            let subject = self.expect_ident()?;
            self.expect(Tok::Dot)?;
            if names.is_empty() {
                return Err(self.err("strategy declaration without a name"));
            }
            return Ok(RawDecl::StratDecl {
                names,
                params,
                subject,
            });
        }
        if self.eat_kw("sd") || self.eat_kw("csd") {
            let name = self.expect_ident()?;
            let mut params = Vec::new();
            if self.eat(&Tok::LParen) {
                loop {
                    params.push(self.parse_term()?);
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                    self.expect(Tok::RParen)?;
                    break;
                }
            }
            self.expect(Tok::ColonEq)?;
            let body = self.parse_strategy()?;
            let cond = if self.eat_kw("if") {
                self.parse_fragments()?
            } else {
                Vec::new()
            };
            self.expect(Tok::Dot)?;
            return Ok(RawDecl::StratDef {
                name,
                params,
                body,
                cond,
            });
        }
        Err(self.err("expected a declaration"))
    }

    fn parse_attrs(&mut self) -> Result<RawAttrs> {
        let mut attrs = RawAttrs::default();
        if !self.eat(&Tok::LBracket) {
            return Ok(attrs);
        }
        loop {
            if self.eat(&Tok::RBracket) {
                return Ok(attrs);
            }
            if self.eat_kw("assoc") {
                attrs.assoc = true;
            } else if self.eat_kw("comm") {
                attrs.comm = true;
            } else if self.eat_kw("ctor") {
                attrs.ctor = true;
            } else if self.eat_kw("frozen") {
                attrs.frozen = true;
            } else if self.eat_kw("owise") {
                attrs.owise = true;
            } else if self.eat_kw("id") {
                self.expect(Tok::LParen)?;
                attrs.identity = Some(self.parse_term()?);
                self.expect(Tok::RParen)?;
            } else {
                return Err(self.err("unknown operator attribute"));
            }
        }
    }
}

/// Parses a whole file into its modules, in declaration order.
pub fn parse_file(text: &str) -> Result<Vec<ParsedModule>> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.parse_module()?);
    }
    if out.is_empty() {
        return Err(Error::syntax(1, 1, "no modules in file"));
    }
    Ok(out)
}

/// Parses a single term, requiring the whole input to be consumed.
pub fn parse_term_text(text: &str) -> Result<RawTerm> {
    let mut p = Parser::new(text)?;
    let t = p.parse_term()?;
    if !p.at_end() {
        return Err(p.err("trailing input after term"));
    }
    Ok(t)
}

/// Parses a single strategy expression, requiring the whole input.
pub fn parse_strategy_text(text: &str) -> Result<RawStrategy> {
    let mut p = Parser::new(text)?;
    let s = p.parse_strategy()?;
    if !p.at_end() {
        return Err(p.err("trailing input after strategy"));
    }
    Ok(s)
}
