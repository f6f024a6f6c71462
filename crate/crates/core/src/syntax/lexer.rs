//! Tokenizer for the specification language. `***` comments run to the end
//! of the line. Identifiers may contain `-`, `'` and internal dots followed
//! by a letter (so `s.t` is one token while a standalone `.` terminates a
//! declaration). Adjacency information is kept so `X:Sort` annotations can
//! be told apart from spaced sort tests `t : s`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Qid(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Semi,
    Pipe,
    Question,
    Colon,
    ColonEq,
    Bang,
    Star,
    Plus,
    Eq,
    FatArrow,
    Arrow,
    LeftArrow,
    Lt,
    Gt,
    And,
    Or,
    At,
    Tilde,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    /// Column one past the token's last character, used for adjacency.
    pub end_col: u32,
}

impl Token {
    pub fn ident(&self) -> Option<&str> {
        match &self.tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }
}

pub fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let n = chars.len();

    macro_rules! push {
        ($tok:expr, $start:expr, $len:expr) => {
            out.push(Token {
                tok: $tok,
                line,
                col: $start,
                end_col: $start + $len,
            })
        };
    }

    while i < n {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '*' && i + 2 < n && chars[i + 1] == '*' && chars[i + 2] == '*' {
            while i < n && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = col;
        match c {
            '(' => push!(Tok::LParen, start, 1),
            ')' => push!(Tok::RParen, start, 1),
            '[' => push!(Tok::LBracket, start, 1),
            ']' => push!(Tok::RBracket, start, 1),
            '{' => push!(Tok::LBrace, start, 1),
            '}' => push!(Tok::RBrace, start, 1),
            ',' => push!(Tok::Comma, start, 1),
            ';' => push!(Tok::Semi, start, 1),
            '|' => push!(Tok::Pipe, start, 1),
            '?' => push!(Tok::Question, start, 1),
            '!' => push!(Tok::Bang, start, 1),
            '*' => push!(Tok::Star, start, 1),
            '+' => push!(Tok::Plus, start, 1),
            '@' => push!(Tok::At, start, 1),
            '~' => push!(Tok::Tilde, start, 1),
            '>' => push!(Tok::Gt, start, 1),
            '.' => push!(Tok::Dot, start, 1),
            ':' => {
                if i + 1 < n && chars[i + 1] == '=' {
                    push!(Tok::ColonEq, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    push!(Tok::Colon, start, 1);
                }
            }
            '=' => {
                if i + 1 < n && chars[i + 1] == '>' {
                    push!(Tok::FatArrow, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    push!(Tok::Eq, start, 1);
                }
            }
            '<' => {
                if i + 1 < n && chars[i + 1] == '-' {
                    push!(Tok::LeftArrow, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    push!(Tok::Lt, start, 1);
                }
            }
            '/' => {
                if i + 1 < n && chars[i + 1] == '\\' {
                    push!(Tok::And, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    return Err(Error::syntax(line, col, "unexpected `/`"));
                }
            }
            '\\' => {
                if i + 1 < n && chars[i + 1] == '/' {
                    push!(Tok::Or, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    return Err(Error::syntax(line, col, "unexpected `\\`"));
                }
            }
            '-' => {
                if i + 1 < n && chars[i + 1].is_ascii_digit() {
                    let mut j = i + 1;
                    while j < n && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().collect();
                    let v: i64 = s
                        .parse()
                        .map_err(|_| Error::syntax(line, col, format!("bad integer `{s}`")))?;
                    let len = (j - i) as u32;
                    push!(Tok::Int(v), start, len);
                    col += len - 1;
                    i = j - 1;
                } else if i + 1 < n && chars[i + 1] == '>' {
                    push!(Tok::Arrow, start, 2);
                    i += 1;
                    col += 1;
                } else {
                    return Err(Error::syntax(line, col, "unexpected `-`"));
                }
            }
            '\'' => {
                let mut j = i + 1;
                while j < n && is_ident_continue(chars[j]) {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(Error::syntax(line, col, "empty quoted identifier"));
                }
                let s: String = chars[i + 1..j].iter().collect();
                let len = (j - i) as u32;
                push!(Tok::Qid(s), start, len);
                col += len - 1;
                i = j - 1;
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < n && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let v: i64 = s
                    .parse()
                    .map_err(|_| Error::syntax(line, col, format!("bad integer `{s}`")))?;
                let len = (j - i) as u32;
                push!(Tok::Int(v), start, len);
                col += len - 1;
                i = j - 1;
            }
            a if a.is_alphabetic() || a == '_' => {
                let mut j = i;
                while j < n {
                    let ch = chars[j];
                    if ch == '-' && j + 1 < n && chars[j + 1] == '>' {
                        // keep `->` a token even when unspaced
                        break;
                    }
                    if is_ident_continue(ch) {
                        j += 1;
                    } else if ch == '.' && j + 1 < n && chars[j + 1].is_alphabetic() {
                        // internal dot, as in `s.t`
                        j += 1;
                    } else {
                        break;
                    }
                }
                let s: String = chars[i..j].iter().collect();
                let len = (j - i) as u32;
                push!(Tok::Ident(s), start, len);
                col += len - 1;
                i = j - 1;
            }
            other => {
                return Err(Error::syntax(line, col, format!("unexpected `{other}`")));
            }
        }
        col += 1;
        i += 1;
    }
    Ok(out)
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '-'
}
