//! Tokenizer shared by every surface syntax (terms, expressions, formulas,
//! HA2 terms and scripts).

use num_bigint::BigUint;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(BigUint),
    Hash,
    Backslash,
    Dot,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Star,
    Dollar,
    Semi,
    Comma,
    Eq,
    Arrow,
    FatArrow,
    Le,
    Lt,
    Gt,
    Plus,
    And,
    Tilde,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Nat(n) => return write!(f, "`{n}`"),
            Tok::Hash => "#",
            Tok::Backslash => "\\",
            Tok::Dot => ".",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Star => "*",
            Tok::Dollar => "$",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Plus => "+",
            Tok::And => "/\\",
            Tok::Tilde => "~",
            Tok::Slash => "/",
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s.parse::<BigUint>().expect("digits");
            out.push((Tok::Nat(n), pos));
            continue;
        }
        let two = |a: char, b: char| c == a && chars.get(i + 1) == Some(&b);
        let (tok, width) = if two('-', '>') {
            (Tok::Arrow, 2)
        } else if two('=', '>') {
            (Tok::FatArrow, 2)
        } else if two('<', '=') {
            (Tok::Le, 2)
        } else if two('/', '\\') {
            (Tok::And, 2)
        } else {
            let t = match c {
                '#' => Tok::Hash,
                '\\' | 'λ' => Tok::Backslash,
                '.' => Tok::Dot,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '*' => Tok::Star,
                '$' => Tok::Dollar,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '+' => Tok::Plus,
                '~' => Tok::Tilde,
                '/' => Tok::Slash,
                other => {
                    return Err(ParseError::new(
                        pos,
                        format!("unexpected character `{other}`"),
                    ))
                }
            };
            (t, 1)
        };
        i += width;
        col += width;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A cursor over a token vector.
#[derive(Debug, Clone)]
pub struct Cursor {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Cursor {
            toks: tokenize(src)?,
            at: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    pub fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn expect(&mut self, t: &Tok) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("{t}")))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    pub fn nat(&mut self) -> Result<BigUint, ParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected("a natural number")),
        }
    }

    pub fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek()),
        )
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }
}
