//! Small reader for the textual syntaxes: set literals and parenthesised
//! s-expressions.
//!
//! Set literals: `{}` is the empty set, `{a b c}` a set of literals, `#n` the
//! n-th von Neumann ordinal.  S-expressions: atoms separated by whitespace and
//! parenthesised lists; a set literal may appear wherever an atom may.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hf::{von_neumann, HFSet};

/// A parsed s-expression with byte offsets for error reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom { text: String, pos: usize },
    List { items: Vec<Sexp>, pos: usize },
    /// A set literal, kept as source text.
    Set { text: String, pos: usize },
}

impl Sexp {
    pub fn pos(&self) -> usize {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } | Sexp::Set { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            _ => None,
        }
    }

    /// Interpret an atom as a natural number.
    pub fn as_usize(&self) -> Result<usize> {
        match self {
            Sexp::Atom { text, pos } => text
                .parse()
                .map_err(|_| Error::parse(*pos, format!("expected a natural number, found `{text}`"))),
            other => Err(Error::parse(other.pos(), "expected a natural number")),
        }
    }
}

struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c.is_ascii_whitespace() || c == b',' {
                self.pos += 1;
            } else if c == b';' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.bytes.len()
    }

    fn set_literal(&mut self) -> Result<HFSet> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(b'{') => {
                self.pos += 1;
                let mut members = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b'}') => {
                            self.pos += 1;
                            return HFSet::canon(members);
                        }
                        None => return Err(Error::parse(start, "unclosed `{`")),
                        _ => members.push(self.set_literal()?),
                    }
                }
            }
            Some(b'#') => {
                self.pos += 1;
                let digits_start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let n: usize = self.src[digits_start..self.pos]
                    .parse()
                    .map_err(|_| Error::parse(start, "expected digits after `#`"))?;
                von_neumann(n)
            }
            Some(c) => Err(Error::parse(start, format!("unexpected `{}` in set literal", c as char))),
            None => Err(Error::parse(start, "unexpected end of input, expected a set")),
        }
    }

    fn sexp(&mut self) -> Result<Sexp> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(Error::parse(start, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b')') => {
                            self.pos += 1;
                            return Ok(Sexp::List { items, pos: start });
                        }
                        None => return Err(Error::parse(start, "unclosed `(`")),
                        _ => items.push(self.sexp()?),
                    }
                }
            }
            Some(b')') => Err(Error::parse(start, "unexpected `)`")),
            Some(b'{') | Some(b'#') => {
                self.set_literal()?;
                Ok(Sexp::Set { text: self.src[start..self.pos].to_string(), pos: start })
            }
            Some(b'}') => Err(Error::parse(start, "unexpected `}`")),
            Some(_) => {
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || matches!(c, b'(' | b')' | b'{' | b'}' | b',' | b';') {
                        break;
                    }
                    self.pos += 1;
                }
                Ok(Sexp::Atom { text: self.src[start..self.pos].to_string(), pos: start })
            }
        }
    }
}

/// Parse one set literal; trailing input is an error.
pub fn parse_set(src: &str) -> Result<HFSet> {
    let mut r = Reader::new(src);
    let s = r.set_literal()?;
    if !r.at_end() {
        return Err(Error::parse(r.pos, "trailing input after set literal"));
    }
    Ok(s)
}

/// Parse a whitespace-separated list of set literals.
pub fn parse_set_list(src: &str) -> Result<Vec<HFSet>> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    while !r.at_end() {
        out.push(r.set_literal()?);
    }
    Ok(out)
}

/// Parse one s-expression; trailing input is an error.
pub fn parse_sexp(src: &str) -> Result<Sexp> {
    let mut r = Reader::new(src);
    let s = r.sexp()?;
    if !r.at_end() {
        return Err(Error::parse(r.pos, "trailing input"));
    }
    Ok(s)
}

/// Parse a sequence of s-expressions.
pub fn parse_sexps(src: &str) -> Result<Vec<Sexp>> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    while !r.at_end() {
        out.push(r.sexp()?);
    }
    Ok(out)
}

impl FromStr for HFSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_set(s)
    }
}
