//! Text grammar for spectral-set descriptors.
//!
//! ```text
//! union := diff (('|' | '+') diff)*
//! diff  := atom (('\' | '&') atom)*
//! atom  := '(' union ')'
//!        | '{' [int (',' int)*] '}'
//!        | '[' int ',' int ']'
//!        | 'Z' | 'Zplus' | 'Zminus' | 'negsq' | 'negprimes' | 'pow2'
//!        | 'AP(' int ',' int ')' | 'pow(' int ')' | 'negpow(' int ')'
//!        | 'shift(' union ',' int ')' | 'neg(' union ')'
//! ```

use super::descriptor::{Descriptor, Family, Progression};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer { src, toks: Vec::new() };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                lx.toks.push((start, Tok::Ident(lx.src[start..i].to_string())));
            } else if c.is_ascii_digit()
                || (c == '-' && i + 1 < bytes.len() && (bytes[i + 1] as char).is_ascii_digit() && lx.sign_allowed())
            {
                let start = i;
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let v = lx.src[start..i]
                    .parse::<i64>()
                    .map_err(|_| Error::parse(start, "integer out of range"))?;
                lx.toks.push((start, Tok::Int(v)));
            } else if "{}[](),|+\\&".contains(c) {
                lx.toks.push((i, Tok::Sym(c)));
                i += 1;
            } else {
                return Err(Error::parse(i, format!("unexpected character '{c}'")));
            }
        }
        Ok(lx.toks)
    }

    // A leading '-' is a sign only where an integer may start.
    fn sign_allowed(&self) -> bool {
        matches!(self.toks.last(), Some((_, Tok::Sym('{' | '[' | ',' | '('))))
    }
}

pub(crate) struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    pub(crate) fn parse(src: &str) -> Result<Descriptor> {
        let toks = Lexer::run(src)?;
        let mut p = Parser {
            toks,
            pos: 0,
            end: src.len(),
        };
        if p.toks.is_empty() {
            return Err(Error::parse(0, "empty descriptor"));
        }
        let d = p.union()?;
        if p.pos < p.toks.len() {
            return Err(Error::parse(p.offset(), "trailing input"));
        }
        Ok(d)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            _ => Err(Error::parse(at, format!("expected '{c}'"))),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Int(v)) => Ok(v),
            _ => Err(Error::parse(at, "expected integer")),
        }
    }

    fn union(&mut self) -> Result<Descriptor> {
        let mut acc = self.diff()?;
        while let Some(Tok::Sym('|' | '+')) = self.peek() {
            self.pos += 1;
            let rhs = self.diff()?;
            acc = Descriptor::union(acc, rhs);
        }
        Ok(acc)
    }

    fn diff(&mut self) -> Result<Descriptor> {
        let mut acc = self.atom()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('\\')) => {
                    self.pos += 1;
                    let rhs = self.atom()?;
                    acc = Descriptor::difference(acc, rhs);
                }
                Some(Tok::Sym('&')) => {
                    self.pos += 1;
                    let rhs = self.atom()?;
                    acc = Descriptor::intersection(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn atom(&mut self) -> Result<Descriptor> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Sym('(')) => {
                let d = self.union()?;
                self.expect(')')?;
                Ok(d)
            }
            Some(Tok::Sym('{')) => {
                let mut items = Vec::new();
                if let Some(Tok::Sym('}')) = self.peek() {
                    self.pos += 1;
                    return Ok(Descriptor::explicit(items));
                }
                loop {
                    items.push(self.int()?);
                    let at = self.offset();
                    match self.bump() {
                        Some(Tok::Sym(',')) => continue,
                        Some(Tok::Sym('}')) => break,
                        _ => return Err(Error::parse(at, "expected ',' or '}'")),
                    }
                }
                Ok(Descriptor::explicit(items))
            }
            Some(Tok::Sym('[')) => {
                let lo = self.int()?;
                self.expect(',')?;
                let hi = self.int()?;
                self.expect(']')?;
                if lo > hi {
                    return Err(Error::parse(at, "empty interval"));
                }
                Ok(Descriptor::interval(lo, hi))
            }
            Some(Tok::Ident(name)) => self.named(&name, at),
            _ => Err(Error::parse(at, "expected a set")),
        }
    }

    fn named(&mut self, name: &str, at: usize) -> Result<Descriptor> {
        match name {
            "Z" => Ok(Descriptor::integers()),
            "Zplus" => Ok(Descriptor::nonnegative()),
            "Zminus" => Ok(Descriptor::negative()),
            "negsq" => Ok(Descriptor::family(Family::NegSquares)),
            "negprimes" => Ok(Descriptor::family(Family::NegPrimes)),
            "pow2" => Ok(Descriptor::family(Family::Powers(2))),
            "AP" => {
                self.expect('(')?;
                let n_at = self.offset();
                let n = self.int()?;
                self.expect(',')?;
                let r = self.int()?;
                self.expect(')')?;
                if n < 1 {
                    return Err(Error::parse(n_at, "modulus must be >= 1"));
                }
                Ok(Descriptor::progressions(Progression::new(n as u64, r), None))
            }
            "pow" | "negpow" => {
                self.expect('(')?;
                let b_at = self.offset();
                let b = self.int()?;
                self.expect(')')?;
                if b < 2 {
                    return Err(Error::parse(b_at, "base must be >= 2"));
                }
                let fam = if name == "pow" {
                    Family::Powers(b as u64)
                } else {
                    Family::NegPowers(b as u64)
                };
                Ok(Descriptor::family(fam))
            }
            "shift" => {
                self.expect('(')?;
                let inner = self.union()?;
                self.expect(',')?;
                let n = self.int()?;
                self.expect(')')?;
                Ok(Descriptor::shift(inner, n))
            }
            "neg" => {
                self.expect('(')?;
                let inner = self.union()?;
                self.expect(')')?;
                Ok(Descriptor::negation(inner))
            }
            other => Err(Error::parse(at, format!("unknown set name '{other}'"))),
        }
    }
}
