//! Text grammar for trigonometric polynomials.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/')? unary)*        juxtaposition multiplies
//! unary   := '-' unary | power
//! power   := atom ('^' exponent)?
//! exponent:= ['-'] int | '(' ['-'] int ')'
//! atom    := number | 'pi' | 'i' | 'z' | 'zbar' | '(' sum ')'
//! ```
//!
//! Numbers are decimals with an optional exponent (`0.5`, `1e-3`); rationals
//! are written as quotients. Division and negative powers need a single-term
//! operand such as `4`, `z^3` or `(2*zbar)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::trig::TrigPoly;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let v: f64 = src[start..i]
                .parse()
                .map_err(|_| Error::parse(start, format!("malformed number '{}'", &src[start..i])))?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::parse(i, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

/// Parse an expression such as `(pi/4)*(1+z)` or `0.5*z^2 - zbar^3/3`.
pub fn parse_trig_poly(src: &str) -> Result<TrigPoly> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::parse(0, "empty expression"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: src.len(),
    };
    let f = p.sum()?;
    if p.pos < p.toks.len() {
        return Err(Error::parse(p.offset(), "trailing input"));
    }
    for (k, c) in f.terms() {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::parse(0, format!("coefficient of z^{k} is not finite")));
        }
    }
    Ok(f)
}

fn single_term(f: &TrigPoly) -> Option<(i64, Complex64)> {
    if f.len() == 1 {
        f.terms().next()
    } else {
        None
    }
}

impl Parser {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<TrigPoly> {
        let mut acc = self.product()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.product()?;
            } else if self.eat('-') {
                acc = &acc - &self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Sym('(')))
    }

    fn product(&mut self) -> Result<TrigPoly> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.offset();
                let d = self.unary()?;
                acc = &acc * &invert(&d).ok_or_else(|| Error::parse(at, "divisor must be a single nonzero term"))?;
            } else if self.starts_atom() {
                acc = &acc * &self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<TrigPoly> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<TrigPoly> {
        let base_at = self.offset();
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let exp_at = self.offset();
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v <= 1e4 => *v as i64,
            _ => return Err(Error::parse(exp_at, "exponent must be an integer")),
        };
        self.pos += 1;
        if paren && !self.eat(')') {
            return Err(Error::parse(self.offset(), "expected ')'"));
        }
        let n = if neg { -n } else { n };
        if n >= 0 {
            let mut out = TrigPoly::one();
            for _ in 0..n {
                out = &out * &base;
            }
            Ok(out)
        } else {
            let inv = invert(&base).ok_or_else(|| Error::parse(base_at, "negative power needs a single nonzero term"))?;
            let mut out = TrigPoly::one();
            for _ in 0..(-n) {
                out = &out * &inv;
            }
            Ok(out)
        }
    }

    fn atom(&mut self) -> Result<TrigPoly> {
        let at = self.offset();
        let tok = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        match tok {
            Some(Tok::Num(v)) => Ok(TrigPoly::constant(Complex64::new(v, 0.0))),
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(TrigPoly::z(1)),
                "zbar" => Ok(TrigPoly::z(-1)),
                "pi" => Ok(TrigPoly::constant(Complex64::new(PI, 0.0))),
                "i" => Ok(TrigPoly::constant(Complex64::new(0.0, 1.0))),
                other => Err(Error::parse(at, format!("unknown name '{other}'"))),
            },
            Some(Tok::Sym('(')) => {
                let f = self.sum()?;
                if !self.eat(')') {
                    return Err(Error::parse(self.offset(), "expected ')'"));
                }
                Ok(f)
            }
            _ => Err(Error::parse(at, "expected a term")),
        }
    }
}

fn invert(f: &TrigPoly) -> Option<TrigPoly> {
    let (k, c) = single_term(f)?;
    Some(TrigPoly::monomial(-k, c.inv()))
}

impl std::str::FromStr for TrigPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_trig_poly(s)
    }
}
