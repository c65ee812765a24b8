//! Recursive-descent parser for generator text such as
//! `z2^2 + (1/2 - 3*i)*z1*z3 - 7/4`.
//!
//! Grammar (whitespace ignored):
//! ```text
//! expr   := [+|-] term ((+|-) term)*
//! term   := factor ((*|/) factor)*        divisor must be a nonzero constant
//! factor := atom [^ uint]
//! atom   := uint | i | z<k> | ( expr )
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{MultiIndex, Poly};
use crate::error::{Error, Result};
use crate::exactnum::GaussRational;

pub fn parse_poly(text: &str, nvars: usize) -> Result<Poly> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { s: &chars, pos: 0, nvars };
    if chars.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let out = p.expr()?;
    if p.pos != chars.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    s: &'a [char],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        let rest: String = self.s[self.pos.min(self.s.len())..].iter().collect();
        Error::Parse(format!("{msg} at offset {} (`{rest}`)", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Option<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.s[start..self.pos].iter().collect())
    }

    fn expr(&mut self) -> Result<Poly> {
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                let d = self.factor()?;
                let c = match d.terms() {
                    [(c, a)] if a.degree() == 0 => c.clone(),
                    [] => return Err(Error::DivisionByZero),
                    _ => return Err(self.err("division by a non-constant")),
                };
                acc = acc.scale(&c.inv()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.uint().ok_or_else(|| self.err("expected exponent"))?;
            let e: u32 = e.parse().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let n = self.nvars;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some('i') => {
                self.pos += 1;
                Ok(Poly::constant(n, GaussRational::i()))
            }
            Some('z') => {
                self.pos += 1;
                let k = self.uint().ok_or_else(|| self.err("expected variable index"))?;
                let k: usize = k.parse().map_err(|_| self.err("bad variable index"))?;
                if k == 0 || k > n {
                    return Err(self.err(&format!("variable z{k} outside z1..z{n}")));
                }
                Ok(Poly::monomial(GaussRational::one(), MultiIndex::var_pow(n, k - 1, 1)))
            }
            Some(c) if c.is_ascii_digit() => {
                let digits = self.uint().unwrap_or_default();
                let v: BigInt = digits.parse().map_err(|_| self.err("bad integer"))?;
                Ok(Poly::constant(n, GaussRational::real(BigRational::from_integer(v))))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}
