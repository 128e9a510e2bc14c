//! Horner-chain products of unit-interval variables.
//!
//! Text syntax, one variable per `x`:
//!
//! ```text
//! x*x*x              x1·x2·x3
//! x*(x + x*x)        x1·(x2 + x3·x4)
//! 2*x[1]*(1 + x)     2·x1·(1 + x2), with measure x1 dx1
//! ```
//!
//! A number before `*x` is the variable's weight; `[e]` is the exponent in
//! its measure `x^e dx`. Variables are numbered in reading order.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use super::FormFError;
use crate::rational::{fmt_rational, int, parse_rational, to_f64, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainVar {
    pub weight: Rational,
    pub exponent: u32,
}

/// `constant + Σ terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub constant: Rational,
    pub terms: Vec<ChainExpr>,
}

/// `weight · x^{[e]} · (factor)`, or a bare variable when `factor` is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainExpr {
    pub var: ChainVar,
    pub factor: Option<Factor>,
}

impl ChainExpr {
    pub fn leaf(weight: Rational, exponent: u32) -> Self {
        ChainExpr { var: ChainVar { weight, exponent }, factor: None }
    }

    /// `x` with unit weight.
    pub fn x() -> Self {
        ChainExpr::leaf(int(1), 0)
    }

    /// `x₁ x₂ ⋯ x_n`.
    pub fn product(n: usize) -> Self {
        assert!(n >= 1, "at least one variable");
        let mut e = ChainExpr::x();
        for _ in 1..n {
            e = ChainExpr::x().times(Factor { constant: int(0), terms: vec![e] });
        }
        e
    }

    pub fn times(mut self, factor: Factor) -> Self {
        self.factor = Some(factor);
        self
    }

    pub fn num_vars(&self) -> usize {
        1 + self.factor.as_ref().map_or(0, |f| f.terms.iter().map(ChainExpr::num_vars).sum())
    }

    /// Measure exponents in reading order.
    pub fn exponents(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_exponents(&mut out);
        out
    }

    fn collect_exponents(&self, out: &mut Vec<u32>) {
        out.push(self.var.exponent);
        if let Some(f) = &self.factor {
            for t in &f.terms {
                t.collect_exponents(out);
            }
        }
    }

    /// Value at a point of the cube; `xs` follows reading order.
    pub fn eval(&self, xs: &[f64]) -> f64 {
        let mut idx = 0;
        self.eval_at(xs, &mut idx)
    }

    fn eval_at(&self, xs: &[f64], idx: &mut usize) -> f64 {
        let x = xs[*idx];
        *idx += 1;
        let mut v = to_f64(&self.var.weight) * x;
        if let Some(f) = &self.factor {
            let mut s = to_f64(&f.constant);
            for t in &f.terms {
                s += t.eval_at(xs, idx);
            }
            v *= s;
        }
        v
    }

    pub fn validate(&self) -> Result<(), FormFError> {
        if !self.var.weight.is_positive() {
            return Err(FormFError::NonPositiveWeight(fmt_rational(&self.var.weight)));
        }
        if let Some(f) = &self.factor {
            if f.constant.is_negative() {
                return Err(FormFError::NegativeConstant(fmt_rational(&f.constant)));
            }
            if f.terms.is_empty() && f.constant.is_zero() {
                return Err(FormFError::Invalid("empty factor".into()));
            }
            for t in &f.terms {
                t.validate()?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ChainExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.var.weight.is_one() {
            write!(f, "{}*", fmt_rational(&self.var.weight))?;
        }
        write!(f, "x")?;
        if self.var.exponent > 0 {
            write!(f, "[{}]", self.var.exponent)?;
        }
        if let Some(fac) = &self.factor {
            if fac.constant.is_zero() && fac.terms.len() == 1 {
                return write!(f, "*{}", fac.terms[0]);
            }
            write!(f, "*(")?;
            let mut first = true;
            if !fac.constant.is_zero() {
                write!(f, "{}", fmt_rational(&fac.constant))?;
                first = false;
            }
            for t in &fac.terms {
                if !first {
                    write!(f, " + ")?;
                }
                write!(f, "{t}")?;
                first = false;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for ChainExpr {
    type Err = FormFError;

    fn from_str(s: &str) -> Result<Self, FormFError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let e = p.chain()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        e.validate()?;
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> FormFError {
        FormFError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<Rational, FormFError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'/') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        parse_rational(text).ok_or(FormFError::Parse { pos: start, msg: format!("bad number {text:?}") })
    }

    /// `[weight '*'] 'x' ['[' e ']'] ['*' ('(' sum ')' | chain)]`
    fn chain(&mut self) -> Result<ChainExpr, FormFError> {
        let weight = if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let w = self.number()?;
            if !self.eat(b'*') {
                return Err(self.error("expected '*' after weight"));
            }
            w
        } else {
            int(1)
        };
        self.chain_after_weight(weight)
    }

    fn chain_after_weight(&mut self, weight: Rational) -> Result<ChainExpr, FormFError> {
        if !self.eat(b'x') {
            return Err(self.error("expected 'x'"));
        }
        let mut exponent = 0;
        if self.eat(b'[') {
            let e = self.number()?;
            exponent = crate::rational::as_i64(&e)
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| self.error("exponent must be a nonnegative integer"))?;
            if !self.eat(b']') {
                return Err(self.error("expected ']'"));
            }
        }
        let mut e = ChainExpr::leaf(weight, exponent);
        if self.eat(b'*') {
            let factor = if self.eat(b'(') {
                let f = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                f
            } else {
                Factor { constant: int(0), terms: vec![self.chain()?] }
            };
            e.factor = Some(factor);
        }
        Ok(e)
    }

    /// `item ('+' item)*` with `item = number | chain`.
    fn sum(&mut self) -> Result<Factor, FormFError> {
        let mut f = Factor { constant: int(0), terms: Vec::new() };
        loop {
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                let n = self.number()?;
                if self.eat(b'*') {
                    f.terms.push(self.chain_after_weight(n)?);
                } else {
                    f.constant += n;
                }
            } else {
                f.terms.push(self.chain()?);
            }
            if !self.eat(b'+') {
                return Ok(f);
            }
        }
    }
}
