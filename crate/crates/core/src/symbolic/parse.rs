//! Parser for rational-function expressions such as `-t*z/(z-1)` or
//! `(1-2*z)/(10*(z-1)^2)`.
//!
//! `z` is the transform variable; every other identifier is a parameter.
//! Decimal literals are read exactly (`0.1` is `1/10`).

use num_bigint::BigInt;
use num_rational::BigRational;

use super::matrix::Matrix;
use super::matz::MatRatZ;
use super::param::ParamRat;
use super::ratz::RatZ;
use crate::error::{Error, Result};

/// Parses an exact decimal or integer literal.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() { 0.into() } else { digits.parse().ok()? };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

struct P<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> P<'a> {
    fn err(&self, m: &str) -> Error {
        Error::Syntax {
            line: 1,
            column: self.i + 1,
            message: m.to_string(),
        }
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && (self.s[self.i] as char).is_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> Result<RatZ> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.i += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.i += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatZ> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.i += 1;
                    acc = &acc * &self.unary()?;
                }
                b'/' => {
                    self.i += 1;
                    let d = self.unary()?;
                    acc = acc.checked_div(&d)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatZ> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatZ> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let neg = if self.peek() == Some(b'-') {
                self.i += 1;
                true
            } else {
                false
            };
            self.ws();
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.i])
                .ok()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| self.err("expected integer exponent"))?;
            let mut acc = RatZ::one();
            for _ in 0..e {
                acc = &acc * &base;
            }
            return if neg { acc.inv() } else { Ok(acc) };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatZ> {
        let c = self.peek().ok_or_else(|| self.err("unexpected end of input"))?;
        if c == b'(' {
            self.i += 1;
            let v = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected `)`"));
            }
            self.i += 1;
            return Ok(v);
        }
        let start = self.i;
        if c.is_ascii_digit() || c == b'.' {
            while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
                self.i += 1;
            }
            let lit = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
            let q = parse_decimal(lit).ok_or_else(|| self.err("bad number"))?;
            return Ok(RatZ::from_param(ParamRat::from_rational(q)));
        }
        let rest = std::str::from_utf8(&self.s[start..]).unwrap_or("");
        if rest.starts_with(|ch: char| ch.is_alphabetic() || ch == '_') {
            let len: usize = rest
                .chars()
                .take_while(|ch| ch.is_alphanumeric() || *ch == '_')
                .map(char::len_utf8)
                .sum();
            self.i += len;
            let id = &rest[..len];
            return Ok(if id == "z" {
                RatZ::z()
            } else {
                RatZ::from_param(ParamRat::var(id))
            });
        }
        Err(self.err(&format!("unexpected character `{}`", c as char)))
    }
}

/// Parses a rational function of `z` and parameters.
pub fn parse_ratz(src: &str) -> Result<RatZ> {
    let norm = src.replace('\u{2212}', "-");
    let mut p = P { s: norm.as_bytes(), i: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

/// Parses a matrix given as rows of expression strings.
pub fn parse_matrix(rows: &[&[&str]]) -> Result<MatRatZ> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|s| parse_ratz(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?,
    )
}
