//! Rational functions in the parameters, the coefficient field for
//! polynomials in `z`.
//!
//! Invariants: numerator and denominator are coprime, the denominator is
//! nonzero with graded-lex leading coefficient 1, and zero is `0/1`. These
//! make structural equality coincide with equality in the fraction field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::{gcd, lcm};
use super::poly::{fmt_rational, forward_owned, ParamPoly, Sym};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ParamRat {
    num: ParamPoly,
    den: ParamPoly,
}

impl Default for ParamRat {
    fn default() -> Self {
        ParamRat::zero()
    }
}

impl ParamRat {
    pub fn new(num: ParamPoly, den: ParamPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: ParamPoly, den: ParamPoly) -> Self {
        if num.is_zero() {
            return ParamRat::zero();
        }
        let (num, den) = if den.is_constant() {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (
                    num.div_exact(&g).expect("gcd divides numerator"),
                    den.div_exact(&g).expect("gcd divides denominator"),
                )
            }
        };
        let lc = den.leading_coefficient().recip();
        ParamRat {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    pub fn zero() -> Self {
        ParamRat {
            num: ParamPoly::zero(),
            den: ParamPoly::one(),
        }
    }

    pub fn one() -> Self {
        ParamRat::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        ParamRat::from_poly(ParamPoly::int(n))
    }

    pub fn from_rational(q: BigRational) -> Self {
        ParamRat::from_poly(ParamPoly::constant(q))
    }

    pub fn from_poly(p: ParamPoly) -> Self {
        ParamRat {
            num: p,
            den: ParamPoly::one(),
        }
    }

    pub fn var(name: &str) -> Self {
        ParamRat::from_poly(ParamPoly::var(name))
    }

    pub fn num(&self) -> &ParamPoly {
        &self.num
    }

    pub fn den(&self) -> &ParamPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<BigRational> {
        if !self.den.is_constant() {
            return None;
        }
        Some(self.num.constant_value()? / self.den.constant_value()?)
    }

    /// Whether this is a constant times a single monomial (or its inverse
    /// pieces), i.e. it vanishes only where a parameter vanishes.
    pub fn is_monomial(&self) -> bool {
        self.num.num_terms() == 1 && self.den.num_terms() == 1
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &ParamRat) -> Option<Self> {
        Some(self * &other.inv()?)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return ParamRat::zero();
        }
        ParamRat {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        Some(ParamRat {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// Substitutes parameters by rational functions; unassigned symbols stay.
    pub fn substitute(&self, map: &BTreeMap<String, ParamRat>) -> Result<ParamRat> {
        let n = substitute_poly(&self.num, map);
        let d = substitute_poly(&self.den, map);
        if d.is_zero() {
            return Err(Error::Pole(format!("denominator {} vanishes", self.den)));
        }
        Ok(&n * &d.inv().expect("nonzero"))
    }

    /// Evaluates at a rational point; `None` if a symbol is missing or the
    /// denominator vanishes.
    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point)? / d)
    }

    /// Polynomials whose nonvanishing this value's well-definedness and
    /// nonvanishing assume.
    pub fn nonzero_factors(&self) -> Vec<ParamPoly> {
        let mut v = self.num.nonzero_factors();
        v.extend(self.den.nonzero_factors());
        v
    }

    /// Integer-coefficient numerator/denominator pair with the same ratio,
    /// for display.
    pub fn cleared(&self) -> (ParamPoly, ParamPoly) {
        let mut l = num_bigint::BigInt::one();
        for (_, c) in self.num.terms().chain(self.den.terms()) {
            l = l.lcm(c.denom());
        }
        let l = BigRational::from_integer(l);
        (self.num.scale(&l), self.den.scale(&l))
    }
}

/// Substitutes into a polynomial, producing a rational function.
pub fn substitute_poly(p: &ParamPoly, map: &BTreeMap<String, ParamRat>) -> ParamRat {
    let mut acc = ParamRat::zero();
    for (m, c) in p.terms() {
        let mut t = ParamRat::from_rational(c.clone());
        for (s, e) in m.pairs() {
            let base = match map.get(&**s) {
                Some(v) => v.clone(),
                None => ParamRat::var(s),
            };
            t = &t * &base.pow(*e as i32).expect("positive power");
        }
        acc = &acc + &t;
    }
    acc
}

/// Least common multiple of the denominators of several values.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a ParamRat>>(it: I) -> ParamPoly {
    it.into_iter().fold(ParamPoly::one(), |acc, r| lcm(&acc, r.den()))
}

impl fmt::Display for ParamRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let (n, d) = self.cleared();
        let ns = if n.num_terms() > 1 { format!("({n})") } else { n.to_string() };
        let simple_den = d.num_terms() == 1 && d.leading_coefficient().is_one() && d.leading().is_some_and(|(m, _)| m.pairs().len() == 1);
        if simple_den || d.is_constant() {
            write!(f, "{ns}/{d}")
        } else {
            write!(f, "{ns}/({d})")
        }
    }
}

impl Add for &ParamRat {
    type Output = ParamRat;
    fn add(self, rhs: &ParamRat) -> ParamRat {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            return ParamRat::reduce(&self.num + &rhs.num, self.den.clone());
        }
        ParamRat::reduce(&(&self.num * &rhs.den) + &(&rhs.num * &self.den), &self.den * &rhs.den)
    }
}

impl Sub for &ParamRat {
    type Output = ParamRat;
    fn sub(self, rhs: &ParamRat) -> ParamRat {
        self + &(-rhs)
    }
}

impl Mul for &ParamRat {
    type Output = ParamRat;
    fn mul(self, rhs: &ParamRat) -> ParamRat {
        if self.is_zero() || rhs.is_zero() {
            return ParamRat::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return ParamRat::from_poly(&self.num * &rhs.num);
        }
        ParamRat::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        ParamRat {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

forward_owned!(ParamRat, Add add, Sub sub, Mul mul);

impl Neg for ParamRat {
    type Output = ParamRat;
    fn neg(self) -> ParamRat {
        -&self
    }
}

impl From<i64> for ParamRat {
    fn from(n: i64) -> Self {
        ParamRat::from_int(n)
    }
}

impl From<BigRational> for ParamRat {
    fn from(q: BigRational) -> Self {
        ParamRat::from_rational(q)
    }
}

/// Formats a rational as a human-friendly signed string.
pub fn fmt_signed(q: &BigRational) -> String {
    if q.is_negative() {
        format!("-{}", fmt_rational(&q.abs()))
    } else {
        fmt_rational(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rat;

    fn v(s: &str) -> ParamRat {
        ParamRat::var(s)
    }

    #[test]
    fn reduces_common_factors() {
        let t = v("t");
        let one = ParamRat::one();
        let a = &(&t * &t) - &one;
        let b = &t - &one;
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q, &t + &one);
        assert!(q.den().is_one());
    }

    #[test]
    fn canonical_denominator_is_monic() {
        let t = v("t");
        let q = ParamRat::one().checked_div(&t.scale(&rat(-5, 1))).unwrap();
        assert_eq!(q.den(), &ParamPoly::var("t"));
        assert_eq!(q.num().constant_value().unwrap(), rat(-1, 5));
        assert_eq!(q.to_string(), "-1/(5*t)");
    }

    #[test]
    fn substitution_can_hit_a_pole() {
        let t = v("t");
        let q = ParamRat::one().checked_div(&(&t - &ParamRat::one())).unwrap();
        let mut m = BTreeMap::new();
        m.insert("t".to_string(), ParamRat::one());
        assert!(matches!(q.substitute(&m), Err(Error::Pole(_))));
        m.insert("t".to_string(), v("s"));
        assert_eq!(q.substitute(&m).unwrap().to_string(), "1/(s - 1)");
    }

    #[test]
    fn inverse_of_zero_is_none() {
        assert!(ParamRat::zero().inv().is_none());
    }
}
