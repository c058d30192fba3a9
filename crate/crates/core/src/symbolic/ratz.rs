//! Rational functions in `z` with parameter-dependent coefficients.
//!
//! A [`RatZ`] is kept reduced: numerator and denominator are coprime over
//! the parameter fraction field and the denominator is monic in `z`. Any
//! parameter polynomial that had to be assumed nonzero along the way
//! (leading coefficients divided by, coefficient denominators) is carried in
//! `side_conditions`. Equality ignores the side conditions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;

use super::matrix::Scalar;
use super::param::ParamRat;
use super::poly::{forward_owned, ParamPoly};
use super::polyz::{fmt_ratio, PolyZ};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RatZ {
    num: PolyZ,
    den: PolyZ,
    side: BTreeSet<ParamPoly>,
}

impl PartialEq for RatZ {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl Eq for RatZ {}

impl Hash for RatZ {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl RatZ {
    /// Reduces `num/den` to canonical form.
    pub fn normalize(num: PolyZ, den: PolyZ) -> Result<RatZ> {
        Self::normalize_with(num, den, BTreeSet::new())
    }

    fn normalize_with(num: PolyZ, den: PolyZ, mut side: BTreeSet<ParamPoly>) -> Result<RatZ> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatZ {
                num,
                den: PolyZ::one(),
                side,
            });
        }
        let (num, den) = if den.degree() == Some(0) {
            (num, den)
        } else {
            let g = PolyZ::gcd(&num, &den, &mut side);
            if g.is_one() {
                (num, den)
            } else {
                let (qn, _) = num.divrem(&g, &mut side);
                let (qd, _) = den.divrem(&g, &mut side);
                (qn, qd)
            }
        };
        let lc = den.lc();
        side.extend(lc.nonzero_factors());
        let inv = lc.inv().expect("nonzero leading coefficient");
        let (num, den) = (num.scale(&inv), den.scale(&inv));
        for c in num.coeffs().iter().chain(den.coeffs()) {
            side.extend(c.den().nonzero_factors());
        }
        Ok(RatZ { num, den, side })
    }

    pub fn zero() -> Self {
        RatZ::from_poly(PolyZ::zero())
    }

    pub fn one() -> Self {
        RatZ::from_param(ParamRat::one())
    }

    pub fn z() -> Self {
        RatZ::from_poly(PolyZ::z())
    }

    pub fn from_int(n: i64) -> Self {
        RatZ::from_param(ParamRat::from_int(n))
    }

    pub fn from_param(c: ParamRat) -> Self {
        RatZ::from_poly(PolyZ::constant(c))
    }

    pub fn from_poly(p: PolyZ) -> Self {
        RatZ::normalize(p, PolyZ::one()).expect("denominator one")
    }

    /// `z^k` for any integer `k`.
    pub fn zpow(k: i32) -> Self {
        let m = PolyZ::monomial(k.unsigned_abs() as usize, ParamRat::one());
        if k >= 0 {
            RatZ::from_poly(m)
        } else {
            RatZ::normalize(PolyZ::one(), m).expect("nonzero")
        }
    }

    pub fn num(&self) -> &PolyZ {
        &self.num
    }

    pub fn den(&self) -> &PolyZ {
        &self.den
    }

    pub fn side_conditions(&self) -> &BTreeSet<ParamPoly> {
        &self.side
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg den - deg num`; fails for the zero function.
    pub fn relative_degree(&self) -> Result<i64> {
        match self.num.degree() {
            None => Err(Error::Unsupported("relative degree of the zero function is undefined".into())),
            Some(n) => Ok(self.den.degree().unwrap_or(0) as i64 - n as i64),
        }
    }

    pub fn is_proper(&self) -> bool {
        self.relative_degree().map_or(true, |r| r >= 0)
    }

    /// Value as `z` tends to infinity (the feedthrough term) of a proper
    /// function.
    pub fn at_infinity(&self) -> ParamRat {
        match (self.num.degree(), self.den.degree()) {
            (Some(n), Some(d)) if n == d => self.num.lc().checked_div(&self.den.lc()).expect("monic"),
            _ => ParamRat::zero(),
        }
    }

    pub fn inv(&self) -> Result<RatZ> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatZ::normalize_with(self.den.clone(), self.num.clone(), self.side.clone())
    }

    pub fn checked_div(&self, o: &RatZ) -> Result<RatZ> {
        Ok(self * &o.inv()?)
    }

    /// Multiplies by `z^k`.
    pub fn mul_zpow(&self, k: i32) -> RatZ {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let (n, d) = if k > 0 {
            (self.num.shift(k as usize), self.den.clone())
        } else {
            (self.num.clone(), self.den.shift(k.unsigned_abs() as usize))
        };
        RatZ::normalize_with(n, d, self.side.clone()).expect("nonzero denominator")
    }

    pub fn scale(&self, c: &ParamRat) -> RatZ {
        RatZ::normalize_with(self.num.scale(c), self.den.clone(), self.side.clone()).expect("nonzero denominator")
    }

    /// Substitutes parameters; fails when the denominator vanishes
    /// identically.
    pub fn substitute(&self, map: &BTreeMap<String, ParamRat>) -> Result<RatZ> {
        let (cn, cd) = PolyZ::cleared_pair(&self.num, &self.den);
        let sub = |c: &[ParamPoly]| PolyZ::from_coeffs(c.iter().map(|p| super::param::substitute_poly(p, map)).collect());
        let (n, d) = (sub(&cn), sub(&cd));
        if d.is_zero() {
            return Err(Error::Pole(format!("denominator of {self} vanishes")));
        }
        RatZ::normalize(n, d)
    }

    /// Evaluates at a point; `None` if a symbol is unassigned or a pole.
    pub fn eval(&self, z: &BigRational, point: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let d = self.den.eval(z, point)?;
        if num_traits::Zero::is_zero(&d) {
            return None;
        }
        Some(self.num.eval(z, point)? / d)
    }

    pub fn vars(&self) -> BTreeSet<super::poly::Sym> {
        self.num.coeffs().iter().chain(self.den.coeffs()).flat_map(|c| c.vars()).collect()
    }

    fn merged_side(&self, o: &RatZ) -> BTreeSet<ParamPoly> {
        if o.side.is_empty() {
            return self.side.clone();
        }
        let mut s = self.side.clone();
        s.extend(o.side.iter().cloned());
        s
    }
}

/// Exact equality test by cross-multiplication.
pub fn ratz_equal(a: &RatZ, b: &RatZ) -> bool {
    (&a.num * &b.den - &b.num * &a.den).is_zero()
}

impl fmt::Display for RatZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = PolyZ::cleared_pair(&self.num, &self.den);
        write!(f, "{}", fmt_ratio(&n, &d))
    }
}

impl Add for &RatZ {
    type Output = RatZ;
    fn add(self, o: &RatZ) -> RatZ {
        if self.is_zero() {
            let mut r = o.clone();
            r.side.extend(self.side.iter().cloned());
            return r;
        }
        if o.is_zero() {
            let mut r = self.clone();
            r.side.extend(o.side.iter().cloned());
            return r;
        }
        let side = self.merged_side(o);
        let (n, d) = if self.den == o.den {
            (&self.num + &o.num, self.den.clone())
        } else {
            (&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den)
        };
        RatZ::normalize_with(n, d, side).expect("nonzero denominator")
    }
}

impl Sub for &RatZ {
    type Output = RatZ;
    fn sub(self, o: &RatZ) -> RatZ {
        self + &(-o)
    }
}

impl Mul for &RatZ {
    type Output = RatZ;
    fn mul(self, o: &RatZ) -> RatZ {
        let side = self.merged_side(o);
        if self.is_zero() || o.is_zero() {
            return RatZ {
                num: PolyZ::zero(),
                den: PolyZ::one(),
                side,
            };
        }
        RatZ::normalize_with(&self.num * &o.num, &self.den * &o.den, side).expect("nonzero denominator")
    }
}

impl Neg for &RatZ {
    type Output = RatZ;
    fn neg(self) -> RatZ {
        RatZ {
            num: -&self.num,
            den: self.den.clone(),
            side: self.side.clone(),
        }
    }
}

forward_owned!(RatZ, Add add, Sub sub, Mul mul);

impl Neg for RatZ {
    type Output = RatZ;
    fn neg(self) -> RatZ {
        -&self
    }
}

impl Scalar for RatZ {
    fn zero() -> Self {
        RatZ::zero()
    }
    fn one() -> Self {
        RatZ::one()
    }
    fn is_zero(&self) -> bool {
        RatZ::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn recip(&self) -> Option<Self> {
        self.inv().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rat;

    fn p(c: &[i64]) -> PolyZ {
        PolyZ::from_coeffs(c.iter().map(|&x| ParamRat::from_int(x)).collect())
    }

    #[test]
    fn cancels_common_root() {
        let r = RatZ::normalize(p(&[-3, 1]), p(&[3, -4, 1])).unwrap();
        assert_eq!(r.num(), &p(&[1]));
        assert_eq!(r.den(), &p(&[-1, 1]));
        assert_eq!(r.to_string(), "1/(z - 1)");
    }

    #[test]
    fn zero_numerator_gives_zero() {
        let r = RatZ::normalize(PolyZ::zero(), p(&[-1, 1])).unwrap();
        assert!(r.is_zero());
        assert_eq!(r.den(), &PolyZ::one());
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let e = RatZ::normalize(p(&[1]), PolyZ::zero()).unwrap_err();
        assert_eq!(e.to_string(), "division by zero polynomial");
    }

    #[test]
    fn monic_denominator_with_rational_numerator() {
        let r = RatZ::normalize(p(&[1, -2]), p(&[10, -20, 10])).unwrap();
        assert_eq!(r.den(), &p(&[1, -2, 1]));
        let expected = PolyZ::from_coeffs(vec![ParamRat::from_rational(rat(1, 10)), ParamRat::from_rational(rat(-1, 5))]);
        assert_eq!(r.num(), &expected);
    }

    #[test]
    fn relative_degrees() {
        let zm1 = p(&[-1, 1]);
        assert_eq!(RatZ::normalize(p(&[1]), zm1.clone()).unwrap().relative_degree().unwrap(), 1);
        assert_eq!(RatZ::normalize(p(&[-1, 2]), zm1.clone()).unwrap().relative_degree().unwrap(), 0);
        assert_eq!(RatZ::normalize(p(&[0, 1]), zm1).unwrap().relative_degree().unwrap(), 0);
        assert!(RatZ::zero().relative_degree().is_err());
    }

    #[test]
    fn parameter_denominator_is_a_side_condition() {
        let t = ParamRat::var("t");
        let r = RatZ::from_param(t.clone()).inv().unwrap();
        assert!(r.side_conditions().contains(&ParamPoly::var("t")));
        assert_eq!((&r * &RatZ::from_param(t)), RatZ::one());
    }
}
