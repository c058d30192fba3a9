//! Sparse multivariate polynomials over the rationals in named parameter
//! symbols.
//!
//! Terms are keyed by [`Monomial`] and kept in graded-lexicographic order,
//! where variables compare alphabetically (the alphabetically first symbol is
//! the most significant). A polynomial never stores a zero coefficient, so
//! structural equality is mathematical equality.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Interned parameter name.
pub type Sym = Arc<str>;

/// Product of symbol powers, stored sorted by symbol with positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Monomial(Vec<(Sym, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Monomial(vec![(Arc::from(name), 1)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (Sym, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<Sym, u32> = BTreeMap::new();
        for (s, e) in pairs {
            *map.entry(s).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &str) -> u32 {
        self.0.iter().find(|(s, _)| &**s == v).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn pairs(&self) -> &[(Sym, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial::from_pairs(self.0.iter().chain(other.0.iter()).cloned())
    }

    /// Exact quotient, or `None` when `other` does not divide `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        let mut j = 0;
        for (s, e) in &self.0 {
            let mut e = *e;
            if j < other.0.len() && other.0[j].0 == *s {
                if other.0[j].1 > e {
                    return None;
                }
                e -= other.0[j].1;
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *s {
                return None;
            }
            if e > 0 {
                out.push((s.clone(), e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .filter_map(|(s, e)| {
                    let f = other.exponent(s);
                    (f > 0).then(|| (s.clone(), (*e).min(f)))
                })
                .collect(),
        )
    }

    /// Removes `v` and returns its former exponent.
    fn split(&self, v: &str) -> (u32, Monomial) {
        let e = self.exponent(v);
        (e, Monomial(self.0.iter().filter(|(s, _)| &**s != v).cloned().collect()))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let (a, b) = (self.0.get(i), other.0.get(j));
            let ord = match (a, b) {
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        ea.cmp(eb)
                    }
                    Ordering::Less => {
                        i += 1;
                        Ordering::Greater
                    }
                    Ordering::Greater => {
                        j += 1;
                        Ordering::Less
                    }
                },
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => unreachable!(),
            };
            if ord != Ordering::Equal {
                return ord;
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (s, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Builds the rational `n/d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `p` or `p/q`.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Debug)]
pub struct ParamPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl ParamPoly {
    pub fn zero() -> Self {
        ParamPoly::default()
    }

    pub fn one() -> Self {
        ParamPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        ParamPoly::term(Monomial::one(), c)
    }

    pub fn int(n: i64) -> Self {
        ParamPoly::constant(BigRational::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Self {
        ParamPoly::term(Monomial::var(name), BigRational::one())
    }

    pub fn term(m: Monomial, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ParamPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(it: I) -> Self {
        let mut p = ParamPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let remove = match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                v.is_zero()
            }
            None => {
                self.terms.insert(m.clone(), c);
                false
            }
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Leading term under graded-lex order.
    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> BigRational {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(BigRational::zero)
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(s, _)| s.clone())).collect()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &BigRational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        ParamPoly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> ParamPoly {
        let mut acc = ParamPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Scales so that the graded-lex leading coefficient is one.
    pub fn monic(&self) -> ParamPoly {
        match self.leading() {
            None => ParamPoly::zero(),
            Some((_, c)) => self.scale(&c.recip()),
        }
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        it.fold(first.clone(), |g, m| g.gcd(m))
    }

    /// Coefficients in powers of `v`, lowest first; each has no `v`.
    pub fn coefficients_in(&self, v: &str) -> Vec<ParamPoly> {
        let mut out = vec![ParamPoly::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(v);
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coefficients_in(v: &str, coeffs: &[ParamPoly]) -> ParamPoly {
        let sym: Sym = Arc::from(v);
        let mut p = ParamPoly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            for (m, q) in &c.terms {
                let m = if e == 0 {
                    m.clone()
                } else {
                    m.mul(&Monomial(vec![(sym.clone(), e as u32)]))
                };
                p.add_term(m, q.clone());
            }
        }
        p
    }

    /// Exact division; `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &ParamPoly) -> Option<ParamPoly> {
        let (dm, dc) = d.leading()?;
        if let Some(c) = d.constant_value() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = (dm.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = ParamPoly::zero();
        while let Some((rm, rc)) = r.leading() {
            let m = rm.div(&dm)?;
            let c = rc / &dc;
            r = &r - &d.mul_term(&m, &c);
            q.add_term(m, c);
        }
        Some(q)
    }

    /// Evaluates at a point; `None` if some variable is unassigned.
    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (s, e) in &m.0 {
                let v = point.get(&**s)?;
                t *= num_traits::pow(v.clone(), *e as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    /// Nonzero factors whose nonvanishing this polynomial's nonvanishing
    /// asserts: each variable of the monomial content and the monic
    /// remainder when it is not constant.
    pub fn nonzero_factors(&self) -> Vec<ParamPoly> {
        if self.is_constant() {
            return Vec::new();
        }
        let mc = self.monomial_content();
        let mut out: Vec<ParamPoly> = mc.0.iter().map(|(s, _)| ParamPoly::var(s)).collect();
        let rest = self
            .div_exact(&ParamPoly::term(mc, BigRational::one()))
            .expect("monomial content divides");
        if !rest.is_constant() {
            out.push(rest.monic());
        }
        out
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
    )*};
}
pub(crate) use forward_owned;

forward_owned!(ParamPoly, Add add, Sub sub, Mul mul);

impl Neg for ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ParamPoly {
        ParamPoly::var(s)
    }

    #[test]
    fn grlex_orders_by_degree_then_alphabet() {
        let a = Monomial::var("a");
        let b = Monomial::var("b");
        let ab = a.mul(&b);
        let b2 = b.mul(&b);
        assert!(a > b);
        assert!(ab > a);
        assert!(ab > b2);
        assert!(Monomial::one() < b);
    }

    #[test]
    fn arithmetic_cancels_terms() {
        let t = p("t");
        let x = &(&t + &ParamPoly::one()) * &(&t - &ParamPoly::one());
        assert_eq!(x.to_string(), "t^2 - 1");
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn exact_division() {
        let t = p("t");
        let r = p("rho");
        let a = &(&t * &r) + &(&t * &t);
        assert_eq!(a.div_exact(&t).unwrap(), &r + &t);
        assert!(a.div_exact(&r).is_none());
    }

    #[test]
    fn coefficients_round_trip() {
        let t = p("t");
        let s = p("s");
        let a = &(&(&t * &t) * &s) + &(&s + &ParamPoly::int(3));
        let cs = a.coefficients_in("t");
        assert_eq!(cs.len(), 3);
        assert_eq!(ParamPoly::from_coefficients_in("t", &cs), a);
    }

    #[test]
    fn nonzero_factors_split_monomials() {
        let t = p("t");
        let r = p("rho");
        let a = (&(&t * &r) * &(&t - &ParamPoly::one())).scale(&rat(-2, 1));
        let f = a.nonzero_factors();
        assert_eq!(f, vec![r.clone(), t.clone(), &t - &ParamPoly::one()]);
    }
}
