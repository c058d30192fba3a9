//! Univariate polynomials in `z` over the parameter fraction field.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::gcd::lcm;
use super::param::ParamRat;
use super::poly::{fmt_rational, forward_owned, ParamPoly};
use crate::error::Result;

/// Dense coefficients, lowest degree first, with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct PolyZ {
    c: Vec<ParamRat>,
}

impl PolyZ {
    pub fn zero() -> Self {
        PolyZ { c: Vec::new() }
    }

    pub fn one() -> Self {
        PolyZ::constant(ParamRat::one())
    }

    pub fn z() -> Self {
        PolyZ::monomial(1, ParamRat::one())
    }

    pub fn constant(c: ParamRat) -> Self {
        PolyZ::from_coeffs(vec![c])
    }

    pub fn monomial(k: usize, c: ParamRat) -> Self {
        let mut v = vec![ParamRat::zero(); k];
        v.push(c);
        PolyZ::from_coeffs(v)
    }

    pub fn from_coeffs(mut c: Vec<ParamRat>) -> Self {
        while c.last().is_some_and(ParamRat::is_zero) {
            c.pop();
        }
        PolyZ { c }
    }

    pub fn coeffs(&self) -> &[ParamRat] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> ParamRat {
        self.c.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }

    /// Degree; the zero polynomial has no degree.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lc(&self) -> ParamRat {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn scale(&self, k: &ParamRat) -> PolyZ {
        PolyZ::from_coeffs(self.c.iter().map(|x| x * k).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> PolyZ {
        if self.is_zero() {
            return PolyZ::zero();
        }
        let mut v = vec![ParamRat::zero(); k];
        v.extend(self.c.iter().cloned());
        PolyZ { c: v }
    }

    /// Division with remainder; records the divisor's leading coefficient
    /// as assumed nonzero.
    pub fn divrem(&self, d: &PolyZ, side: &mut BTreeSet<ParamPoly>) -> (PolyZ, PolyZ) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lc = d.lc();
        side.extend(lc.nonzero_factors());
        let inv = lc.inv().expect("nonzero leading coefficient");
        let mut r = self.c.clone();
        let mut q = vec![ParamRat::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let f = &r[r.len() - 1] * &inv;
            for (i, dc) in d.c.iter().enumerate() {
                r[i + k] = &r[i + k] - &(&f * dc);
            }
            q[k] = f;
            r.pop();
            while r.last().is_some_and(ParamRat::is_zero) {
                r.pop();
            }
        }
        (PolyZ::from_coeffs(q), PolyZ::from_coeffs(r))
    }

    /// Monic greatest common divisor by the Euclidean algorithm.
    pub fn gcd(a: &PolyZ, b: &PolyZ, side: &mut BTreeSet<ParamPoly>) -> PolyZ {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b, side);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lc = a.lc();
        a.scale(&lc.inv().expect("nonzero"))
    }

    pub fn substitute(&self, map: &BTreeMap<String, ParamRat>) -> Result<PolyZ> {
        Ok(PolyZ::from_coeffs(self.c.iter().map(|x| x.substitute(map)).collect::<Result<_>>()?))
    }

    /// Evaluates at `z` and a parameter point.
    pub fn eval(&self, z: &BigRational, point: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for c in self.c.iter().rev() {
            acc = acc * z + c.eval(point)?;
        }
        Some(acc)
    }

    /// Rewrites as polynomial coefficients by multiplying through by the
    /// least common multiple of all coefficient denominators (shared with
    /// `other`, if given) and clearing rational content.
    pub(crate) fn cleared_pair(a: &PolyZ, b: &PolyZ) -> (Vec<ParamPoly>, Vec<ParamPoly>) {
        let l = a.c.iter().chain(b.c.iter()).fold(ParamPoly::one(), |acc, r| lcm(&acc, r.den()));
        let lift = |p: &PolyZ| -> Vec<ParamPoly> {
            p.c.iter()
                .map(|x| &x.num().clone() * &l.div_exact(x.den()).expect("lcm divisible"))
                .collect()
        };
        let (mut na, mut nb) = (lift(a), lift(b));
        let mut den_l = num_bigint::BigInt::one();
        for p in na.iter().chain(nb.iter()) {
            for (_, q) in p.terms() {
                den_l = num_integer::Integer::lcm(&den_l, q.denom());
            }
        }
        let s = BigRational::from_integer(den_l);
        na.iter_mut().for_each(|p| *p = p.scale(&s));
        nb.iter_mut().for_each(|p| *p = p.scale(&s));
        (na, nb)
    }
}

/// Formats polynomial-coefficient terms in `z`, highest power first.
pub(crate) fn fmt_zpoly(c: &[ParamPoly]) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (k, p) in c.iter().enumerate().rev() {
        if p.is_zero() {
            continue;
        }
        let zpart = match k {
            0 => String::new(),
            1 => "z".to_string(),
            _ => format!("z^{k}"),
        };
        if k == 0 {
            for (m, q) in p.terms().rev() {
                let body = if m.is_one() {
                    fmt_rational(&q.abs())
                } else if q.abs().is_one() {
                    m.to_string()
                } else {
                    format!("{}*{m}", fmt_rational(&q.abs()))
                };
                parts.push((q.is_negative(), body));
            }
        } else if p.num_terms() == 1 {
            let (m, q) = p.leading().expect("nonzero");
            let body = match (m.is_one(), q.abs().is_one()) {
                (true, true) => zpart,
                (true, false) => format!("{}*{zpart}", fmt_rational(&q.abs())),
                (false, true) => format!("{m}*{zpart}"),
                (false, false) => format!("{}*{m}*{zpart}", fmt_rational(&q.abs())),
            };
            parts.push((q.is_negative(), body));
        } else {
            parts.push((false, format!("({p})*{zpart}")));
        }
    }
    if parts.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (neg, body)) in parts.iter().enumerate() {
        if i == 0 {
            if *neg {
                s.push('-');
            }
        } else {
            s.push_str(if *neg { " - " } else { " + " });
        }
        s.push_str(body);
    }
    s
}

impl fmt::Display for PolyZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = PolyZ::cleared_pair(self, &PolyZ::one());
        write!(f, "{}", fmt_ratio(&a, &b))
    }
}

/// Formats `num/den` for polynomial-coefficient polynomials in `z`.
pub(crate) fn fmt_ratio(num: &[ParamPoly], den: &[ParamPoly]) -> String {
    let terms = |c: &[ParamPoly]| c.iter().map(ParamPoly::num_terms).sum::<usize>();
    let ns = fmt_zpoly(num);
    if den.len() == 1 && den[0].is_one() {
        return ns;
    }
    let ns = if terms(num) > 1 { format!("({ns})") } else { ns };
    let ds = fmt_zpoly(den);
    let bare = terms(den) == 1
        && den.last().is_some_and(|p| {
            let (m, q) = p.leading().expect("nonzero");
            q.is_one() && (m.pairs().len() + usize::from(den.len() > 1)) <= 1
        });
    let bare = bare || (den.len() == 1 && den[0].is_constant());
    if bare {
        format!("{ns}/{ds}")
    } else {
        format!("{ns}/({ds})")
    }
}

impl Add for &PolyZ {
    type Output = PolyZ;
    fn add(self, rhs: &PolyZ) -> PolyZ {
        let n = self.c.len().max(rhs.c.len());
        PolyZ::from_coeffs((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl Sub for &PolyZ {
    type Output = PolyZ;
    fn sub(self, rhs: &PolyZ) -> PolyZ {
        let n = self.c.len().max(rhs.c.len());
        PolyZ::from_coeffs((0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }
}

impl Mul for &PolyZ {
    type Output = PolyZ;
    fn mul(self, rhs: &PolyZ) -> PolyZ {
        if self.is_zero() || rhs.is_zero() {
            return PolyZ::zero();
        }
        let mut out = vec![ParamRat::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        PolyZ::from_coeffs(out)
    }
}

impl Neg for &PolyZ {
    type Output = PolyZ;
    fn neg(self) -> PolyZ {
        PolyZ {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }
}

forward_owned!(PolyZ, Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> PolyZ {
        PolyZ::from_coeffs(c.iter().map(|&x| ParamRat::from_int(x)).collect())
    }

    #[test]
    fn gcd_of_shared_root() {
        let mut side = BTreeSet::new();
        let g = PolyZ::gcd(&p(&[-3, 1]), &p(&[3, -4, 1]), &mut side);
        assert_eq!(g, p(&[-3, 1]));
        assert!(side.is_empty());
    }

    #[test]
    fn gcd_records_generic_assumption() {
        let mut side = BTreeSet::new();
        let a = PolyZ::from_coeffs(vec![-ParamRat::var("t"), ParamRat::one()]);
        let g = PolyZ::gcd(&a, &p(&[-1, 1]), &mut side);
        assert!(g.is_one());
        assert!(side.contains(&(&ParamPoly::var("t") - &ParamPoly::one())));
    }

    #[test]
    fn divrem_reconstructs() {
        let mut side = BTreeSet::new();
        let a = p(&[1, 2, 3, 4]);
        let d = p(&[1, 1]);
        let (q, r) = a.divrem(&d, &mut side);
        assert_eq!(&(&q * &d) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn display_clears_denominators() {
        let a = PolyZ::from_coeffs(vec![
            ParamRat::from_rational(crate::symbolic::poly::rat(1, 10)),
            ParamRat::from_rational(crate::symbolic::poly::rat(-1, 5)),
        ]);
        assert_eq!(a.to_string(), "(-2*z + 1)/10");
    }
}
