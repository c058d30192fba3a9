//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive primitive-remainder-sequence algorithm: pick the alphabetically
//! first variable as the main variable, split off contents (computed
//! recursively in the remaining variables), then run a primitive pseudo
//! remainder sequence on the primitive parts.

use super::poly::{Monomial, ParamPoly};
use num_rational::BigRational;
use num_traits::One;

/// Monic (graded-lex leading coefficient 1) greatest common divisor.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return ParamPoly::one();
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let m: Monomial = a.monomial_content().gcd(&b.monomial_content());
        return ParamPoly::term(m, BigRational::one());
    }
    if a == b {
        return a.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    let x = va.union(&vb).next().expect("non-constant").clone();
    if a.degree_in(&x) == 0 {
        return gcd(a, &content(b, &x));
    }
    if b.degree_in(&x) == 0 {
        return gcd(&content(a, &x), b);
    }
    let ca = content(a, &x);
    let cb = content(b, &x);
    let c = gcd(&ca, &cb);
    let mut pa = primitive(&a.coefficients_in(&x), &ca);
    let mut pb = primitive(&b.coefficients_in(&x), &cb);
    if pa.len() < pb.len() {
        std::mem::swap(&mut pa, &mut pb);
    }
    loop {
        let r = prem(&pa, &pb);
        if r.iter().all(ParamPoly::is_zero) {
            break;
        }
        if r.len() == 1 {
            return c.monic();
        }
        let rc = coeff_gcd(&r);
        pa = pb;
        pb = primitive(&r, &rc);
    }
    let g = ParamPoly::from_coefficients_in(&x, &pb);
    (&c * &g).monic()
}

/// Least common multiple, monic.
pub fn lcm(a: &ParamPoly, b: &ParamPoly) -> ParamPoly {
    if a.is_zero() || b.is_zero() {
        return ParamPoly::zero();
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).monic()
}

fn content(p: &ParamPoly, x: &str) -> ParamPoly {
    coeff_gcd(&p.coefficients_in(x))
}

fn coeff_gcd(cs: &[ParamPoly]) -> ParamPoly {
    let mut g = ParamPoly::zero();
    for c in cs {
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

fn primitive(cs: &[ParamPoly], content: &ParamPoly) -> Vec<ParamPoly> {
    let mut out: Vec<ParamPoly> = cs.iter().map(|c| c.div_exact(content).expect("content divides")).collect();
    trim(&mut out);
    let lc = out.last().map(|c| c.leading_coefficient()).unwrap();
    let inv = lc.recip();
    out.iter_mut().for_each(|c| *c = c.scale(&inv));
    out
}

fn trim(v: &mut Vec<ParamPoly>) {
    while v.len() > 1 && v.last().is_some_and(ParamPoly::is_zero) {
        v.pop();
    }
}

/// Pseudo-remainder of univariate polynomials with polynomial coefficients.
fn prem(a: &[ParamPoly], b: &[ParamPoly]) -> Vec<ParamPoly> {
    let n = b.len() - 1;
    if n == 0 {
        return vec![ParamPoly::zero()];
    }
    let lb = &b[n];
    let mut r: Vec<ParamPoly> = a.to_vec();
    trim(&mut r);
    while r.len() > n && !r.iter().all(ParamPoly::is_zero) {
        let m = r.len() - 1;
        let lr = r[m].clone();
        let shift = m - n;
        let mut next: Vec<ParamPoly> = r.iter().map(|c| lb * c).collect();
        for (i, bc) in b.iter().enumerate() {
            next[i + shift] = &next[i + shift] - &(&lr * bc);
        }
        next.pop();
        if next.is_empty() {
            next.push(ParamPoly::zero());
        }
        trim(&mut next);
        r = next;
    }
    r
}
