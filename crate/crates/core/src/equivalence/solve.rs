//! Parameter conditions under which two transfer matrices coincide.
//!
//! Each entry difference is cleared of denominators and every coefficient of
//! a power of `z` becomes a polynomial equation over the parameters. Unknowns
//! that occur linearly are eliminated one at a time by back-substitution;
//! whatever cannot be eliminated that way is reported as residual.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::symbolic::param::substitute_poly;
use crate::symbolic::{param_substitute, rat, MatRatZ, ParamPoly, ParamRat, RatZ};

/// Probe values assigned to free unknowns when sampling a solution family.
pub const PROBES: [i64; 3] = [1, -1, 2];

#[derive(Clone, PartialEq, Debug, Default)]
pub struct ParamCondition {
    /// Independent equations `p = 0` that the unknowns must satisfy.
    pub equations: Vec<ParamPoly>,
    /// Eliminated unknowns in terms of free unknowns and the other parameters.
    pub solved: BTreeMap<String, ParamRat>,
    /// Unknowns left free by the solved form.
    pub free: Vec<String>,
    /// Equations not eliminated by back-substitution.
    pub residual: Vec<ParamPoly>,
    /// Verified sample solutions obtained by probing the free unknowns.
    pub samples: Vec<BTreeMap<String, ParamRat>>,
    /// Parameter polynomials assumed nonzero by the solved form.
    pub side_conditions: BTreeSet<ParamPoly>,
    /// Substituting the solved form makes the two matrices equal.
    pub verified: bool,
}

impl ParamCondition {
    pub fn is_trivial(&self) -> bool {
        self.equations.is_empty() && self.residual.is_empty()
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Solve {
    Conditions(ParamCondition),
    /// No parameter choice works: the equation reduces to a nonzero constant,
    /// or to a monomial that would force a parameter to vanish.
    NoSolution(ParamPoly),
}

/// Integer-coefficient primitive form with positive leading coefficient.
pub fn integer_form(p: &ParamPoly) -> ParamPoly {
    if p.is_zero() {
        return p.clone();
    }
    let mut l = BigInt::one();
    let mut g = BigInt::zero();
    for (_, c) in p.terms() {
        l = l.lcm(c.denom());
    }
    for (_, c) in p.terms() {
        g = g.gcd(&(c.numer() * (&l / c.denom())));
    }
    let mut s = BigRational::new(l, g);
    if p.leading_coefficient().is_negative() {
        s = -s;
    }
    p.scale(&s)
}

/// Splits `p = 0` into `lhs = rhs` with positive coefficients on both sides.
pub fn equation_sides(p: &ParamPoly) -> (String, String) {
    let p = integer_form(p);
    let pos = ParamPoly::from_terms(p.terms().filter(|(_, c)| c.is_positive()).map(|(m, c)| (m.clone(), c.clone())));
    let neg = ParamPoly::from_terms(p.terms().filter(|(_, c)| c.is_negative()).map(|(m, c)| (m.clone(), -c)));
    (pos.to_string(), neg.to_string())
}

fn entry_equations(a: &RatZ, b: &RatZ, side: &mut BTreeSet<ParamPoly>) -> Vec<ParamPoly> {
    let diff = &(a.num() * b.den()) - &(b.num() * a.den());
    let mut out = Vec::new();
    for c in diff.coeffs() {
        if c.is_zero() {
            continue;
        }
        side.extend(c.den().nonzero_factors());
        out.push(integer_form(c.num()));
    }
    out
}

/// Polynomial equations over the parameters equivalent to `ha == hb`,
/// deduplicated, in entry order.
pub fn difference_equations(ha: &MatRatZ, hb: &MatRatZ) -> Result<(Vec<ParamPoly>, BTreeSet<ParamPoly>)> {
    if ha.shape() != hb.shape() {
        return Err(Error::Dimension(format!(
            "cannot compare {:?} and {:?} transfer matrices",
            ha.shape(),
            hb.shape()
        )));
    }
    let mut side = BTreeSet::new();
    let mut eqs: Vec<ParamPoly> = Vec::new();
    for i in 0..ha.rows() {
        for j in 0..ha.cols() {
            for e in entry_equations(ha.get(i, j), hb.get(i, j), &mut side) {
                if !eqs.contains(&e) {
                    eqs.push(e);
                }
            }
        }
    }
    Ok((eqs, side))
}

struct Pivot {
    unknown: String,
    value: ParamRat,
}

/// Elimination choice: rank key (coefficient not constant, current size,
/// original size, coefficient size), equation index, unknown index,
/// coefficient, remainder.
type Candidate = ((bool, usize, usize, usize), usize, usize, ParamPoly, ParamPoly);

/// Solves `ha == hb` for `unknowns`.
pub fn solve_conditions(ha: &MatRatZ, hb: &MatRatZ, unknowns: &[String]) -> Result<Solve> {
    let (original, mut side) = difference_equations(ha, hb)?;
    if let Some(bad) = original.iter().find(|e| e.is_constant()) {
        return Ok(Solve::NoSolution(bad.clone()));
    }
    let mut current: Vec<(ParamPoly, usize)> = original.iter().cloned().zip(0..).collect();
    let mut pivots: Vec<(Pivot, usize)> = Vec::new();
    let mut open: Vec<&String> = unknowns.iter().collect();

    loop {
        current.retain(|(e, _)| !e.is_zero());
        if let Some((_, k)) = current.iter().find(|(e, _)| e.is_constant()) {
            return Ok(Solve::NoSolution(original[*k].clone()));
        }
        let mut best: Option<Candidate> = None;
        for (ei, (e, origin)) in current.iter().enumerate() {
            for (ui, u) in open.iter().enumerate() {
                if e.degree_in(u) != 1 {
                    continue;
                }
                let cs = e.coefficients_in(u);
                let key = (
                    !cs[1].is_constant(),
                    e.num_terms(),
                    original[*origin].num_terms(),
                    cs[1].num_terms(),
                );
                if best.as_ref().is_none_or(|b| key < b.0) {
                    best = Some((key, ei, ui, cs[0].clone(), cs[1].clone()));
                }
            }
        }
        let Some((_, ei, ui, c0, c1)) = best else { break };
        let value = ParamRat::new(-c0, c1.clone())?;
        side.extend(c1.nonzero_factors());
        let u = open.remove(ui).clone();
        let (_, origin) = current.remove(ei);
        let map = BTreeMap::from([(u.clone(), value.clone())]);
        for (e, _) in current.iter_mut() {
            *e = integer_form(substitute_poly(e, &map).num());
        }
        pivots.push((Pivot { unknown: u, value }, origin));
    }

    let mut solved: BTreeMap<String, ParamRat> = BTreeMap::new();
    for (p, _) in pivots.iter().rev() {
        let v = p.value.substitute(&solved)?;
        solved.insert(p.unknown.clone(), v);
    }
    let mut origins: Vec<usize> = pivots.iter().map(|(_, o)| *o).collect();
    origins.sort_unstable();
    let equations: Vec<ParamPoly> = origins.iter().map(|&o| original[o].clone()).collect();
    let residual: Vec<ParamPoly> = current.into_iter().map(|(e, _)| e).collect();
    if let Some(degenerate) = residual.iter().find(|e| e.num_terms() == 1) {
        return Ok(Solve::NoSolution(degenerate.clone()));
    }
    let mentioned: BTreeSet<String> = original.iter().flat_map(|e| e.vars()).map(|s| s.to_string()).collect();
    let free: Vec<String> = unknowns
        .iter()
        .filter(|u| mentioned.contains(*u) && !solved.contains_key(*u))
        .cloned()
        .collect();

    let verified = residual.is_empty() && holds(ha, hb, &solved);
    let mut samples = Vec::new();
    if verified && !free.is_empty() {
        for p in PROBES {
            let probe: BTreeMap<String, ParamRat> = free.iter().map(|f| (f.clone(), ParamRat::from_int(p))).collect();
            let Ok(mut point) = solved
                .iter()
                .map(|(k, v)| Ok((k.clone(), v.substitute(&probe)?)))
                .collect::<Result<BTreeMap<_, _>>>()
            else {
                continue;
            };
            point.extend(probe);
            if holds(ha, hb, &point) {
                samples.push(point);
            }
        }
    }
    Ok(Solve::Conditions(ParamCondition {
        equations,
        solved,
        free,
        residual,
        samples,
        side_conditions: side,
        verified,
    }))
}

/// Exact check that `ha` and `hb` agree after substituting `point`.
pub fn holds(ha: &MatRatZ, hb: &MatRatZ, point: &BTreeMap<String, ParamRat>) -> bool {
    match (param_substitute(ha, point), param_substitute(hb, point)) {
        (Ok(a), Ok(b)) => crate::symbolic::mat_equal(&a, &b),
        _ => false,
    }
}

/// `point` as exact rationals; `None` if some value still has parameters.
pub fn rational_point(point: &BTreeMap<String, ParamRat>) -> Option<BTreeMap<String, BigRational>> {
    point.iter().map(|(k, v)| Some((k.clone(), v.constant_value()?))).collect()
}

/// Rational helper used by tests and samples.
pub fn q(n: i64, d: i64) -> ParamRat {
    ParamRat::from_rational(rat(n, d))
}
