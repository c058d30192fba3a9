//! Matrices of rational functions in `z`: resolvents, transfer matrices,
//! inverses and parameter substitution.

use std::collections::{BTreeMap, BTreeSet};

use super::matrix::{Matrix, Scalar};
use super::param::ParamRat;
use super::poly::ParamPoly;
use super::polyz::PolyZ;
use super::ratz::{ratz_equal, RatZ};
use crate::error::{Error, Result};

pub type MatParam = Matrix<ParamRat>;
pub type MatRatZ = Matrix<RatZ>;

/// Characteristic polynomial `det(zI - A)` and the matrices `M_1..M_n` with
/// `adj(zI - A) = sum_k M_k z^(n-k)` (Faddeev-LeVerrier).
pub fn char_adjugate(a: &MatParam) -> Result<(PolyZ, Vec<MatParam>)> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension("state matrix must be square".into()));
    }
    let n = a.rows();
    let mut coeffs = vec![ParamRat::zero(); n + 1];
    coeffs[n] = ParamRat::one();
    let mut ms: Vec<MatParam> = Vec::with_capacity(n);
    let mut m = MatParam::identity(n);
    for k in 1..=n {
        if k > 1 {
            m = a.mul(&m)?.add(&MatParam::identity(n).scale(&coeffs[n - k + 1]))?;
        }
        let am = a.mul(&m)?;
        coeffs[n - k] = -&am.trace().scale(&num_rational::BigRational::new(1.into(), (k as i64).into()));
        ms.push(m.clone());
    }
    Ok((PolyZ::from_coeffs(coeffs), ms))
}

/// `(zI - A)^{-1}`, each entry reduced.
pub fn resolvent(a: &MatParam) -> Result<MatRatZ> {
    let (p, ms) = char_adjugate(a)?;
    let n = a.rows();
    let mut out = MatRatZ::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let num = adj_entry(&ms, n, |m| m.get(i, j).clone());
            out.set(i, j, RatZ::normalize(num, p.clone())?);
        }
    }
    Ok(out)
}

fn adj_entry(ms: &[MatParam], n: usize, f: impl Fn(&MatParam) -> ParamRat) -> PolyZ {
    let mut c = vec![ParamRat::zero(); n];
    for (k, m) in ms.iter().enumerate() {
        c[n - 1 - k] = f(m);
    }
    PolyZ::from_coeffs(c)
}

/// `C (zI - A)^{-1} B + D`.
pub fn transfer_matrix(a: &MatParam, b: &MatParam, c: &MatParam, d: &MatParam) -> Result<MatRatZ> {
    let n = a.rows();
    if b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "incompatible realization shapes A {}x{}, B {}x{}, C {}x{}, D {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        )));
    }
    let (p, ms) = char_adjugate(a)?;
    let cmb: Vec<MatParam> = ms.iter().map(|m| c.mul(m).and_then(|x| x.mul(b))).collect::<Result<_>>()?;
    let mut out = MatRatZ::zeros(d.rows(), d.cols());
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let num = &adj_entry(&cmb, n, |m| m.get(i, j).clone()) + &p.scale(d.get(i, j));
            out.set(i, j, RatZ::normalize(num, p.clone())?);
        }
    }
    Ok(out)
}

/// Inverse over the rational function field.
pub fn mat_inverse(m: &MatRatZ) -> Result<MatRatZ> {
    m.inverse()
}

/// Lifts a parameter matrix to constant rational functions.
pub fn lift(m: &MatParam) -> MatRatZ {
    m.map(|x| RatZ::from_param(x.clone()))
}

/// Substitutes parameters entrywise.
pub fn param_substitute(m: &MatRatZ, map: &BTreeMap<String, ParamRat>) -> Result<MatRatZ> {
    let mut out = MatRatZ::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j).substitute(map).map_err(|e| match e {
                Error::Pole(msg) => Error::Pole(format!("entry ({},{}): {msg}", i + 1, j + 1)),
                e => e,
            })?;
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Union of all entries' side conditions.
pub fn side_conditions(m: &MatRatZ) -> BTreeSet<ParamPoly> {
    m.entries().flat_map(|e| e.side_conditions().iter().cloned()).collect()
}

/// Entrywise exact equality.
pub fn mat_equal(a: &MatRatZ, b: &MatRatZ) -> bool {
    a.shape() == b.shape() && a.entries().zip(b.entries()).all(|(x, y)| ratz_equal(x, y))
}

/// Simultaneous row/column permutation: `out[i][j] = m[perm[i]][perm[j]]`.
pub fn reorder<T: Scalar>(m: &Matrix<T>, perm: &[usize]) -> Matrix<T> {
    m.select(perm, perm)
}

/// Nested-list rendering, one string per entry.
pub fn to_strings(m: &MatRatZ) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
        .collect()
}

/// Single-line rendering `[[a, b], [c, d]]`.
pub fn fmt_matrix(m: &MatRatZ) -> String {
    let rows: Vec<String> = to_strings(m).into_iter().map(|r| format!("[{}]", r.join(", "))).collect();
    format!("[{}]", rows.join(", "))
}
