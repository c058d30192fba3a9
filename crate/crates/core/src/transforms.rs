//! Transformations of algorithms at the realization and transfer-function
//! level: cyclic permutation, delays, repetition, composition and
//! conjugation.

use crate::error::{Error, Result};
use crate::realization::{Port, StateSpace};
use crate::symbolic::{mat_inverse, MatParam, MatRatZ, Matrix, RatZ};

/// Realization of the algorithm whose iteration starts at oracle `j`
/// (0-based count of channels moved to the end). The previous outputs of the
/// first `j` channels become extra states. Channels keep their original
/// indices, so `D` is usually not causal as ordered; see
/// [`crate::realization::reorder_causal`].
pub fn cyclic_permute_realization(ss: &StateSpace, j: usize) -> Result<StateSpace> {
    ss.check()?;
    let (n, m) = (ss.states(), ss.oracles());
    if m < 2 || j == 0 || j >= m {
        return Err(Error::NoCyclicPermutation(format!("split {j} of {m} oracles is not a proper cut")));
    }
    let first: Vec<usize> = (0..j).collect();
    let rest: Vec<usize> = (j..m).collect();
    if !ss.d.select(&first, &rest).is_zero() {
        return Err(Error::InadmissibleShift(format!(
            "the first {j} oracles read outputs of later oracles"
        )));
    }
    let all: Vec<usize> = (0..n).collect();
    let (b1, b2) = (ss.b.select(&all, &first), ss.b.select(&all, &rest));
    let (c1, c2) = (ss.c.select(&first, &all), ss.c.select(&rest, &all));
    let (d11, d21, d22) = (ss.d.select(&first, &first), ss.d.select(&rest, &first), ss.d.select(&rest, &rest));
    let (k, r) = (j, m - j);

    let a = Matrix::blocks(&[vec![&ss.a, &b1], vec![&MatParam::zeros(k, n), &MatParam::zeros(k, k)]])?;
    let b = Matrix::blocks(&[
        vec![&MatParam::zeros(n, k), &b2],
        vec![&MatParam::identity(k), &MatParam::zeros(k, r)],
    ])?;
    let (c1a, c1b1, c1b2) = (c1.mul(&ss.a)?, c1.mul(&b1)?, c1.mul(&b2)?);
    let c = Matrix::blocks(&[vec![&c1a, &c1b1], vec![&c2, &d21]])?;
    let d = Matrix::blocks(&[vec![&d11, &c1b2], vec![&MatParam::zeros(r, k), &d22]])?;
    let mut var_names = ss.var_names.clone();
    var_names.extend(ss.ports[..j].iter().map(|p| format!("prev_{}", p.label)));
    Ok(StateSpace {
        name: format!("{} (cyclic {j})", ss.name),
        a,
        b,
        c,
        d,
        var_names,
        ..ss.clone()
    })
}

/// `diag(z^d) H diag(z^-d)`. Fails when an entry would become improper.
pub fn delay_transform(h: &MatRatZ, d: &[i32]) -> Result<MatRatZ> {
    let m = h.rows();
    if h.cols() != m || d.len() != m {
        return Err(Error::Dimension(format!(
            "delay vector of length {} for a {}x{} transfer matrix",
            d.len(),
            h.rows(),
            h.cols()
        )));
    }
    let mut out = h.clone();
    for i in 0..m {
        for j in 0..m {
            let e = h.get(i, j);
            let k = d[i] - d[j];
            if e.is_zero() || k == 0 {
                continue;
            }
            let rd = e.relative_degree()?;
            if rd < k as i64 {
                return Err(Error::InadmissibleDelay(format!(
                    "entry ({}, {}) has relative degree {rd}, needs at least {k}",
                    i + 1,
                    j + 1
                )));
            }
            out.set(i, j, e.mul_zpow(k));
        }
    }
    Ok(out)
}

/// Transfer matrix of the cyclic permutation: the first `j` channels are
/// delayed by one step, giving `[[H11, z H12], [H21/z, H22]]`.
pub fn permuted_transfer(h: &MatRatZ, j: usize) -> Result<MatRatZ> {
    let m = h.rows();
    if m < 2 || j == 0 || j >= m {
        return Err(Error::NoCyclicPermutation(format!("split {j} of {m} oracles is not a proper cut")));
    }
    let d: Vec<i32> = (0..m).map(|i| i32::from(i < j)).collect();
    delay_transform(h, &d).map_err(|e| match e {
        Error::InadmissibleDelay(msg) => Error::InadmissibleShift(msg),
        e => e,
    })
}

fn relabel(p: &Port, k: usize) -> Port {
    Port {
        label: format!("{}[{k}]", p.label),
        kind: p.kind.clone(),
    }
}

/// One iteration of the result performs one iteration of every stage in
/// sequence. Stage `i` maps its state space to that of stage `i+1` (the last
/// one back to the first), so state dimensions may differ between stages.
pub fn compose_realizations(stages: &[StateSpace]) -> Result<StateSpace> {
    let Some(first) = stages.first() else {
        return Err(Error::Dimension("composition of zero algorithms".into()));
    };
    let n0 = first.a.cols();
    let mut p = MatParam::identity(n0);
    let mut q = MatParam::zeros(n0, 0);
    let mut c_rows: Vec<MatParam> = Vec::new();
    let mut d_rows: Vec<MatParam> = Vec::new();
    let mut ports = Vec::new();
    let mut params = Vec::new();
    for (idx, s) in stages.iter().enumerate() {
        let m = s.ports.len();
        let ni = s.a.cols();
        if p.rows() != ni || s.a.rows() != s.b.rows() || s.c.cols() != ni || s.b.cols() != m || s.d.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "stage {} does not fit: expects {ni} states, receives {}",
                idx + 1,
                p.rows()
            )));
        }
        c_rows.push(s.c.mul(&p)?);
        let seen = q.cols();
        let cq = s.c.mul(&q)?;
        d_rows.push(Matrix::blocks(&[vec![&cq, &s.d]])?);
        p = s.a.mul(&p)?;
        let aq = s.a.mul(&q)?;
        q = Matrix::blocks(&[vec![&aq, &s.b]])?;
        debug_assert_eq!(q.cols(), seen + m);
        ports.extend(s.ports.iter().cloned());
        for prm in &s.params {
            if !params.contains(prm) {
                params.push(prm.clone());
            }
        }
    }
    if p.rows() != n0 {
        return Err(Error::Dimension(format!(
            "last stage ends in {} states, first starts from {n0}",
            p.rows()
        )));
    }
    let total = q.cols();
    let c = Matrix::blocks(&c_rows.iter().map(|r| vec![r]).collect::<Vec<_>>())?;
    let padded: Vec<MatParam> = d_rows
        .iter()
        .map(|r| Matrix::blocks(&[vec![r, &MatParam::zeros(r.rows(), total - r.cols())]]))
        .collect::<Result<_>>()?;
    let d = Matrix::blocks(&padded.iter().map(|r| vec![r]).collect::<Vec<_>>())?;
    let name = stages.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(" ; ");
    Ok(StateSpace {
        name,
        a: p,
        b: q,
        c,
        d,
        ports,
        var_names: first.var_names.clone(),
        params,
    })
}

/// `n` iterations of `ss` as one iteration. Channel `i` of repetition `k`
/// gets label `label[k]`.
pub fn repeat_realization(ss: &StateSpace, n: usize) -> Result<StateSpace> {
    if n == 0 {
        return Err(Error::Invalid("repetition count must be positive".into()));
    }
    ss.check()?;
    let copies: Vec<StateSpace> = (0..n)
        .map(|k| StateSpace {
            ports: ss.ports.iter().map(|p| relabel(p, k + 1)).collect(),
            ..ss.clone()
        })
        .collect();
    let mut out = compose_realizations(&copies)?;
    out.name = format!("{} x{n}", ss.name);
    Ok(out)
}

/// The transfer matrix after replacing the oracles in `kappa` by their
/// inverses: inputs and outputs of those channels swap roles. Channels keep
/// their positions.
pub fn conjugate_transfer(h: &MatRatZ, kappa: &[usize]) -> Result<MatRatZ> {
    let m = h.rows();
    if let Some(&bad) = kappa.iter().find(|&&i| i >= m) {
        return Err(Error::Dimension(format!("oracle index {bad} out of range")));
    }
    let s: Vec<usize> = (0..m).filter(|i| kappa.contains(i)).collect();
    let r: Vec<usize> = (0..m).filter(|i| !kappa.contains(i)).collect();
    if s.is_empty() {
        return Ok(h.clone());
    }
    let hk = mat_inverse(&h.select(&s, &s))?;
    let hkr = hk.mul(&h.select(&s, &r))?;
    let hrk = h.select(&r, &s).mul(&hk)?;
    let hrr = h.select(&r, &r).sub(&h.select(&r, &s).mul(&hkr)?)?;
    let mut out = Matrix::from_fn(m, m, |_, _| RatZ::zero());
    for (a, &i) in s.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            out.set(i, j, hk.get(a, b).clone());
        }
        for (b, &j) in r.iter().enumerate() {
            out.set(i, j, -hkr.get(a, b));
        }
    }
    for (a, &i) in r.iter().enumerate() {
        for (b, &j) in s.iter().enumerate() {
            out.set(i, j, hrk.get(a, b).clone());
        }
        for (b, &j) in r.iter().enumerate() {
            out.set(i, j, hrr.get(a, b).clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_algorithm, Mode};
    use crate::realization::{build_state_space, partial_inverse, transfer_function};
    use crate::symbolic::{mat_equal, parse_matrix};

    fn compile(src: &str, mode: Mode) -> StateSpace {
        build_state_space(&parse_algorithm(src).unwrap(), mode).unwrap()
    }

    const DR_BLACK: &str = "algorithm \"dr\" { oracles proxf, proxg; vars x1 x2 x3;
        update x1 <- proxf(x3); update x2 <- proxg(2*x1 - x3); update x3 <- x3 + x2 - x1; }";
    const DR: &str = "algorithm \"DR\" { params t; functions f g; vars x1 x2 x3;
        update x1 <- prox(f, t)(x3);
        update x2 <- prox(g, t)(2*x1 - x3);
        update x3 <- x3 + x2 - x1; }";

    fn h_black() -> MatRatZ {
        parse_matrix(&[&["-1/(z-1)", "1/(z-1)"], &["(2*z-1)/(z-1)", "-1/(z-1)"]]).unwrap()
    }

    #[test]
    fn black_box_splitting_transfer() {
        assert!(mat_equal(
            &transfer_function(&compile(DR_BLACK, Mode::BlackBox)).unwrap(),
            &h_black()
        ));
    }

    #[test]
    fn cyclic_permutation_of_splitting_method() {
        let expected = parse_matrix(&[&["-1/(z-1)", "z/(z-1)"], &["(2*z-1)/(z*(z-1))", "-1/(z-1)"]]).unwrap();
        assert!(mat_equal(&permuted_transfer(&h_black(), 1).unwrap(), &expected));
        let ss = compile(DR_BLACK, Mode::BlackBox);
        let perm = cyclic_permute_realization(&ss, 1).unwrap();
        assert_eq!(perm.states(), 4);
        assert!(mat_equal(&transfer_function(&perm).unwrap(), &expected));
    }

    #[test]
    fn single_oracle_has_no_cyclic_permutation() {
        let h = parse_matrix(&[&["-1/(z-1)"]]).unwrap();
        assert!(matches!(permuted_transfer(&h, 1), Err(Error::NoCyclicPermutation(_))));
    }

    #[test]
    fn feedthrough_blocks_shift() {
        let h = parse_matrix(&[&["0", "1"], &["1/z", "0"]]).unwrap();
        assert!(matches!(permuted_transfer(&h, 1), Err(Error::InadmissibleShift(_))));
        let h = transfer_function(&compile(DR, Mode::Functional)).unwrap();
        assert!(permuted_transfer(&h, 1).is_ok());
    }

    #[test]
    fn delay_admissibility_is_per_entry() {
        let ok = delay_transform(&h_black(), &[1, 0]).unwrap();
        assert!(mat_equal(&ok, &permuted_transfer(&h_black(), 1).unwrap()));
        let e = delay_transform(&h_black(), &[2, 0]).unwrap_err();
        assert!(e.to_string().contains("entry (1, 2)"), "{e}");
        assert!(mat_equal(&delay_transform(&h_black(), &[1, 1]).unwrap(), &h_black()));
    }

    #[test]
    fn repeated_gradient_step() {
        let g = compile(
            "algorithm \"gd\" { params t; functions f; vars x; update x <- x - t*grad(f)(x); }",
            Mode::Functional,
        );
        let twice = repeat_realization(&g, 2).unwrap();
        let expected = parse_matrix(&[&["-t/(z-1)", "-t/(z-1)"], &["-t*z/(z-1)", "-t/(z-1)"]]).unwrap();
        assert!(mat_equal(&transfer_function(&twice).unwrap(), &expected));
        assert_eq!(twice.labels(), ["grad_f[1]", "grad_f[2]"]);
    }

    #[test]
    fn composition_with_different_state_sizes() {
        let lift = StateSpace {
            name: "lift".into(),
            a: parse_matrix(&[&["1"], &["1"]]).unwrap().map(RatZ::at_infinity),
            b: MatParam::zeros(2, 0),
            c: MatParam::zeros(0, 1),
            d: MatParam::zeros(0, 0),
            ports: vec![],
            var_names: vec!["x".into()],
            params: vec![],
        };
        let g = compile(
            "algorithm \"gd\" { params t; functions f; vars x; update x <- x - t*grad(f)(x); }",
            Mode::Functional,
        );
        let proj = StateSpace {
            name: "avg".into(),
            a: parse_matrix(&[&["1/2", "1/2"]]).unwrap().map(RatZ::at_infinity),
            b: g.b.clone(),
            c: parse_matrix(&[&["1/2", "1/2"]]).unwrap().map(RatZ::at_infinity),
            d: g.d.clone(),
            ports: g.ports.clone(),
            var_names: vec!["a".into(), "b".into()],
            params: g.params.clone(),
        };
        let h = transfer_function(&compose_realizations(&[lift, proj]).unwrap()).unwrap();
        assert!(mat_equal(&h, &parse_matrix(&[&["-t/(z-1)"]]).unwrap()));
    }

    #[test]
    fn conjugation_matches_partial_inverse() {
        let ss = compile(DR, Mode::Functional);
        let h = transfer_function(&ss).unwrap();
        for kappa in [vec![0], vec![1], vec![0, 1]] {
            let lhs = conjugate_transfer(&h, &kappa).unwrap();
            let rhs = transfer_function(&partial_inverse(&ss, &kappa).unwrap()).unwrap();
            assert!(mat_equal(&lhs, &rhs), "kappa {kappa:?}");
        }
        let back = conjugate_transfer(&conjugate_transfer(&h, &[1]).unwrap(), &[1]).unwrap();
        assert!(mat_equal(&back, &h));
    }
}
