//! Numeric confirmation of relation reports.
//!
//! `A` is simulated from a random state. The witness says which call of `A`
//! every call of `B` should reproduce; `B`'s initial state is recovered from
//! the first few expected calls by an exact observability solve, and `B` is
//! then run on its own and compared with the expectation.

use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{compare_trajectories, Comparison, Field, NumericRealization, Problem, Trajectory, FLOAT_TOLERANCE};
use crate::equivalence::{CompiledAlgorithm, RelationReport, Witness};
use crate::error::{Error, Result};
use crate::symbolic::{rat, Matrix, Scalar};

/// Where channel `i` of `B` reads its calls from: iteration
/// `stride * k + phase` of `A`'s channel `channel`, with input and output
/// exchanged when `swap` is set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Source {
    pub channel: usize,
    pub stride: usize,
    pub phase: usize,
    pub swap: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alignment {
    pub sources: Vec<Source>,
}

impl Alignment {
    /// Alignment implied by a witness on an algorithm with `m` oracles.
    pub fn from_witness(w: &Witness, m: usize) -> Alignment {
        let transformed = |t: usize| match w.n {
            Some(n) => Source {
                channel: t % m,
                stride: n,
                phase: t / m,
                swap: false,
            },
            None => Source {
                channel: t,
                stride: 1,
                phase: usize::from(w.shift.is_some_and(|j| t < j)),
                swap: w.kappa.contains(&t),
            },
        };
        Alignment {
            sources: w.matching.iter().map(|&t| transformed(t)).collect(),
        }
    }

    /// Iterations of `A` needed to produce `iters` iterations of `B`.
    pub fn source_iterations(&self, iters: usize) -> usize {
        self.sources
            .iter()
            .map(|s| s.stride * iters.saturating_sub(1) + s.phase + 1)
            .max()
            .unwrap_or(0)
    }

    /// The calls `B` is expected to make. The state sequence is left empty.
    pub fn apply<T: Field>(&self, a: &Trajectory<T>, labels: Vec<String>, iters: usize) -> Result<Trajectory<T>> {
        if a.iterations() < self.source_iterations(iters) {
            return Err(Error::Dimension(format!(
                "{iters} aligned iterations need {} source iterations, have {}",
                self.source_iterations(iters),
                a.iterations()
            )));
        }
        let mut out = Trajectory {
            labels,
            x: Vec::new(),
            y: Vec::with_capacity(iters),
            u: Vec::with_capacity(iters),
        };
        for k in 0..iters {
            let (mut ys, mut us) = (Vec::new(), Vec::new());
            for s in &self.sources {
                let at = s.stride * k + s.phase;
                let (y, u) = (a.y[at][s.channel].clone(), a.u[at][s.channel].clone());
                let (y, u) = if s.swap { (u, y) } else { (y, u) };
                ys.push(y);
                us.push(u);
            }
            out.y.push(ys);
            out.u.push(us);
        }
        Ok(out)
    }
}

/// Solves `M v = r` exactly; `None` when inconsistent. Free unknowns are 0.
fn solve_consistent(mut rows: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>, unknowns: usize) -> Option<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = Scalar::recip(&rows[r][col]).expect("nonzero pivot");
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                let pivot = rows[r].clone();
                for (v, p) in rows[i].iter_mut().zip(&pivot).take(unknowns) {
                    *v = &*v - &(&f * p);
                }
                let t = &f * &rhs[r];
                rhs[i] = &rhs[i] - &t;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![rat(0, 1); unknowns];
    for (i, &col) in pivots.iter().enumerate() {
        x[col] = rhs[i].clone();
    }
    Some(x)
}

/// The initial state from which `b` reproduces the calls of `expected`,
/// found from the first `states + 1` iterations; `None` if no state does.
pub fn initial_state_from(b: &NumericRealization, expected: &Trajectory) -> Result<Option<Vec<Vec<BigRational>>>> {
    let (n, m) = (b.states(), b.oracles());
    let dim = expected.y.first().and_then(|k| k.first()).map_or(0, Vec::len);
    let iters = expected.iterations().min(n + 1);
    if n == 0 {
        return Ok(Some(Vec::new()));
    }
    let mut obs = Vec::new();
    let mut resid: Vec<Vec<BigRational>> = Vec::new();
    let mut ak = Matrix::<BigRational>::identity(n);
    let mut forced = vec![vec![rat(0, 1); dim]; n];
    for k in 0..iters {
        let cak = b.c.mul(&ak)?;
        for i in 0..m {
            obs.push(cak.row(i).to_vec());
            let mut r = expected.y[k][i].clone();
            for (j, fj) in forced.iter().enumerate() {
                super::axpy(&mut r, &-b.c.get(i, j), fj);
            }
            for q in 0..m {
                super::axpy(&mut r, &-b.d.get(i, q), &expected.u[k][q]);
            }
            resid.push(r);
        }
        forced = b.advance(&forced, &expected.u[k], dim);
        ak = b.a.mul(&ak)?;
    }
    let mut x0 = vec![vec![rat(0, 1); dim]; n];
    for c in 0..dim {
        let rhs = resid.iter().map(|r| r[c].clone()).collect();
        match solve_consistent(obs.clone(), rhs, n) {
            Some(col) => {
                for (s, v) in col.into_iter().enumerate() {
                    x0[s][c] = v;
                }
            }
            None => return Ok(None),
        }
    }
    Ok(Some(x0))
}

/// One simulated comparison.
#[derive(Clone, Debug)]
pub struct Run {
    pub seed: u64,
    pub dim: usize,
    pub exact: bool,
    pub point: BTreeMap<String, BigRational>,
    pub comparison: Comparison,
}

#[derive(Clone, Debug, Default)]
pub struct CrossValidation {
    pub runs: Vec<Run>,
}

impl CrossValidation {
    pub fn passed(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(|r| r.comparison.matches)
    }

    pub fn max_deviation(&self) -> f64 {
        self.runs.iter().map(|r| r.comparison.max_deviation).fold(0.0, f64::max)
    }
}

const PARAM_POOL: [(i64, i64); 8] = [(1, 2), (2, 3), (3, 4), (1, 1), (5, 4), (3, 2), (2, 1), (1, 3)];

/// Random values for the parameters left free by the report, and the
/// solved values of the others.
fn draw_point(
    report: &RelationReport,
    a: &CompiledAlgorithm,
    b: &CompiledAlgorithm,
    rng: &mut ChaCha8Rng,
) -> Option<BTreeMap<String, BigRational>> {
    let c = &report.condition;
    let mut point = BTreeMap::new();
    for p in a.ss.params.iter().chain(&b.ss.params).chain(&c.free) {
        if !c.solved.contains_key(p) && !point.contains_key(p) {
            let (n, d) = PARAM_POOL[rng.gen_range(0..PARAM_POOL.len())];
            point.insert(p.clone(), rat(n, d));
        }
    }
    for (k, v) in &c.solved {
        point.insert(k.clone(), v.eval(&point)?);
    }
    let ok = c
        .side_conditions
        .iter()
        .all(|p| p.eval(&point).is_some_and(|v| !num_traits::Zero::is_zero(&v)));
    ok.then_some(point)
}

/// Simulates both algorithms on `seeds.len()` random instances and checks
/// the calls line up as the witness claims: in float arithmetic at
/// dimension `1 + seed % 3` within [`FLOAT_TOLERANCE`], and exactly at
/// dimension 1.
pub fn cross_validate(
    report: &RelationReport,
    a: &CompiledAlgorithm,
    b: &CompiledAlgorithm,
    seeds: &[u64],
    iters: usize,
) -> Result<CrossValidation> {
    if !report.is_related() {
        return Err(Error::Invalid(format!("{} and {} are unrelated", report.a_name, report.b_name)));
    }
    let c = &report.condition;
    if !c.verified || !c.residual.is_empty() {
        return Err(Error::Unsupported("cross-validation needs fully solved conditions".into()));
    }
    let align = Alignment::from_witness(&report.witness, a.oracles());
    let mut out = CrossValidation::default();
    for &seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut done = false;
        for _ in 0..32 {
            let Some(point) = draw_point(report, a, b, &mut rng) else {
                continue;
            };
            let attempt = (|| -> Result<Vec<Run>> {
                let na = NumericRealization::new(&a.ss, &point)?;
                let nb = NumericRealization::new(&b.ss, &point)?;
                let mut runs = Vec::new();
                for (dim, exact) in [(1 + (seed % 3) as usize, false), (1, true)] {
                    let problem = Problem::new(seed, dim)?;
                    let oa = problem.oracles(&a.ss.ports)?;
                    let ob = problem.oracles(&b.ss.ports)?;
                    let x0a = problem.initial_state(na.states(), "a");
                    let prefix = na.simulate(&oa, &x0a, align.source_iterations(nb.states() + 1))?;
                    let expected = align.apply(&prefix, nb.labels.clone(), nb.states() + 1)?;
                    let comparison = match initial_state_from(&nb, &expected)? {
                        None => Comparison {
                            matches: false,
                            max_deviation: f64::INFINITY,
                            compared: 0,
                        },
                        Some(x0b) if exact => run_pair(&na, &nb, &oa, &ob, &x0a, &x0b, &align, iters, 0.0)?,
                        Some(x0b) => {
                            let f = |o: &Vec<super::AffineOracle>| o.iter().map(|o| o.to_field::<f64>()).collect::<Vec<_>>();
                            let v = |x: &Vec<Vec<BigRational>>| x.iter().map(|v| super::convert_vec::<f64>(v)).collect::<Vec<_>>();
                            run_pair(
                                &na.to_field(),
                                &nb.to_field(),
                                &f(&oa),
                                &f(&ob),
                                &v(&x0a),
                                &v(&x0b),
                                &align,
                                iters,
                                FLOAT_TOLERANCE,
                            )?
                        }
                    };
                    runs.push(Run {
                        seed,
                        dim,
                        exact,
                        point: point.clone(),
                        comparison,
                    });
                }
                Ok(runs)
            })();
            match attempt {
                Ok(runs) => {
                    out.runs.extend(runs);
                    done = true;
                    break;
                }
                Err(Error::Singular | Error::Pole(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        if !done {
            return Err(Error::Unsupported(format!("no admissible parameter values found for seed {seed}")));
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_pair<T: Field>(
    na: &NumericRealization<T>,
    nb: &NumericRealization<T>,
    oa: &[super::AffineOracle<T>],
    ob: &[super::AffineOracle<T>],
    x0a: &[Vec<T>],
    x0b: &[Vec<T>],
    align: &Alignment,
    iters: usize,
    tol: f64,
) -> Result<Comparison> {
    let ta = na.simulate(oa, x0a, align.source_iterations(iters))?;
    let expected = align.apply(&ta, nb.labels.clone(), iters)?;
    let tb = nb.simulate(ob, x0b, iters)?;
    compare_trajectories(&expected, &tb, &vec![0; nb.oracles()], tol)
}
