//! Numeric oracle for the symbolic engine: affine oracle instantiations,
//! exact or floating-point simulation, and trajectory comparison.
//!
//! Every function `f` is instantiated as a quadratic `1/2 y'Gy + h'y` with
//! `G` symmetric positive definite, so its subgradient oracle is the affine
//! map `u = Gy + h` and the oracle of `f*` is the inverse map. Opaque oracles
//! get a random affine map chosen by their key.

mod validate;

pub use validate::{cross_validate, initial_state_from, Alignment, CrossValidation, Run, Source};

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::ChannelKind;
use crate::error::{Error, Result};
use crate::realization::{build_odg, Port, StateSpace};
use crate::symbolic::{rat, Matrix, Scalar};

/// Default relative tolerance of float comparisons.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

/// Scalars a simulation can run over.
pub trait Field: Scalar + fmt::Display {
    fn from_rational(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
}

impl Field for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Field for f64 {
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

fn convert<T: Field>(m: &Matrix<BigRational>) -> Matrix<T> {
    m.map(T::from_rational)
}

fn convert_vec<T: Field>(v: &[BigRational]) -> Vec<T> {
    v.iter().map(T::from_rational).collect()
}

fn mat_vec<T: Scalar>(m: &Matrix<T>, v: &[T]) -> Vec<T> {
    (0..m.rows())
        .map(|i| m.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc.plus(&a.times(b))))
        .collect()
}

fn axpy<T: Scalar>(acc: &mut [T], a: &T, x: &[T]) {
    if a.is_zero() {
        return;
    }
    for (s, xi) in acc.iter_mut().zip(x) {
        *s = s.plus(&a.times(xi));
    }
}

/// `u = gain * y + offset`.
#[derive(Clone, PartialEq, Debug)]
pub struct AffineOracle<T = BigRational> {
    pub label: String,
    pub gain: Matrix<T>,
    pub offset: Vec<T>,
}

impl<T: Field> AffineOracle<T> {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, y: &[T]) -> Vec<T> {
        let mut u = mat_vec(&self.gain, y);
        for (ui, h) in u.iter_mut().zip(&self.offset) {
            *ui = ui.plus(h);
        }
        u
    }

    /// The inverse map `y = gain^{-1} (u - offset)`.
    pub fn inverse(&self) -> Result<AffineOracle<T>> {
        let gi = self.gain.inverse()?;
        let off = mat_vec(&gi, &self.offset).into_iter().map(|v| v.negate()).collect();
        Ok(AffineOracle {
            label: self.label.clone(),
            gain: gi,
            offset: off,
        })
    }
}

impl AffineOracle<BigRational> {
    pub fn to_field<T: Field>(&self) -> AffineOracle<T> {
        AffineOracle {
            label: self.label.clone(),
            gain: convert(&self.gain),
            offset: convert_vec(&self.offset),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Random problem data shared by every algorithm simulated on it: one
/// quadratic per function name and one affine map per opaque key.
#[derive(Clone, Debug)]
pub struct Problem {
    pub seed: u64,
    pub dim: usize,
    overrides: BTreeMap<String, (Matrix<BigRational>, Vec<BigRational>)>,
}

impl Problem {
    pub fn new(seed: u64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be at least 1".into()));
        }
        Ok(Problem {
            seed,
            dim,
            overrides: BTreeMap::new(),
        })
    }

    /// Fixes function `name` to `1/2 y'Gy + h'y`.
    pub fn with_function(mut self, name: &str, gain: Matrix<BigRational>, offset: Vec<BigRational>) -> Result<Self> {
        if gain.shape() != (self.dim, self.dim) || offset.len() != self.dim {
            return Err(Error::Dimension(format!("override for `{name}` must have dimension {}", self.dim)));
        }
        self.overrides.insert(format!("f:{name}"), (gain, offset));
        Ok(self)
    }

    /// `G = H diag(lambda) H` with a rational Householder reflection `H` and
    /// eigenvalues in `[1/10, 10]`, and a small offset `h`.
    fn data(&self, key: &str) -> (Matrix<BigRational>, Vec<BigRational>) {
        if let Some(d) = self.overrides.get(key) {
            return d.clone();
        }
        let n = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(key));
        let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        if v.iter().all(|&x| x == 0) {
            v[0] = 1;
        }
        let vv: i64 = v.iter().map(|x| x * x).sum();
        let h = Matrix::from_fn(n, n, |i, j| {
            let delta = if i == j { rat(1, 1) } else { rat(0, 1) };
            delta - rat(2 * v[i] * v[j], vv)
        });
        let lambda = Matrix::from_fn(n, n, |i, j| if i == j { rat(rng.gen_range(1..=100), 10) } else { rat(0, 1) });
        let g = h.mul(&lambda).and_then(|m| m.mul(&h)).expect("square factors");
        let offset = (0..n).map(|_| rat(rng.gen_range(-4..=4), 2)).collect();
        (g, offset)
    }

    /// The affine oracle serving `port`.
    pub fn oracle(&self, port: &Port) -> Result<AffineOracle> {
        let (key, inverted) = match &port.kind {
            ChannelKind::Subgradient(f) => (format!("f:{}", f.name), f.conjugate),
            ChannelKind::Opaque(k) => match k.strip_suffix("^-1") {
                Some(base) => (format!("op:{base}"), true),
                None => (format!("op:{k}"), false),
            },
        };
        let (gain, offset) = self.data(&key);
        let o = AffineOracle {
            label: port.label.clone(),
            gain,
            offset,
        };
        if inverted {
            o.inverse()
        } else {
            Ok(o)
        }
    }

    pub fn oracles(&self, ports: &[Port]) -> Result<Vec<AffineOracle>> {
        ports.iter().map(|p| self.oracle(p)).collect()
    }

    /// A reproducible random initial state with entries in `[-2, 2]`.
    pub fn initial_state(&self, states: usize, salt: &str) -> Vec<Vec<BigRational>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(&format!("x0:{salt}")));
        (0..states)
            .map(|_| (0..self.dim).map(|_| rat(rng.gen_range(-8..=8), 4)).collect())
            .collect()
    }
}

/// Affine oracles for `ports` on a fresh random problem.
pub fn instantiate_quadratics(seed: u64, dim: usize, ports: &[Port]) -> Result<Vec<AffineOracle>> {
    Problem::new(seed, dim)?.oracles(ports)
}

/// Oracle outputs and inputs of one iteration, per channel.
type Calls<T> = (Vec<Vec<T>>, Vec<Vec<T>>);

/// A realization with every parameter replaced by a number.
#[derive(Clone, Debug)]
pub struct NumericRealization<T = BigRational> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub c: Matrix<T>,
    pub d: Matrix<T>,
    pub labels: Vec<String>,
    /// Resolution order within an iteration; `None` when the dependence
    /// graph has a cycle and each iteration is solved as one block system.
    pub order: Option<Vec<usize>>,
}

impl NumericRealization<BigRational> {
    pub fn new(ss: &StateSpace, point: &BTreeMap<String, BigRational>) -> Result<Self> {
        if let Some(p) = ss.params.iter().find(|p| !point.contains_key(*p)) {
            return Err(Error::UnknownSymbol(p.clone()));
        }
        let eval = |m: &crate::symbolic::MatParam| {
            m.try_map(|e| e.eval(point).ok_or_else(|| Error::Pole(format!("{e} at the chosen parameters"))))
        };
        let order = match build_odg(ss) {
            Ok(odg) => Some(odg.order),
            Err(Error::NotCausal(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(NumericRealization {
            a: eval(&ss.a)?,
            b: eval(&ss.b)?,
            c: eval(&ss.c)?,
            d: eval(&ss.d)?,
            labels: ss.labels(),
            order,
        })
    }

    pub fn to_field<T: Field>(&self) -> NumericRealization<T> {
        NumericRealization {
            a: convert(&self.a),
            b: convert(&self.b),
            c: convert(&self.c),
            d: convert(&self.d),
            labels: self.labels.clone(),
            order: self.order.clone(),
        }
    }
}

/// Sequences of one simulation. `x` has one more entry than `y` and `u`.
#[derive(Clone, PartialEq, Debug)]
pub struct Trajectory<T = BigRational> {
    pub labels: Vec<String>,
    /// `x[k][state]`, a vector of the problem dimension.
    pub x: Vec<Vec<Vec<T>>>,
    /// `y[k][oracle]`: oracle inputs.
    pub y: Vec<Vec<Vec<T>>>,
    /// `u[k][oracle]`: oracle outputs.
    pub u: Vec<Vec<Vec<T>>>,
}

impl<T: Field> Trajectory<T> {
    pub fn iterations(&self) -> usize {
        self.y.len()
    }

    pub fn to_f64(&self) -> Trajectory<f64> {
        let f = |s: &Vec<Vec<Vec<T>>>| {
            s.iter()
                .map(|k| k.iter().map(|v| v.iter().map(Field::to_f64).collect()).collect())
                .collect()
        };
        Trajectory {
            labels: self.labels.clone(),
            x: f(&self.x),
            y: f(&self.y),
            u: f(&self.u),
        }
    }
}

impl<T: Field> NumericRealization<T> {
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn oracles(&self) -> usize {
        self.labels.len()
    }

    fn check_oracles(&self, oracles: &[AffineOracle<T>]) -> Result<usize> {
        if oracles.len() != self.oracles() {
            return Err(Error::Dimension(format!(
                "{} oracles for {} channels",
                oracles.len(),
                self.oracles()
            )));
        }
        for (o, l) in oracles.iter().zip(&self.labels) {
            if &o.label != l {
                return Err(Error::Invalid(format!("oracle `{}` supplied for channel `{l}`", o.label)));
            }
        }
        Ok(oracles.first().map_or(0, |o| o.dim()))
    }

    /// `C x` for channel `i`.
    fn state_part(&self, i: usize, x: &[Vec<T>], dim: usize) -> Vec<T> {
        let mut acc = vec![T::zero(); dim];
        for (j, xj) in x.iter().enumerate() {
            axpy(&mut acc, self.c.get(i, j), xj);
        }
        acc
    }

    /// Oracle inputs and outputs of one iteration from state `x`.
    fn resolve(&self, x: &[Vec<T>], oracles: &[AffineOracle<T>], dim: usize) -> Result<Calls<T>> {
        let m = self.oracles();
        let mut y = vec![Vec::new(); m];
        let mut u = vec![Vec::new(); m];
        match &self.order {
            Some(order) => {
                for &i in order {
                    let mut rhs = self.state_part(i, x, dim);
                    for q in order.iter().take_while(|&&q| q != i) {
                        axpy(&mut rhs, self.d.get(i, *q), &u[*q]);
                    }
                    let dii = self.d.get(i, i);
                    let yi = if dii.is_zero() {
                        rhs
                    } else {
                        axpy(&mut rhs, dii, &oracles[i].offset);
                        let lhs = Matrix::identity(dim).sub(&oracles[i].gain.scale(dii))?;
                        mat_vec(&lhs.inverse()?, &rhs)
                    };
                    u[i] = oracles[i].apply(&yi);
                    y[i] = yi;
                }
            }
            None => {
                let n = m * dim;
                let sys = Matrix::from_fn(n, n, |r, s| {
                    let (i, a) = (r / dim, r % dim);
                    let (q, b) = (s / dim, s % dim);
                    let delta = if r == s { T::one() } else { T::zero() };
                    delta.minus(&self.d.get(i, q).times(oracles[q].gain.get(a, b)))
                });
                let mut rhs = Vec::with_capacity(n);
                for i in 0..m {
                    let mut r = self.state_part(i, x, dim);
                    for (q, o) in oracles.iter().enumerate() {
                        axpy(&mut r, self.d.get(i, q), &o.offset);
                    }
                    rhs.extend(r);
                }
                let sol = mat_vec(&sys.inverse()?, &rhs);
                for i in 0..m {
                    y[i] = sol[i * dim..(i + 1) * dim].to_vec();
                    u[i] = oracles[i].apply(&y[i]);
                }
            }
        }
        Ok((y, u))
    }

    fn advance(&self, x: &[Vec<T>], u: &[Vec<T>], dim: usize) -> Vec<Vec<T>> {
        (0..self.states())
            .map(|s| {
                let mut acc = vec![T::zero(); dim];
                for (j, xj) in x.iter().enumerate() {
                    axpy(&mut acc, self.a.get(s, j), xj);
                }
                for (i, ui) in u.iter().enumerate() {
                    axpy(&mut acc, self.b.get(s, i), ui);
                }
                acc
            })
            .collect()
    }

    /// Runs `iters` iterations of `x+ = Ax + Bu, y = Cx + Du, u = oracle(y)`.
    pub fn simulate(&self, oracles: &[AffineOracle<T>], x0: &[Vec<T>], iters: usize) -> Result<Trajectory<T>> {
        let dim = self.check_oracles(oracles)?;
        if x0.len() != self.states() || x0.iter().any(|v| v.len() != dim) {
            return Err(Error::Dimension(format!(
                "initial state must be {} vectors of dimension {dim}",
                self.states()
            )));
        }
        let mut t = Trajectory {
            labels: self.labels.clone(),
            x: vec![x0.to_vec()],
            y: Vec::with_capacity(iters),
            u: Vec::with_capacity(iters),
        };
        for k in 0..iters {
            let (y, u) = self.resolve(&t.x[k], oracles, dim)?;
            let next = self.advance(&t.x[k], &u, dim);
            t.y.push(y);
            t.u.push(u);
            t.x.push(next);
        }
        Ok(t)
    }
}

/// Simulates `ss` at the parameter values `point`.
pub fn simulate<T: Field>(
    ss: &StateSpace,
    point: &BTreeMap<String, BigRational>,
    oracles: &[AffineOracle],
    x0: &[Vec<BigRational>],
    iters: usize,
) -> Result<Trajectory<T>> {
    let num = NumericRealization::new(ss, point)?.to_field::<T>();
    let oracles: Vec<AffineOracle<T>> = oracles.iter().map(AffineOracle::to_field).collect();
    let x0: Vec<Vec<T>> = x0.iter().map(|v| convert_vec(v)).collect();
    num.simulate(&oracles, &x0, iters)
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Comparison {
    pub matches: bool,
    /// Largest `|a - b| / s` over compared entries, where `s` is the
    /// largest magnitude among the compared entries of the same iteration,
    /// at least 1.
    pub max_deviation: f64,
    /// Iterations compared.
    pub compared: usize,
}

/// Compares channel `i` of `b` at iteration `k` with channel `i` of `a` at
/// iteration `k + offsets[i]`, on inputs and outputs. With `tol == 0`
/// entries must be equal.
pub fn compare_trajectories<T: Field>(a: &Trajectory<T>, b: &Trajectory<T>, offsets: &[usize], tol: f64) -> Result<Comparison> {
    let m = b.labels.len();
    if a.labels.len() != m || offsets.len() != m {
        return Err(Error::Dimension(format!(
            "comparing {} channels with {} channels and {} offsets",
            a.labels.len(),
            m,
            offsets.len()
        )));
    }
    let max_off = offsets.iter().copied().max().unwrap_or(0);
    let compared = b.iterations().min(a.iterations().saturating_sub(max_off));
    let mut worst = 0.0f64;
    let mut all_equal = true;
    for k in 0..compared {
        let pairs: Vec<(&T, &T)> = offsets
            .iter()
            .enumerate()
            .flat_map(|(i, &off)| {
                [(&a.y, &b.y), (&a.u, &b.u)]
                    .into_iter()
                    .flat_map(move |(sa, sb)| sa[k + off][i].iter().zip(&sb[k][i]))
            })
            .collect();
        let scale = pairs
            .iter()
            .map(|(x, y)| x.to_f64().abs().max(y.to_f64().abs()))
            .fold(1.0, f64::max);
        for (x, y) in pairs {
            if x != y {
                all_equal = false;
                let d = (x.to_f64() - y.to_f64()).abs() / scale;
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    let matches = if tol == 0.0 { all_equal } else { worst <= tol };
    Ok(Comparison {
        matches,
        max_deviation: worst,
        compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_algorithm, Mode};
    use crate::realization::build_state_space;

    fn ss(src: &str) -> StateSpace {
        build_state_space(&parse_algorithm(src).unwrap(), Mode::Functional).unwrap()
    }

    const GD: &str = "algorithm \"gd\" { functions f; params t; oracles gradf = grad(f); vars x; update x <- x - t*gradf(x); }";

    fn point(pairs: &[(&str, BigRational)]) -> BTreeMap<String, BigRational> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn half_square(dim: usize) -> Problem {
        Problem::new(0, dim)
            .unwrap()
            .with_function("f", Matrix::identity(dim), vec![rat(0, 1); dim])
            .unwrap()
    }

    #[test]
    fn unit_quadratic_gradient_is_identity() {
        let s = ss(GD);
        let o = half_square(1).oracles(&s.ports).unwrap();
        assert_eq!(o[0].apply(&[rat(3, 7)]), vec![rat(3, 7)]);
    }

    #[test]
    fn instantiation_is_reproducible() {
        let s = ss(GD);
        let a = instantiate_quadratics(0, 3, &s.ports).unwrap();
        let b = instantiate_quadratics(0, 3, &s.ports).unwrap();
        assert_eq!(a, b);
        let g = &a[0].gain;
        assert_eq!(g, &g.transpose());
        assert_ne!(a, instantiate_quadratics(1, 3, &s.ports).unwrap());
    }

    #[test]
    fn gain_is_positive_definite() {
        let s = ss(GD);
        for seed in 0..10 {
            let g = instantiate_quadratics(seed, 3, &s.ports).unwrap().remove(0).gain;
            for k in 1..=3 {
                let idx: Vec<usize> = (0..k).collect();
                assert!(g.select(&idx, &idx).det().unwrap() > rat(0, 1));
            }
        }
    }

    #[test]
    fn prox_of_half_square_halves() {
        let s = ss("algorithm \"p\" { functions f; oracles pf = prox(f, 1); vars x; update x <- pf(x); }");
        let o = half_square(1).oracles(&s.ports).unwrap();
        let t: Trajectory = simulate(&s, &BTreeMap::new(), &o, &[vec![rat(1, 1)]], 1).unwrap();
        assert_eq!(t.x[1], vec![vec![rat(1, 2)]]);
    }

    #[test]
    fn gradient_contracts_by_four_fifths() {
        let s = ss(GD);
        let o = half_square(1).oracles(&s.ports).unwrap();
        let t: Trajectory = simulate(&s, &point(&[("t", rat(1, 5))]), &o, &[vec![rat(1, 1)]], 3).unwrap();
        let ys: Vec<BigRational> = t.y.iter().map(|k| k[0][0].clone()).collect();
        assert_eq!(ys, vec![rat(1, 1), rat(4, 5), rat(16, 25)]);
    }

    #[test]
    fn origin_is_fixed_without_offsets() {
        let s = ss(GD);
        let p = Problem::new(3, 2).unwrap();
        let g = p.oracles(&s.ports).unwrap().remove(0).gain;
        let p = p.with_function("f", g, vec![rat(0, 1); 2]).unwrap();
        let o = p.oracles(&s.ports).unwrap();
        let t: Trajectory<f64> = simulate(&s, &point(&[("t", rat(1, 3))]), &o, &[vec![rat(0, 1); 2]], 5).unwrap();
        assert!(t.y.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn label_mismatch_is_rejected() {
        let s = ss(GD);
        let mut o = half_square(1).oracles(&s.ports).unwrap();
        o[0].label = "other".into();
        let e = simulate::<f64>(&s, &point(&[("t", rat(1, 5))]), &o, &[vec![rat(1, 1)]], 1).unwrap_err();
        assert!(matches!(e, Error::Invalid(_)));
    }

    #[test]
    fn identical_trajectories_match_exactly() {
        let s = ss(GD);
        let p = Problem::new(4, 2).unwrap();
        let o = p.oracles(&s.ports).unwrap();
        let x0 = p.initial_state(1, "a");
        let t: Trajectory = simulate(&s, &point(&[("t", rat(1, 5))]), &o, &x0, 10).unwrap();
        let c = compare_trajectories(&t, &t, &[0], 0.0).unwrap();
        assert!(c.matches);
        assert_eq!((c.max_deviation, c.compared), (0.0, 10));
    }

    #[test]
    fn different_steps_diverge_after_first_call() {
        let s = ss(GD);
        let o = half_square(1).oracles(&s.ports).unwrap();
        let x0 = [vec![rat(1, 1)]];
        let a: Trajectory = simulate(&s, &point(&[("t", rat(1, 5))]), &o, &x0, 2).unwrap();
        let b: Trajectory = simulate(&s, &point(&[("t", rat(1, 4))]), &o, &x0, 2).unwrap();
        assert_eq!(a.y[0], b.y[0]);
        assert!(!compare_trajectories(&a, &b, &[0], FLOAT_TOLERANCE).unwrap().matches);
    }

    #[test]
    fn conjugate_oracle_inverts() {
        let s = ss("algorithm \"c\" { functions f; oracles a = grad(f), b = grad(f*); vars x w; update w <- a(x); update x <- b(w); }");
        let o = instantiate_quadratics(7, 2, &s.ports).unwrap();
        let y = vec![rat(1, 3), rat(-2, 1)];
        assert_eq!(o[1].apply(&o[0].apply(&y)), y);
    }
}
