//! Symbolic execution of one iteration.
//!
//! Every quantity is tracked as a linear combination of start-of-iteration
//! states and oracle outputs. Implicit oracles (`prox`, `argmin`) are
//! rewritten in subgradient form when lowering in functional mode: the
//! output of `prox_{s f}(w)` is the point `y = w - s u` at which the
//! subgradient `u` of `f` is evaluated.

use std::collections::BTreeMap;

use super::ast::{AlgorithmDef, BinOp, Expr, FuncRef, OracleKind};
use super::print::expr_to_string;
use crate::error::{Error, Result};
use crate::symbolic::ParamRat;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Atom {
    One,
    /// Value of a variable at the start of the iteration.
    State(String),
    /// Output of the channel with this index.
    Out(usize),
    /// The bound variable of the argmin being analysed.
    Bound,
}

/// Linear combination of atoms with parameter coefficients.
#[derive(Clone, PartialEq, Default, Debug)]
pub struct Lin(BTreeMap<Atom, ParamRat>);

impl Lin {
    pub fn atom(a: Atom) -> Lin {
        Lin(BTreeMap::from([(a, ParamRat::one())]))
    }

    pub fn constant(c: ParamRat) -> Lin {
        let mut l = Lin::default();
        l.add_term(Atom::One, &c);
        l
    }

    fn add_term(&mut self, a: Atom, c: &ParamRat) {
        let v = self.0.get(&a).map(|x| x + c).unwrap_or_else(|| c.clone());
        if v.is_zero() {
            self.0.remove(&a);
        } else {
            self.0.insert(a, v);
        }
    }

    pub fn coeff(&self, a: &Atom) -> ParamRat {
        self.0.get(a).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Atom, &ParamRat)> {
        self.0.iter()
    }

    pub fn plus(&self, o: &Lin) -> Lin {
        let mut r = self.clone();
        for (a, c) in &o.0 {
            r.add_term(a.clone(), c);
        }
        r
    }

    pub fn scale(&self, c: &ParamRat) -> Lin {
        if c.is_zero() {
            return Lin::default();
        }
        Lin(self.0.iter().map(|(a, x)| (a.clone(), x * c)).collect())
    }

    pub fn minus(&self, o: &Lin) -> Lin {
        self.plus(&o.scale(&ParamRat::from_int(-1)))
    }

    /// The value if this combination has no non-constant atom.
    pub fn as_constant(&self) -> Option<ParamRat> {
        self.0.keys().all(|a| *a == Atom::One).then(|| self.coeff(&Atom::One))
    }

    /// Splits off the coefficient of `a`.
    pub fn split(&self, a: &Atom) -> (ParamRat, Lin) {
        let mut rest = self.clone();
        let c = rest.0.remove(a).unwrap_or_default();
        (c, rest)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Every oracle is an opaque map; implicit oracles stay explicit calls.
    BlackBox,
    /// `grad`, `subgrad`, `prox` and `argmin` become subgradient channels.
    Functional,
}

/// How a channel's oracle is identified across algorithms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ChannelKind {
    /// Matched by this key.
    Opaque(String),
    /// A subgradient of the (possibly conjugated) function.
    Subgradient(FuncRef),
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelKind::Opaque(k) => write!(f, "{k}"),
            ChannelKind::Subgradient(func) => write!(f, "subgrad({func})"),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Channel {
    pub label: String,
    pub kind: ChannelKind,
    /// Oracle input in terms of start states and outputs of this and
    /// earlier channels.
    pub input: Lin,
}

/// Result of lowering: channels in call order and the end-of-iteration
/// state update.
#[derive(Clone, PartialEq, Debug)]
pub struct Lowered {
    pub name: String,
    pub params: Vec<String>,
    pub vars: Vec<String>,
    pub channels: Vec<Channel>,
    pub next: Vec<Lin>,
}

/// Quadratic model of an argmin objective `lambda g(x) + q(x, y)` with
/// `grad_x q = q11 x + q12 . y`.
#[derive(Clone, PartialEq, Debug)]
pub struct QuadForm {
    pub function: FuncRef,
    pub lambda: ParamRat,
    pub q11: ParamRat,
    /// Coefficients of the remaining atoms.
    pub q12: Lin,
}

struct Lowerer<'a> {
    def: &'a AlgorithmDef,
    mode: Mode,
    env: BTreeMap<String, Lin>,
    bound: Option<String>,
    channels: Vec<Channel>,
}

fn constant_of(l: &Lin, e: &Expr) -> Result<ParamRat> {
    l.as_constant()
        .ok_or_else(|| Error::Nonlinear(format!("`{}` must depend on parameters only", expr_to_string(e))))
}

impl Lowerer<'_> {
    fn ident(&self, s: &str) -> Result<Lin> {
        if self.bound.as_deref() == Some(s) {
            return Ok(Lin::atom(Atom::Bound));
        }
        if self.def.params.iter().any(|p| p == s) {
            return Ok(Lin::constant(ParamRat::var(s)));
        }
        self.env.get(s).cloned().ok_or_else(|| Error::UnknownSymbol(s.to_string()))
    }

    fn eval(&mut self, e: &Expr) -> Result<Lin> {
        match e {
            Expr::Num(q) => Ok(Lin::constant(ParamRat::from_rational(q.clone()))),
            Expr::Ident(s) => self.ident(s),
            Expr::Neg(a) => Ok(self.eval(a)?.scale(&ParamRat::from_int(-1))),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => Ok(x.plus(&y)),
                    BinOp::Sub => Ok(x.minus(&y)),
                    BinOp::Mul => match (x.as_constant(), y.as_constant()) {
                        (Some(c), _) => Ok(y.scale(&c)),
                        (_, Some(c)) => Ok(x.scale(&c)),
                        _ => Err(Error::Nonlinear(format!("nonlinear term `{}`", expr_to_string(e)))),
                    },
                    BinOp::Div => {
                        let c = y
                            .as_constant()
                            .ok_or_else(|| Error::Nonlinear(format!("nonlinear term `{}`", expr_to_string(e))))?;
                        let inv = c
                            .inv()
                            .ok_or_else(|| Error::Invalid(format!("division by zero in `{}`", expr_to_string(e))))?;
                        Ok(x.scale(&inv))
                    }
                }
            }
            Expr::Call { oracle, arg } => self.call(oracle, arg),
            Expr::Argmin { oracle, target, objective } => self.argmin(oracle, target, objective),
            Expr::Apply { func, .. } => Err(Error::Invalid(format!(
                "function `{func}` may only be applied inside an argmin objective"
            ))),
            Expr::NormSquare(_) => Err(Error::Invalid("norm_square may only appear inside an argmin objective".into())),
        }
    }

    fn push(&mut self, label: &str, kind: ChannelKind, input: Lin) -> usize {
        self.channels.push(Channel {
            label: label.to_string(),
            kind,
            input,
        });
        self.channels.len() - 1
    }

    fn call(&mut self, label: &str, arg: &Expr) -> Result<Lin> {
        let decl = self.def.oracle(label).ok_or_else(|| Error::UnknownSymbol(label.to_string()))?;
        let w = self.eval(arg)?;
        let ch = self.channels.len();
        let out = Lin::atom(Atom::Out(ch));
        match (&decl.kind, self.mode) {
            (OracleKind::BlackBox, _) => {
                self.push(label, ChannelKind::Opaque(label.to_string()), w);
                Ok(out)
            }
            (OracleKind::Grad(f) | OracleKind::Subgrad(f), Mode::Functional) => {
                self.push(label, ChannelKind::Subgradient(f.clone()), w);
                Ok(out)
            }
            (OracleKind::Grad(f) | OracleKind::Subgrad(f), Mode::BlackBox) => {
                self.push(label, ChannelKind::Opaque(format!("grad({f})")), w);
                Ok(out)
            }
            (OracleKind::Prox(f, step), Mode::Functional) => {
                let s = self.eval(step)?;
                let s = constant_of(&s, step)?;
                let y = w.minus(&out.scale(&s));
                self.push(label, ChannelKind::Subgradient(f.clone()), y.clone());
                Ok(y)
            }
            (OracleKind::Prox(f, _), Mode::BlackBox) => {
                self.push(label, ChannelKind::Opaque(format!("prox({f})")), w);
                Ok(out)
            }
            (OracleKind::Argmin(_), _) => Err(Error::Invalid(format!("oracle `{label}` cannot be called directly"))),
        }
    }

    fn argmin(&mut self, label: &str, target: &str, objective: &Expr) -> Result<Lin> {
        if self.mode == Mode::BlackBox {
            return Err(Error::Unsupported(format!(
                "argmin oracle `{label}` has no black-box form; lower with functional oracles"
            )));
        }
        let saved = self.bound.replace(target.to_string());
        let q = self.quad_form(objective);
        self.bound = saved;
        let q = q?;
        let ch = self.channels.len();
        let inv = q.q11.inv().expect("q11 checked nonzero");
        let y = Lin::atom(Atom::Out(ch)).scale(&-(&q.lambda * &inv)).minus(&q.q12.scale(&inv));
        self.push(label, ChannelKind::Subgradient(q.function), y.clone());
        Ok(y)
    }

    fn quad_form(&mut self, objective: &Expr) -> Result<QuadForm> {
        let mut terms = Vec::new();
        self.objective_terms(objective, ParamRat::one(), &mut terms)?;
        let mut func: Option<FuncRef> = None;
        let mut lambda = ParamRat::zero();
        let mut q11 = ParamRat::zero();
        let mut q12 = Lin::default();
        for (c, t) in terms {
            match t {
                Expr::Apply { func: f, arg } => {
                    let a = self.eval(arg)?;
                    if a != Lin::atom(Atom::Bound) {
                        return Err(Error::Invalid(format!(
                            "function term `{}` must be applied to the argmin variable",
                            expr_to_string(t)
                        )));
                    }
                    if func.as_ref().is_some_and(|g| g != f) {
                        return Err(Error::Invalid("argmin objective has more than one function term".into()));
                    }
                    func = Some(f.clone());
                    lambda = &lambda + &c;
                }
                Expr::NormSquare(inner) => {
                    let l = self.eval(inner)?;
                    let (a, r) = l.split(&Atom::Bound);
                    let two_c = c.scale(&num_rational::BigRational::from_integer(2.into()));
                    q11 = &q11 + &(&two_c * &(&a * &a));
                    q12 = q12.plus(&r.scale(&(&two_c * &a)));
                }
                _ => unreachable!(),
            }
        }
        let function = func.ok_or_else(|| Error::Invalid("argmin objective has no function term".into()))?;
        if lambda.is_zero() {
            return Err(Error::Invalid("function term of argmin objective cancels".into()));
        }
        if q11.is_zero() {
            return Err(Error::Invalid(
                "argmin objective is not strictly quadratic in its variable (Q11 = 0)".into(),
            ));
        }
        Ok(QuadForm {
            function,
            lambda,
            q11,
            q12,
        })
    }

    fn objective_terms<'e>(&mut self, e: &'e Expr, c: ParamRat, out: &mut Vec<(ParamRat, &'e Expr)>) -> Result<()> {
        match e {
            Expr::Apply { .. } | Expr::NormSquare(_) => {
                out.push((c, e));
                Ok(())
            }
            Expr::Neg(a) => self.objective_terms(a, -c, out),
            Expr::Bin(BinOp::Add, a, b) => {
                self.objective_terms(a, c.clone(), out)?;
                self.objective_terms(b, c, out)
            }
            Expr::Bin(BinOp::Sub, a, b) => {
                self.objective_terms(a, c.clone(), out)?;
                self.objective_terms(b, -c, out)
            }
            Expr::Bin(BinOp::Mul, a, b) => {
                if let Some(k) = self.try_constant(a) {
                    self.objective_terms(b, &c * &k, out)
                } else if let Some(k) = self.try_constant(b) {
                    self.objective_terms(a, &c * &k, out)
                } else {
                    Err(Error::Nonlinear(format!("nonlinear objective term `{}`", expr_to_string(e))))
                }
            }
            Expr::Bin(BinOp::Div, a, b) => {
                let k = self
                    .try_constant(b)
                    .and_then(|k| k.inv())
                    .ok_or_else(|| Error::Nonlinear(format!("invalid objective term `{}`", expr_to_string(e))))?;
                self.objective_terms(a, &c * &k, out)
            }
            _ => Err(Error::Invalid(format!(
                "objective term `{}` is neither a function term nor norm_square",
                expr_to_string(e)
            ))),
        }
    }

    fn try_constant(&mut self, e: &Expr) -> Option<ParamRat> {
        let mut plain = true;
        e.walk(&mut |x| plain &= matches!(x, Expr::Num(_) | Expr::Ident(_) | Expr::Neg(_) | Expr::Bin(..)));
        if !plain {
            return None;
        }
        self.eval(e).ok()?.as_constant()
    }
}

/// Lowers a validated algorithm.
pub fn lower(def: &AlgorithmDef, mode: Mode) -> Result<Lowered> {
    let mut lw = Lowerer {
        def,
        mode,
        env: def.vars.iter().map(|v| (v.clone(), Lin::atom(Atom::State(v.clone())))).collect(),
        bound: None,
        channels: Vec::new(),
    };
    for u in &def.updates {
        let v = lw.eval(&u.rhs)?;
        lw.env.insert(u.target.clone(), v);
    }
    let next: Vec<Lin> = def.vars.iter().map(|v| lw.env[v].clone()).collect();
    for (what, l) in lw
        .channels
        .iter()
        .map(|c| (format!("input of `{}`", c.label), &c.input))
        .chain(def.vars.iter().zip(&next).map(|(v, l)| (format!("update of `{v}`"), l)))
    {
        if !l.coeff(&Atom::One).is_zero() {
            return Err(Error::Invalid(format!(
                "{what} has a constant offset; only linear updates are supported"
            )));
        }
    }
    Ok(Lowered {
        name: def.name.clone(),
        params: def.params.clone(),
        vars: def.vars.clone(),
        channels: lw.channels,
        next,
    })
}

/// Rewrites every functional oracle into subgradient form.
pub fn functional_rewrite(def: &AlgorithmDef) -> Result<Lowered> {
    lower(def, Mode::Functional)
}

/// Extracts the quadratic model of `argmin(target, objective)`.
///
/// Identifiers other than `target` and the listed parameters become state
/// atoms; `functions` lists the function symbols that may appear.
pub fn parse_argmin(objective: &str, target: &str, params: &[&str], functions: &[&str]) -> Result<QuadForm> {
    let (expr, _) = super::parser::parse_expr(objective, functions)?;
    let mut names = Vec::new();
    expr.walk(&mut |e| {
        if let Expr::Ident(s) = e {
            if s != target && !params.contains(&s.as_str()) && !names.contains(s) {
                names.push(s.clone());
            }
        }
    });
    let def = AlgorithmDef {
        name: String::new(),
        params: params.iter().map(|s| s.to_string()).collect(),
        functions: functions.iter().map(|s| s.to_string()).collect(),
        oracles: Vec::new(),
        vars: names.clone(),
        updates: Vec::new(),
    };
    let mut lw = Lowerer {
        def: &def,
        mode: Mode::Functional,
        env: names.iter().map(|v| (v.clone(), Lin::atom(Atom::State(v.clone())))).collect(),
        bound: Some(target.to_string()),
        channels: Vec::new(),
    };
    lw.quad_form(&expr)
}
