//! Syntax tree of an algorithm description.

use num_rational::BigRational;
use serde::Serialize;

/// A function symbol, possibly its convex conjugate (`f*`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct FuncRef {
    pub name: String,
    pub conjugate: bool,
}

impl FuncRef {
    pub fn new(name: &str, conjugate: bool) -> Self {
        FuncRef {
            name: name.to_string(),
            conjugate,
        }
    }

    /// The same function with the conjugation flag toggled.
    pub fn flipped(&self) -> Self {
        FuncRef {
            name: self.name.clone(),
            conjugate: !self.conjugate,
        }
    }
}

impl std::fmt::Display for FuncRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.name, if self.conjugate { "*" } else { "" })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum OracleKind {
    /// Opaque map identified only by its label.
    BlackBox,
    Grad(FuncRef),
    Subgrad(FuncRef),
    /// `prox_{step * f}`.
    Prox(FuncRef, Expr),
    /// Minimizer of the function plus a quadratic; the quadratic lives in
    /// the call's objective.
    Argmin(FuncRef),
}

impl OracleKind {
    pub fn function(&self) -> Option<&FuncRef> {
        match self {
            OracleKind::BlackBox => None,
            OracleKind::Grad(f) | OracleKind::Subgrad(f) | OracleKind::Prox(f, _) | OracleKind::Argmin(f) => Some(f),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct OracleDecl {
    pub label: String,
    pub kind: OracleKind,
    /// Declared at its call site rather than in an `oracles` statement.
    pub inline: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    Num(BigRational),
    /// A variable or parameter.
    Ident(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Oracle application by label.
    Call {
        oracle: String,
        arg: Box<Expr>,
    },
    /// `f(x)` or `f*(x)` inside an argmin objective.
    Apply {
        func: FuncRef,
        arg: Box<Expr>,
    },
    NormSquare(Box<Expr>),
    /// `argmin(target, objective)`; `oracle` labels the implied oracle.
    Argmin {
        oracle: String,
        target: String,
        objective: Box<Expr>,
    },
}

impl Expr {
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Visits this node and all descendants in evaluation order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match self {
            Expr::Num(_) | Expr::Ident(_) => {}
            Expr::Neg(a) | Expr::NormSquare(a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Call { arg, .. } | Expr::Apply { arg, .. } => arg.walk(f),
            Expr::Argmin { objective, .. } => objective.walk(f),
        }
        f(self);
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct UpdateEq {
    pub target: String,
    pub rhs: Expr,
}

/// A parsed algorithm: declarations plus the ordered update equations of
/// one iteration.
#[derive(Clone, PartialEq, Debug)]
pub struct AlgorithmDef {
    pub name: String,
    pub params: Vec<String>,
    pub functions: Vec<String>,
    pub oracles: Vec<OracleDecl>,
    pub vars: Vec<String>,
    pub updates: Vec<UpdateEq>,
}

impl AlgorithmDef {
    pub fn oracle(&self, label: &str) -> Option<&OracleDecl> {
        self.oracles.iter().find(|o| o.label == label)
    }

    /// The same algorithm with its update equations rotated to start at
    /// index `r`.
    pub fn rotated(&self, r: usize) -> AlgorithmDef {
        let mut out = self.clone();
        if !out.updates.is_empty() {
            let r = r % out.updates.len();
            out.updates.rotate_left(r);
        }
        out
    }
}
