//! Source rendering of an [`AlgorithmDef`]; the output parses back to the
//! same tree.

use std::fmt;

use num_rational::BigRational;

use super::ast::{AlgorithmDef, BinOp, Expr, OracleDecl, OracleKind};

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        _ => 4,
    }
}

fn num(q: &BigRational, lead: bool) -> String {
    if q.is_integer() && q >= &BigRational::from_integer(0.into()) {
        q.numer().to_string()
    } else if lead && q.numer() > &0.into() {
        format!("{}/{}", q.numer(), q.denom())
    } else if q.is_integer() {
        format!("({})", q.numer())
    } else {
        format!("({}/{})", q.numer(), q.denom())
    }
}

fn starts_with_num(e: &Expr) -> bool {
    match e {
        Expr::Num(_) => true,
        Expr::Neg(a) => starts_with_num(a),
        _ => false,
    }
}

struct Ctx<'a> {
    def: Option<&'a AlgorithmDef>,
}

impl Ctx<'_> {
    fn inline(&self, label: &str) -> Option<&OracleDecl> {
        self.def?.oracle(label).filter(|o| o.inline)
    }

    fn wrap(&self, e: &Expr, parens: bool, lead: bool) -> String {
        if parens {
            format!("({})", self.expr(e, true))
        } else {
            self.expr(e, lead)
        }
    }

    fn expr(&self, e: &Expr, lead: bool) -> String {
        match e {
            Expr::Num(q) => num(q, lead),
            Expr::Ident(s) => s.clone(),
            Expr::Neg(a) => format!("-{}", self.wrap(a, prec(a) < 3, lead)),
            Expr::Bin(op, l, r) => {
                let p = prec(e);
                let (sym, r_lead) = match op {
                    BinOp::Add => (" + ", true),
                    BinOp::Sub => (" - ", true),
                    BinOp::Mul => ("*", false),
                    BinOp::Div => ("/", false),
                };
                let l_parens = prec(l) < p || (*op == BinOp::Div && starts_with_num(l) && matches!(**r, Expr::Num(_)));
                format!("{}{}{}", self.wrap(l, l_parens, lead), sym, self.wrap(r, prec(r) <= p, r_lead))
            }
            Expr::Call { oracle, arg } => {
                let head = match self.inline(oracle) {
                    Some(o) => self.kind(&o.kind),
                    None => oracle.clone(),
                };
                format!("{head}({})", self.expr(arg, true))
            }
            Expr::Apply { func, arg } => format!("{func}({})", self.expr(arg, true)),
            Expr::NormSquare(a) => format!("norm_square({})", self.expr(a, true)),
            Expr::Argmin { target, objective, .. } => format!("argmin({target}, {})", self.expr(objective, true)),
        }
    }

    fn kind(&self, k: &OracleKind) -> String {
        match k {
            OracleKind::BlackBox | OracleKind::Argmin(_) => String::new(),
            OracleKind::Grad(f) => format!("grad({f})"),
            OracleKind::Subgrad(f) => format!("subgrad({f})"),
            OracleKind::Prox(f, s) => format!("prox({f}, {})", self.expr(s, true)),
        }
    }
}

/// Renders an expression; inline oracle calls print by label.
pub fn expr_to_string(e: &Expr) -> String {
    Ctx { def: None }.expr(e, true)
}

impl fmt::Display for AlgorithmDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = Ctx { def: Some(self) };
        writeln!(f, "algorithm \"{}\" {{", self.name)?;
        if !self.params.is_empty() {
            writeln!(f, "  params {};", self.params.join(" "))?;
        }
        if !self.functions.is_empty() {
            writeln!(f, "  functions {};", self.functions.join(" "))?;
        }
        let declared: Vec<String> = self
            .oracles
            .iter()
            .filter(|o| !o.inline)
            .map(|o| match o.kind {
                OracleKind::BlackBox => o.label.clone(),
                _ => format!("{} = {}", o.label, ctx.kind(&o.kind)),
            })
            .collect();
        if !declared.is_empty() {
            writeln!(f, "  oracles {};", declared.join(", "))?;
        }
        if !self.vars.is_empty() {
            writeln!(f, "  vars {};", self.vars.join(" "))?;
        }
        for u in &self.updates {
            writeln!(f, "  update {} <- {};", u.target, ctx.expr(&u.rhs, true))?;
        }
        write!(f, "}}")
    }
}
