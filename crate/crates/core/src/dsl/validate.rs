//! Structural checks on a parsed algorithm.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{AlgorithmDef, Expr, OracleKind};
use crate::error::{Error, Result};

fn collect_idents(e: &Expr, bound: &mut Vec<String>, out: &mut Vec<String>) {
    match e {
        Expr::Ident(s) => {
            if !bound.contains(s) {
                out.push(s.clone());
            }
        }
        Expr::Num(_) => {}
        Expr::Neg(a) | Expr::NormSquare(a) => collect_idents(a, bound, out),
        Expr::Bin(_, a, b) => {
            collect_idents(a, bound, out);
            collect_idents(b, bound, out);
        }
        Expr::Call { arg, .. } | Expr::Apply { arg, .. } => collect_idents(arg, bound, out),
        Expr::Argmin { target, objective, .. } => {
            bound.push(target.clone());
            collect_idents(objective, bound, out);
            bound.pop();
        }
    }
}

/// Checks name uniqueness, symbol resolution, single assignment of every
/// variable and the one-call-per-oracle rule.
pub fn validate(def: &AlgorithmDef) -> Result<()> {
    let mut seen = BTreeSet::new();
    let declared = def
        .params
        .iter()
        .chain(&def.functions)
        .chain(&def.vars)
        .chain(def.oracles.iter().filter(|o| !o.inline).map(|o| &o.label));
    for name in declared {
        if !seen.insert(name.as_str()) {
            return Err(Error::Invalid(format!("`{name}` is declared more than once")));
        }
    }
    let params: BTreeSet<&str> = def.params.iter().map(String::as_str).collect();
    let vars: BTreeSet<&str> = def.vars.iter().map(String::as_str).collect();

    for o in &def.oracles {
        if let OracleKind::Prox(_, step) = &o.kind {
            let mut ids = Vec::new();
            collect_idents(step, &mut Vec::new(), &mut ids);
            if let Some(bad) = ids.iter().find(|i| !params.contains(i.as_str())) {
                return Err(if vars.contains(bad.as_str()) {
                    Error::Invalid(format!("prox step of `{}` depends on variable `{bad}`", o.label))
                } else {
                    Error::UnknownSymbol(bad.clone())
                });
            }
        }
    }

    let mut assigned = BTreeSet::new();
    let mut calls: BTreeMap<&str, usize> = BTreeMap::new();
    for u in &def.updates {
        if !vars.contains(u.target.as_str()) {
            return Err(Error::UnknownSymbol(u.target.clone()));
        }
        if !assigned.insert(u.target.as_str()) {
            return Err(Error::Invalid(format!("variable `{}` is assigned more than once", u.target)));
        }
        let mut ids = Vec::new();
        collect_idents(&u.rhs, &mut Vec::new(), &mut ids);
        if let Some(bad) = ids.iter().find(|i| !params.contains(i.as_str()) && !vars.contains(i.as_str())) {
            return Err(Error::UnknownSymbol(bad.clone()));
        }
        let mut here = 0;
        let mut err = None;
        u.rhs.walk(&mut |e| match e {
            Expr::Call { oracle, .. } | Expr::Argmin { oracle, .. } => {
                if let Expr::Argmin { target, .. } = e {
                    if params.contains(target.as_str()) {
                        err.get_or_insert(Error::Invalid(format!("argmin target `{target}` is a parameter")));
                    }
                }
                here += 1;
                let n = calls.entry(oracle.as_str()).or_default();
                *n += 1;
                if *n > 1 && err.is_none() {
                    err = Some(Error::DuplicateOracleCall(oracle.clone()));
                }
            }
            _ => {}
        });
        if let Some(e) = err {
            return Err(e);
        }
        if here > 1 {
            return Err(Error::Invalid(format!(
                "update of `{}` contains {here} oracle calls; split it into separate updates",
                u.target
            )));
        }
    }
    if let Some(v) = def.vars.iter().find(|v| !assigned.contains(v.as_str())) {
        return Err(Error::Invalid(format!("variable `{v}` is never assigned")));
    }
    if let Some(o) = def.oracles.iter().find(|o| !calls.contains_key(o.label.as_str())) {
        return Err(Error::Invalid(format!("oracle `{}` is never called", o.label)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse_syntax;
    use super::*;

    fn check(body: &str) -> Result<()> {
        validate(&parse_syntax(&format!("algorithm \"a\" {{ {body} }}"))?)
    }

    #[test]
    fn accepts_trivial_update() {
        assert!(check("vars x; update x <- x;").is_ok());
    }

    #[test]
    fn rejects_duplicate_oracle_call() {
        let e = check("params t; functions f; oracles gradf = grad(f); vars x y; update y <- gradf(x); update x <- gradf(y);");
        assert_eq!(e, Err(Error::DuplicateOracleCall("gradf".into())));
    }

    #[test]
    fn rejects_unassigned_variable() {
        assert!(matches!(check("vars x y; update x <- y;"), Err(Error::Invalid(m)) if m.contains("`y`")));
    }

    #[test]
    fn rejects_uncalled_oracle() {
        assert!(matches!(check("oracles h; vars x; update x <- x;"), Err(Error::Invalid(m)) if m.contains("never called")));
    }

    #[test]
    fn rejects_state_dependent_step() {
        let e = check("functions f; vars x; update x <- prox(f, x)(x);");
        assert!(matches!(e, Err(Error::Invalid(m)) if m.contains("depends on variable")));
    }

    #[test]
    fn rejects_two_calls_in_one_update() {
        let e = check("params t; functions f g; vars x; update x <- grad(f)(x) + grad(g)(x);");
        assert!(matches!(e, Err(Error::Invalid(m)) if m.contains("2 oracle calls")));
    }
}
