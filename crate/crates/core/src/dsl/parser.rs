//! Lexer and recursive-descent parser for the algorithm language.
//!
//! ```text
//! algorithm "Gradient descent" {
//!   params t;
//!   functions f;
//!   oracles gradf = grad(f);
//!   vars x;
//!   update x <- x - t*gradf(x);
//! }
//! ```
//!
//! Oracles may also be written inline at the call site: `grad(f)(x)`,
//! `subgrad(f)(x)`, `prox(f, t)(x)` and `argmin(x, g(x) + rho/2*norm_square(x - w))`.
//! A trailing `*` on a function symbol (`g*`) denotes its conjugate.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;

use super::ast::{AlgorithmDef, BinOp, Expr, FuncRef, OracleDecl, OracleKind, UpdateEq};
use crate::error::{Error, Result};
use crate::symbolic::parse::parse_decimal;

pub const KEYWORDS: &[&str] = &[
    "algorithm",
    "params",
    "functions",
    "oracles",
    "vars",
    "update",
    "grad",
    "subgrad",
    "prox",
    "argmin",
    "norm_square",
];

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Num(String),
    Str(String),
    Arrow,
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, m: String| Error::Syntax {
        line,
        column: col,
        message: m,
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - s;
            out.push(Token {
                tok: Tok::Ident(chars[s..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            col += i - s;
            out.push(Token {
                tok: Tok::Num(chars[s..i].iter().collect()),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '"' {
            let s = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(err(l0, c0, "unterminated string".into()));
            }
            let text: String = chars[s..i].iter().collect();
            i += 1;
            col += text.chars().count() + 2;
            out.push(Token {
                tok: Tok::Str(text),
                line: l0,
                col: c0,
            });
            continue;
        }
        if c == '<' && chars.get(i + 1) == Some(&'-') {
            adv(2, &mut i, &mut col);
            out.push(Token {
                tok: Tok::Arrow,
                line: l0,
                col: c0,
            });
            continue;
        }
        let c = if c == '\u{2212}' { '-' } else { c };
        if "(){};,+-*/=".contains(c) {
            adv(1, &mut i, &mut col);
            out.push(Token {
                tok: Tok::Sym(c),
                line: l0,
                col: c0,
            });
            continue;
        }
        return Err(err(l0, c0, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    functions: BTreeSet<String>,
    oracles: Vec<OracleDecl>,
    labels: BTreeSet<String>,
    inline_count: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err<T>(&self, m: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: m.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`, found {}", describe(self.peek())))
        }
    }

    fn keyword(&mut self, k: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == k => {
                self.bump();
                Ok(())
            }
            t => {
                let d = describe(t);
                self.err(format!("expected `{k}`, found {d}"))
            }
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn name_decl(&mut self) -> Result<String> {
        let s = self.ident()?;
        if KEYWORDS.contains(&s.as_str()) {
            self.pos -= 1;
            return self.err(format!("`{s}` is reserved"));
        }
        Ok(s)
    }

    fn program(&mut self) -> Result<AlgorithmDef> {
        self.keyword("algorithm")?;
        let name = match self.bump() {
            Tok::Str(s) => s,
            t => {
                self.pos -= 1;
                return self.err(format!("expected algorithm name string, found {}", describe(&t)));
            }
        };
        self.expect('{')?;
        let mut def = AlgorithmDef {
            name,
            params: Vec::new(),
            functions: Vec::new(),
            oracles: Vec::new(),
            vars: Vec::new(),
            updates: Vec::new(),
        };
        loop {
            if self.eat('}') {
                break;
            }
            let kw = self.ident()?;
            match kw.as_str() {
                "params" | "functions" | "vars" => {
                    let mut names = Vec::new();
                    while !self.eat(';') {
                        self.eat(',');
                        if self.peek() == &Tok::Sym(';') {
                            continue;
                        }
                        names.push(self.name_decl()?);
                    }
                    self.labels.extend(names.iter().cloned());
                    match kw.as_str() {
                        "params" => def.params.extend(names),
                        "functions" => {
                            self.functions.extend(names.iter().cloned());
                            def.functions.extend(names)
                        }
                        _ => def.vars.extend(names),
                    }
                }
                "oracles" => loop {
                    let label = self.name_decl()?;
                    let kind = if self.eat('=') { self.oracle_kind()? } else { OracleKind::BlackBox };
                    self.labels.insert(label.clone());
                    self.oracles.push(OracleDecl {
                        label,
                        kind,
                        inline: false,
                    });
                    if self.eat(';') {
                        break;
                    }
                    self.expect(',')?;
                },
                "update" => {
                    let target = self.ident()?;
                    if self.peek() != &Tok::Arrow {
                        return self.err(format!("expected `<-`, found {}", describe(self.peek())));
                    }
                    self.bump();
                    let rhs = self.expr()?;
                    self.expect(';')?;
                    def.updates.push(UpdateEq { target, rhs });
                }
                other => {
                    self.pos -= 1;
                    return self.err(format!("unexpected `{other}`"));
                }
            }
        }
        if self.peek() != &Tok::Eof {
            return self.err("trailing input after algorithm");
        }
        def.oracles = std::mem::take(&mut self.oracles);
        Ok(def)
    }

    fn func_ref(&mut self) -> Result<FuncRef> {
        let name = self.ident()?;
        if !self.functions.contains(&name) {
            return Err(Error::UnknownSymbol(name));
        }
        let conj = self.eat('*');
        Ok(FuncRef { name, conjugate: conj })
    }

    fn oracle_kind(&mut self) -> Result<OracleKind> {
        let k = self.ident()?;
        self.expect('(')?;
        let f = self.func_ref()?;
        let kind = match k.as_str() {
            "grad" => OracleKind::Grad(f),
            "subgrad" => OracleKind::Subgrad(f),
            "prox" => {
                self.expect(',')?;
                let step = self.expr()?;
                OracleKind::Prox(f, step)
            }
            _ => {
                self.pos -= 1;
                return self.err(format!("unknown oracle kind `{k}`"));
            }
        };
        self.expect(')')?;
        Ok(kind)
    }

    fn inline_label(&mut self, kind: &str, f: Option<&FuncRef>) -> String {
        let base = match f {
            Some(f) => format!("{kind}_{}{}", f.name, if f.conjugate { "_conj" } else { "" }),
            None => kind.to_string(),
        };
        let mut label = base.clone();
        let mut k = *self.inline_count.get(&base).unwrap_or(&1);
        while self.labels.contains(&label) {
            k += 1;
            label = format!("{base}_{k}");
        }
        self.inline_count.insert(base, k);
        self.labels.insert(label.clone());
        label
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.term()?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary(true)?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary(false)?;
            acc = Expr::bin(op, acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self, lead: bool) -> Result<Expr> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary(lead)?)));
        }
        self.primary(lead)
    }

    fn number(&mut self) -> Result<BigRational> {
        match self.bump() {
            Tok::Num(s) => match parse_decimal(&s) {
                Some(q) => Ok(q),
                None => {
                    self.pos -= 1;
                    self.err(format!("malformed number `{s}`"))
                }
            },
            _ => unreachable!(),
        }
    }

    fn primary(&mut self, lead: bool) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(_) => {
                let mut q = self.number()?;
                if lead && self.peek() == &Tok::Sym('/') && matches!(self.peek_at(1), Tok::Num(_)) {
                    self.bump();
                    let (line, column) = self.here();
                    let d = self.number()?;
                    if num_traits::Zero::is_zero(&d) {
                        return Err(Error::Syntax {
                            line,
                            column,
                            message: "division by zero".into(),
                        });
                    }
                    q /= d;
                }
                Ok(Expr::Num(q))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(id) => {
                self.bump();
                match id.as_str() {
                    "grad" | "subgrad" | "prox" => {
                        self.pos -= 1;
                        let kind = self.oracle_kind()?;
                        let label = self.inline_label(&id, kind.function());
                        self.oracles.push(OracleDecl {
                            label: label.clone(),
                            kind,
                            inline: true,
                        });
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Call {
                            oracle: label,
                            arg: Box::new(arg),
                        })
                    }
                    "argmin" => {
                        self.expect('(')?;
                        let target = self.ident()?;
                        self.expect(',')?;
                        let objective = self.expr()?;
                        self.expect(')')?;
                        let mut func = None;
                        objective.walk(&mut |e| {
                            if let (Expr::Apply { func: f, .. }, None) = (e, &func) {
                                func = Some(f.clone());
                            }
                        });
                        let label = self.inline_label("argmin", func.as_ref());
                        self.oracles.push(OracleDecl {
                            label: label.clone(),
                            kind: OracleKind::Argmin(func.unwrap_or_else(|| FuncRef::new("", false))),
                            inline: true,
                        });
                        Ok(Expr::Argmin {
                            oracle: label,
                            target,
                            objective: Box::new(objective),
                        })
                    }
                    "norm_square" => {
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::NormSquare(Box::new(e)))
                    }
                    _ if self.functions.contains(&id)
                        && (self.peek() == &Tok::Sym('(') || (self.peek() == &Tok::Sym('*') && self.peek_at(1) == &Tok::Sym('('))) =>
                    {
                        let conjugate = self.eat('*');
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Apply {
                            func: FuncRef { name: id, conjugate },
                            arg: Box::new(arg),
                        })
                    }
                    _ if self.peek() == &Tok::Sym('(') => {
                        if !self.oracles.iter().any(|o| o.label == id && !o.inline) {
                            return Err(Error::UnknownSymbol(id));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Call {
                            oracle: id,
                            arg: Box::new(arg),
                        })
                    }
                    _ => Ok(Expr::Ident(id)),
                }
            }
            t => self.err(format!("unexpected {}", describe(&t))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(s) => format!("number `{s}`"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Arrow => "`<-`".into(),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses the text of an algorithm without semantic validation.
pub fn parse_syntax(src: &str) -> Result<AlgorithmDef> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        functions: BTreeSet::new(),
        oracles: Vec::new(),
        labels: BTreeSet::new(),
        inline_count: HashMap::new(),
    };
    p.program()
}

/// Parses a standalone expression; `functions` lists the function symbols
/// that may be applied.
pub fn parse_expr(src: &str, functions: &[&str]) -> Result<(Expr, Vec<OracleDecl>)> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        functions: functions.iter().map(|s| s.to_string()).collect(),
        oracles: Vec::new(),
        labels: BTreeSet::new(),
        inline_count: HashMap::new(),
    };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return p.err("trailing input after expression");
    }
    Ok((e, p.oracles))
}
