//! Relations between algorithms, decided by comparing transfer matrices
//! under oracle matchings, cyclic shifts, conjugation and repetition.

pub mod solve;

use std::fmt;

use serde_json::{json, Value};

use crate::dsl::{AlgorithmDef, ChannelKind, Mode};
use crate::error::Result;
use crate::realization::{build_state_space, transfer_function, StateSpace};
use crate::symbolic::matz::{fmt_matrix, reorder, to_strings};
use crate::symbolic::{param_substitute, MatRatZ, ParamRat};
use crate::transforms::{conjugate_transfer, permuted_transfer, repeat_realization};

pub use solve::{equation_sides, integer_form, solve_conditions, ParamCondition, Solve};

/// Largest oracle count for which conjugation subsets are enumerated.
pub const MAX_CONJUGATION_ORACLES: usize = 8;
/// Matchings tried per candidate transform.
pub const MAX_MATCHINGS: usize = 40_320;
/// Default bound on the repetition factor.
pub const DEFAULT_MAX_REPEAT: usize = 4;

/// An algorithm together with its realization and transfer matrix.
#[derive(Clone, Debug)]
pub struct CompiledAlgorithm {
    pub def: AlgorithmDef,
    pub ss: StateSpace,
    pub h: MatRatZ,
}

impl CompiledAlgorithm {
    pub fn new(def: AlgorithmDef, mode: Mode) -> Result<Self> {
        let ss = build_state_space(&def, mode)?;
        let h = transfer_function(&ss)?;
        Ok(CompiledAlgorithm { def, ss, h })
    }

    pub fn from_source(src: &str, mode: Mode) -> Result<Self> {
        Self::new(crate::dsl::parse_algorithm(src)?, mode)
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn kinds(&self) -> Vec<ChannelKind> {
        self.ss.ports.iter().map(|p| p.kind.clone()).collect()
    }

    pub fn oracles(&self) -> usize {
        self.ss.oracles()
    }
}

/// Ordered by priority: earlier variants are stronger relations.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Verdict {
    OracleEquivalent,
    ShiftEquivalent,
    Conjugate,
    ConjugatePermutation,
    Repetition,
    Unrelated,
}

impl Verdict {
    /// Stable identifier used in JSON.
    pub fn key(self) -> &'static str {
        match self {
            Verdict::OracleEquivalent => "oracle_equivalent",
            Verdict::ShiftEquivalent => "shift_equivalent",
            Verdict::Conjugate => "conjugate",
            Verdict::ConjugatePermutation => "conjugate_permutation",
            Verdict::Repetition => "repetition",
            Verdict::Unrelated => "unrelated",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key().replace('_', "-"))
    }
}

/// How `A` was transformed and matched onto `B`. Indices are 0-based
/// positions in `A`'s oracle call order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Witness {
    /// `matching[i]` is the transformed-`A` channel matched to channel `i`
    /// of `B`.
    pub matching: Vec<usize>,
    pub shift: Option<usize>,
    pub kappa: Vec<usize>,
    pub n: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct RelationReport {
    pub verdict: Verdict,
    pub a_name: String,
    pub b_name: String,
    pub witness: Witness,
    /// Labels of the transformed `A` channels, before matching.
    pub a_labels: Vec<String>,
    pub b_labels: Vec<String>,
    pub condition: ParamCondition,
    pub h_a: MatRatZ,
    pub h_b: MatRatZ,
    /// `A` after the witness transforms and matching, before substitution.
    pub transformed: Option<MatRatZ>,
}

impl RelationReport {
    fn unrelated(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> Self {
        RelationReport {
            verdict: Verdict::Unrelated,
            a_name: a.name().into(),
            b_name: b.name().into(),
            witness: Witness::default(),
            a_labels: a.ss.labels(),
            b_labels: b.ss.labels(),
            condition: ParamCondition::default(),
            h_a: a.h.clone(),
            h_b: b.h.clone(),
            transformed: None,
        }
    }

    pub fn is_related(&self) -> bool {
        self.verdict != Verdict::Unrelated
    }

    /// Headline such as `conjugate-permutation (kappa = {1, 2}, j = 1)`.
    pub fn headline(&self) -> String {
        let kappa = || {
            let k: Vec<String> = self.witness.kappa.iter().map(|i| (i + 1).to_string()).collect();
            format!("kappa = {{{}}}", k.join(", "))
        };
        let j = self.witness.shift.unwrap_or(0);
        match self.verdict {
            Verdict::ShiftEquivalent => format!("{} (j = {j})", self.verdict),
            Verdict::Conjugate => format!("{} ({})", self.verdict, kappa()),
            Verdict::ConjugatePermutation => format!("{} ({}, j = {j})", self.verdict, kappa()),
            Verdict::Repetition => format!("{} (n = {})", self.verdict, self.witness.n.unwrap_or(0)),
            _ => self.verdict.to_string(),
        }
    }

    /// Conditions as `lhs = rhs` pairs: the solved form when it determines
    /// every unknown, the reduced equations otherwise.
    pub fn conditions(&self) -> Vec<(String, String)> {
        let c = &self.condition;
        if c.free.is_empty() && c.residual.is_empty() && c.verified {
            c.solved.iter().map(|(k, v)| (k.clone(), v.to_string())).collect()
        } else {
            c.equations.iter().chain(&c.residual).map(equation_sides).collect()
        }
    }

    /// Matched pairs `(A label, B label)` in `B` order.
    pub fn matched_labels(&self) -> Vec<(String, String)> {
        self.witness
            .matching
            .iter()
            .enumerate()
            .map(|(i, &k)| (self.a_labels[k].clone(), self.b_labels[i].clone()))
            .collect()
    }

    /// Replays the witness on `a` and checks it reproduces `b` exactly under
    /// the solved parameters.
    pub fn replay(&self, a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> Result<bool> {
        if !self.is_related() {
            return Ok(false);
        }
        let mut h = match self.witness.n {
            Some(n) => transfer_function(&repeat_realization(&a.ss, n)?)?,
            None => a.h.clone(),
        };
        if !self.witness.kappa.is_empty() {
            h = conjugate_transfer(&h, &self.witness.kappa)?;
        }
        if let Some(j) = self.witness.shift {
            h = permuted_transfer(&h, j)?;
        }
        let h = reorder(&h, &self.witness.matching);
        Ok(solve::holds(&h, &b.h, &self.condition.solved))
    }

    pub fn to_json(&self) -> Value {
        let c = &self.condition;
        let point = |p: &std::collections::BTreeMap<String, ParamRat>| -> Value {
            p.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect()
        };
        json!({
            "verdict": self.verdict.key(),
            "a": self.a_name,
            "b": self.b_name,
            "witness": {
                "matching": self.matched_labels().iter().map(|(a, b)| json!({"a": a, "b": b})).collect::<Vec<_>>(),
                "shift": self.witness.shift,
                "kappa": self.witness.kappa.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "n": self.witness.n,
            },
            "conditions": self.conditions().iter().map(|(l, r)| json!({"lhs": l, "rhs": r})).collect::<Vec<_>>(),
            "equations": c.equations.iter().map(|e| format!("{} = 0", integer_form(e))).collect::<Vec<_>>(),
            "free": c.free,
            "samples": c.samples.iter().map(point).collect::<Vec<_>>(),
            "residual": c.residual.iter().map(|e| format!("{e} = 0")).collect::<Vec<_>>(),
            "verified": c.verified,
            "side_conditions": c.side_conditions.iter().map(|p| format!("{p} != 0")).collect::<Vec<_>>(),
            "proof": {
                "H_A": to_strings(&self.h_a),
                "H_B": to_strings(&self.h_b),
                "transformed_H_A": self.transformed.as_ref().map(to_strings),
            },
        })
    }
}

impl fmt::Display for RelationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} vs {}: {}", self.a_name, self.b_name, self.headline())?;
        if !self.is_related() {
            return Ok(());
        }
        let pairs: Vec<String> = self.matched_labels().iter().map(|(a, b)| format!("{a} -> {b}")).collect();
        if !pairs.is_empty() {
            writeln!(f, "  matching: {}", pairs.join(", "))?;
        }
        let conds = self.conditions();
        if !conds.is_empty() {
            writeln!(f, "  if the parameters satisfy:")?;
            for (l, r) in conds {
                writeln!(f, "    {l} = {r}")?;
            }
        }
        for s in &self.condition.samples {
            let vals: Vec<String> = s.iter().map(|(k, v)| format!("{k} = {v}")).collect();
            writeln!(f, "  e.g. {}", vals.join(", "))?;
        }
        if !self.condition.verified {
            writeln!(f, "  (conditions not fully solved)")?;
        }
        if let Some(t) = &self.transformed {
            writeln!(f, "  transformed H_A = {}", fmt_matrix(t))?;
        }
        Ok(())
    }
}

struct Search<'a> {
    a: &'a CompiledAlgorithm,
    b: &'a CompiledAlgorithm,
    unknowns: Vec<String>,
    b_kinds: Vec<ChannelKind>,
}

/// Parameters solved for: those only `B` has, or failing that, those only
/// `A` has.
pub fn unknowns(a: &AlgorithmDef, b: &AlgorithmDef) -> Vec<String> {
    let only = |x: &AlgorithmDef, y: &AlgorithmDef| -> Vec<String> { x.params.iter().filter(|p| !y.params.contains(p)).cloned().collect() };
    let ub = only(b, a);
    if ub.is_empty() {
        only(a, b)
    } else {
        ub
    }
}

fn matchings(from: &[ChannelKind], to: &[ChannelKind]) -> Vec<Vec<usize>> {
    fn go(i: usize, from: &[ChannelKind], to: &[ChannelKind], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if out.len() >= MAX_MATCHINGS {
            return;
        }
        if i == to.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..from.len() {
            if !used[k] && from[k] == to[i] {
                used[k] = true;
                cur.push(k);
                go(i + 1, from, to, used, cur, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    if from.len() == to.len() {
        go(0, from, to, &mut vec![false; from.len()], &mut Vec::new(), &mut out);
    }
    out
}

fn conjugated_kinds(kinds: &[ChannelKind], kappa: &[usize]) -> Vec<ChannelKind> {
    kinds
        .iter()
        .enumerate()
        .map(|(i, k)| match k {
            ChannelKind::Subgradient(f) if kappa.contains(&i) => ChannelKind::Subgradient(f.flipped()),
            k => k.clone(),
        })
        .collect()
}

impl<'a> Search<'a> {
    fn new(a: &'a CompiledAlgorithm, b: &'a CompiledAlgorithm) -> Self {
        Search {
            a,
            b,
            unknowns: unknowns(&a.def, &b.def),
            b_kinds: b.kinds(),
        }
    }

    /// First matching under which `h` equals `H_B`; a fully verified one is
    /// preferred over one with residual conditions.
    fn find(&self, h: &MatRatZ, kinds: &[ChannelKind]) -> Option<(Vec<usize>, ParamCondition)> {
        let mut fallback = None;
        for perm in matchings(kinds, &self.b_kinds) {
            let ht = reorder(h, &perm);
            match solve_conditions(&ht, &self.b.h, &self.unknowns) {
                Ok(Solve::Conditions(c)) if c.verified => return Some((perm, c)),
                Ok(Solve::Conditions(c)) => {
                    fallback.get_or_insert((perm, c));
                }
                _ => {}
            }
        }
        fallback
    }

    fn report(
        &self,
        verdict: Verdict,
        h: &MatRatZ,
        labels: Vec<String>,
        mut witness: Witness,
        found: (Vec<usize>, ParamCondition),
    ) -> RelationReport {
        let (perm, condition) = found;
        let transformed = reorder(h, &perm);
        witness.matching = perm;
        let r = RelationReport {
            verdict,
            a_name: self.a.name().into(),
            b_name: self.b.name().into(),
            witness,
            a_labels: labels,
            b_labels: self.b.ss.labels(),
            condition,
            h_a: self.a.h.clone(),
            h_b: self.b.h.clone(),
            transformed: Some(transformed),
        };
        if r.condition.verified {
            debug_assert!(r.replay(self.a, self.b).unwrap_or(false), "witness replay failed");
        }
        r
    }

    fn same_size(&self) -> bool {
        self.a.oracles() == self.b.oracles()
    }

    fn oracle(&self) -> Option<RelationReport> {
        if !self.same_size() {
            return None;
        }
        let found = self.find(&self.a.h, &self.a.kinds())?;
        Some(self.report(Verdict::OracleEquivalent, &self.a.h, self.a.ss.labels(), Witness::default(), found))
    }

    fn shift(&self) -> Option<RelationReport> {
        if !self.same_size() {
            return None;
        }
        let kinds = self.a.kinds();
        for j in 1..self.a.oracles() {
            let Ok(h) = permuted_transfer(&self.a.h, j) else { continue };
            if let Some(found) = self.find(&h, &kinds) {
                let w = Witness {
                    shift: Some(j),
                    ..Witness::default()
                };
                return Some(self.report(Verdict::ShiftEquivalent, &h, self.a.ss.labels(), w, found));
            }
        }
        None
    }

    /// Nonempty subsets of functional oracles whose feedthrough block is
    /// invertible, by size and then lexicographically.
    fn subsets(&self) -> Vec<Vec<usize>> {
        let m = self.a.oracles();
        if m > MAX_CONJUGATION_ORACLES {
            return Vec::new();
        }
        let eligible: Vec<usize> = (0..m)
            .filter(|&i| matches!(self.a.ss.ports[i].kind, ChannelKind::Subgradient(_)))
            .collect();
        let mut out: Vec<Vec<usize>> = (1u32..1 << eligible.len())
            .map(|mask| (0..eligible.len()).filter(|b| mask >> b & 1 == 1).map(|b| eligible[b]).collect())
            .filter(|k: &Vec<usize>| self.a.ss.d.select(k, k).inverse().is_ok())
            .collect();
        out.sort_by(|x, y| x.len().cmp(&y.len()).then(x.cmp(y)));
        out
    }

    fn conjugate(&self) -> Option<RelationReport> {
        if !self.same_size() {
            return None;
        }
        for kappa in self.subsets() {
            let Ok(h) = conjugate_transfer(&self.a.h, &kappa) else { continue };
            let kinds = conjugated_kinds(&self.a.kinds(), &kappa);
            if let Some(found) = self.find(&h, &kinds) {
                let w = Witness {
                    kappa,
                    ..Witness::default()
                };
                return Some(self.report(Verdict::Conjugate, &h, self.a.ss.labels(), w, found));
            }
        }
        None
    }

    fn conjugate_permutation(&self) -> Option<RelationReport> {
        if !self.same_size() {
            return None;
        }
        for kappa in self.subsets() {
            let Ok(hk) = conjugate_transfer(&self.a.h, &kappa) else { continue };
            let kinds = conjugated_kinds(&self.a.kinds(), &kappa);
            for j in 1..self.a.oracles() {
                let Ok(h) = permuted_transfer(&hk, j) else { continue };
                if let Some(found) = self.find(&h, &kinds) {
                    let w = Witness {
                        kappa,
                        shift: Some(j),
                        ..Witness::default()
                    };
                    return Some(self.report(Verdict::ConjugatePermutation, &h, self.a.ss.labels(), w, found));
                }
            }
        }
        None
    }

    fn repetition(&self, max_n: usize) -> Option<RelationReport> {
        let (ma, mb) = (self.a.oracles(), self.b.oracles());
        for n in 2..=max_n {
            if ma * n != mb {
                continue;
            }
            let Ok(ss) = repeat_realization(&self.a.ss, n) else { continue };
            let Ok(h) = transfer_function(&ss) else { continue };
            let kinds: Vec<ChannelKind> = ss.ports.iter().map(|p| p.kind.clone()).collect();
            if let Some(found) = self.find(&h, &kinds) {
                let w = Witness {
                    n: Some(n),
                    ..Witness::default()
                };
                return Some(self.report(Verdict::Repetition, &h, ss.labels(), w, found));
            }
        }
        None
    }
}

fn or_unrelated(a: &CompiledAlgorithm, b: &CompiledAlgorithm, r: Option<RelationReport>) -> RelationReport {
    r.unwrap_or_else(|| RelationReport::unrelated(a, b))
}

/// The first fully verified candidate, else the first conditional one.
fn strongest<'s>(cands: impl IntoIterator<Item = Box<dyn FnOnce() -> Option<RelationReport> + 's>>) -> Option<RelationReport> {
    let mut fallback = None;
    for c in cands {
        match c() {
            Some(r) if r.condition.verified => return Some(r),
            Some(r) => {
                fallback.get_or_insert(r);
            }
            None => {}
        }
    }
    fallback
}

pub fn check_oracle_equivalent(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> RelationReport {
    or_unrelated(a, b, Search::new(a, b).oracle())
}

/// Oracle equivalence counts as the shift `j = 0`.
pub fn check_shift_equivalent(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> RelationReport {
    let s = Search::new(a, b);
    or_unrelated(
        a,
        b,
        strongest([Box::new(|| s.oracle()) as Box<dyn FnOnce() -> _>, Box::new(|| s.shift())]),
    )
}

pub fn check_conjugate(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> RelationReport {
    let s = Search::new(a, b);
    or_unrelated(
        a,
        b,
        strongest([Box::new(|| s.oracle()) as Box<dyn FnOnce() -> _>, Box::new(|| s.conjugate())]),
    )
}

/// Searches conjugation subsets first and cyclic shifts second; both must be
/// nontrivial unless the algorithms are already oracle-equivalent.
pub fn check_conjugate_permutation(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> RelationReport {
    let s = Search::new(a, b);
    or_unrelated(
        a,
        b,
        strongest([
            Box::new(|| s.oracle()) as Box<dyn FnOnce() -> _>,
            Box::new(|| s.conjugate_permutation()),
        ]),
    )
}

pub fn check_repetition(a: &CompiledAlgorithm, b: &CompiledAlgorithm, max_n: usize) -> RelationReport {
    let s = Search::new(a, b);
    or_unrelated(
        a,
        b,
        strongest([Box::new(|| s.oracle()) as Box<dyn FnOnce() -> _>, Box::new(|| s.repetition(max_n))]),
    )
}

/// Every relation found, strongest first. Empty when unrelated.
pub fn check_all(a: &CompiledAlgorithm, b: &CompiledAlgorithm, max_n: usize) -> Vec<RelationReport> {
    let s = Search::new(a, b);
    [s.oracle(), s.shift(), s.conjugate(), s.conjugate_permutation(), s.repetition(max_n)]
        .into_iter()
        .flatten()
        .collect()
}

/// Groups the rotations of the update list by the within-iteration oracle
/// structure: rotations whose feedthrough matrices agree (with channels in
/// label order) share a class. Classes are listed by first rotation.
pub fn classify_cyclic_classes(def: &AlgorithmDef, mode: Mode) -> Result<Vec<Vec<usize>>> {
    let mut classes: Vec<(crate::symbolic::MatParam, Vec<usize>)> = Vec::new();
    for r in 0..def.updates.len().max(1) {
        let ss = build_state_space(&def.rotated(r), mode)?;
        let mut order: Vec<usize> = (0..ss.oracles()).collect();
        order.sort_by(|&x, &y| ss.ports[x].label.cmp(&ss.ports[y].label));
        let d = ss.d.select(&order, &order);
        match classes.iter_mut().find(|(cd, _)| *cd == d) {
            Some((_, members)) => members.push(r),
            None => classes.push((d, vec![r])),
        }
    }
    Ok(classes.into_iter().map(|(_, m)| m).collect())
}

/// `H` with parameters replaced by the given values.
pub fn instantiate(h: &MatRatZ, point: &std::collections::BTreeMap<String, ParamRat>) -> Result<MatRatZ> {
    param_substitute(h, point)
}
