//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p algokin --test acceptance -- --nocapture`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use algokin::dsl::Mode;
use algokin::equivalence::solve::holds;
use algokin::equivalence::{
    check_conjugate, check_conjugate_permutation, check_oracle_equivalent, check_repetition, check_shift_equivalent, integer_form,
    CompiledAlgorithm, RelationReport, Verdict,
};
use algokin::numeric::{cross_validate, FLOAT_TOLERANCE};
use algokin::symbolic::{mat_equal, rat, ParamRat};
use algokin::transforms::delay_transform;
use algokin::Error;
use common::{goldens, load, matrix, props};

const F: Mode = Mode::Functional;
const BB: Mode = Mode::BlackBox;

const SEEDS: u64 = 20;
const ITERATIONS: usize = 50;
const MAX_REPEAT: usize = 4;

/// Pairs whose float runs cannot meet the tolerance: `A` carries an
/// unobservable mode with eigenvalue 2, so rounding error doubles every step.
const FLOAT_UNSTABLE: &[(&str, &str)] = &[("gradient-reparameterized", "gradient-fixed-step")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(n: usize, o: &Outcome, took: Duration) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status} [{:.2}s] {}", took.as_secs_f64(), o.detail);
}

type Check = fn(&CompiledAlgorithm, &CompiledAlgorithm) -> RelationReport;

struct Expected {
    a: &'static str,
    b: &'static str,
    mode: Mode,
    check: Check,
    verdict: Verdict,
    shift: Option<usize>,
    kappa: &'static [usize],
    repeat: Option<usize>,
    conditions: &'static [(&'static str, &'static str)],
}

fn repetition(a: &CompiledAlgorithm, b: &CompiledAlgorithm) -> RelationReport {
    check_repetition(a, b, MAX_REPEAT)
}

fn expected_verdicts() -> Vec<Expected> {
    let equiv = |a, b, mode| Expected {
        a,
        b,
        mode,
        check: check_oracle_equivalent,
        verdict: Verdict::OracleEquivalent,
        shift: None,
        kappa: &[],
        repeat: None,
        conditions: &[],
    };
    let shift = |a, b, mode, conditions| Expected {
        check: check_shift_equivalent,
        verdict: Verdict::ShiftEquivalent,
        shift: Some(1),
        conditions,
        ..equiv(a, b, mode)
    };
    let mut v = vec![
        equiv("gradient-extrapolated", "gradient-two-state", F),
        equiv("gradient-reparameterized", "gradient-fixed-step", F),
        shift("splitting-black-box", "splitting-black-box-reordered", BB, &[]),
        shift("splitting-black-box", "splitting-rotated-1.alg", BB, &[]),
        equiv("splitting-black-box", "splitting-rotated-2.alg", BB),
    ];
    let ops = [
        "arrow-hurwicz",
        "extrapolation-from-past",
        "optimistic-mirror-descent",
        "reflected-gradient",
    ];
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            v.push(equiv(a, b, F));
        }
    }
    v.extend([
        shift("douglas-rachford", "admm", F, &[("ρ", "1/t")]),
        Expected {
            check: check_conjugate_permutation,
            verdict: Verdict::ConjugatePermutation,
            shift: Some(1),
            kappa: &[0, 1],
            conditions: &[("ρ", "t")],
            ..equiv("douglas-rachford", "admm-conjugate", F)
        },
        Expected {
            check: check_conjugate,
            verdict: Verdict::Conjugate,
            kappa: &[1],
            conditions: &[("σ", "1/t"), ("τ", "t")],
            ..equiv("douglas-rachford", "chambolle-pock", F)
        },
        Expected {
            check: check_conjugate,
            verdict: Verdict::Conjugate,
            kappa: &[1],
            ..equiv("proximal-gradient", "proximal-gradient-conjugate", F)
        },
        Expected {
            check: repetition,
            verdict: Verdict::Repetition,
            repeat: Some(2),
            ..equiv("gradient", "gradient-twice", F)
        },
    ]);
    v
}

fn criterion_1() -> Outcome {
    let all = goldens();
    let bad: Vec<&str> = all
        .iter()
        .filter(|g| !mat_equal(&g.computed(), &g.expected()))
        .map(|g| g.id)
        .collect();
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} displayed transfer matrices equal symbolically", all.len())
        } else {
            format!("mismatch in {}", bad.join(", "))
        },
    }
}

struct Decided {
    ids: (&'static str, &'static str),
    a: CompiledAlgorithm,
    b: CompiledAlgorithm,
    report: RelationReport,
}

fn criterion_2(cases: &[Expected]) -> (Outcome, Vec<Decided>) {
    let mut bad = Vec::new();
    let mut decided = Vec::new();
    for e in cases {
        let (a, b) = (load(e.a, e.mode), load(e.b, e.mode));
        let report = (e.check)(&a, &b);
        let w = &report.witness;
        let want: Vec<(String, String)> = e.conditions.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let conditions_ok = if e.conditions.is_empty() {
            report.condition.is_trivial()
        } else {
            report.conditions() == want
        };
        let ok = report.verdict == e.verdict
            && w.shift == e.shift
            && w.kappa == e.kappa
            && w.n == e.repeat
            && conditions_ok
            && report.condition.verified;
        if !ok {
            bad.push(format!("{} vs {}: {}", e.a, e.b, report.headline()));
        }
        decided.push(Decided {
            ids: (e.a, e.b),
            a,
            b,
            report,
        });
    }
    let outcome = Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} verdicts with expected witnesses and conditions", cases.len())
        } else {
            bad.join("; ")
        },
    };
    (outcome, decided)
}

fn criterion_3() -> Outcome {
    let (tm, gd) = (load("triple-momentum", F), load("gradient-fixed-step", F));
    let report = check_oracle_equivalent(&tm, &gd);
    let system: BTreeSet<String> = report.condition.equations.iter().map(|e| integer_form(e).to_string()).collect();
    let want = BTreeSet::from(["5*α*η + 5*α - 1".to_string(), "5*α*η - β".to_string()]);
    let mut problems = Vec::new();
    if system != want {
        problems.push(format!("system {system:?}"));
    }
    for (alpha, beta, eta) in [(rat(-1, 5), rat(2, 1), rat(-2, 1)), (rat(1, 1), rat(-4, 1), rat(-4, 5))] {
        let point = BTreeMap::from([("α".to_string(), alpha), ("β".to_string(), beta), ("η".to_string(), eta)]);
        let on_system = report
            .condition
            .equations
            .iter()
            .all(|e| ParamRat::from_poly(e.clone()).eval(&point).is_some_and(|v| v == rat(0, 1)));
        let symbolic: BTreeMap<String, ParamRat> = point.iter().map(|(k, v)| (k.clone(), ParamRat::from_rational(v.clone()))).collect();
        if !on_system || !holds(&tm.h, &gd.h, &symbolic) {
            problems.push(format!("solution {point:?} rejected"));
        }
    }
    Outcome {
        pass: problems.is_empty() && report.verdict == Verdict::OracleEquivalent,
        detail: if problems.is_empty() {
            "system {5αη + 5α - 1 = 0, 5αη - β = 0}; both published solutions verify".into()
        } else {
            problems.join("; ")
        },
    }
}

fn criterion_4() -> Outcome {
    let suites = props::suites();
    let bad: Vec<String> = suites
        .iter()
        .filter_map(|(name, f)| f(&mut props::runner(true)).err().map(|e| format!("{name}: {e}")))
        .collect();
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} properties x {} cases, exact arithmetic", suites.len(), props::CASES)
        } else {
            bad.join("; ")
        },
    }
}

struct NumericOutcome {
    outcome: Outcome,
    unexpected: Vec<String>,
}

fn criterion_5(decided: &[Decided]) -> NumericOutcome {
    let seeds: Vec<u64> = (0..SEEDS).collect();
    let mut failures = Vec::new();
    let mut unexpected = Vec::new();
    let mut worst: f64 = 0.0;
    for d in decided {
        let pair = format!("{} vs {}", d.ids.0, d.ids.1);
        let cv = match cross_validate(&d.report, &d.a, &d.b, &seeds, ITERATIONS) {
            Ok(cv) => cv,
            Err(e) => {
                failures.push(format!("{pair}: {e}"));
                unexpected.push(pair);
                continue;
            }
        };
        let exact_bad = cv.runs.iter().filter(|r| r.exact && !r.comparison.matches).count();
        let float_bad: Vec<_> = cv.runs.iter().filter(|r| !r.exact && !r.comparison.matches).collect();
        for r in cv.runs.iter().filter(|r| r.comparison.matches) {
            worst = worst.max(r.comparison.max_deviation);
        }
        if exact_bad == 0 && float_bad.is_empty() {
            continue;
        }
        let float_dev = float_bad.iter().map(|r| r.comparison.max_deviation).fold(0.0, f64::max);
        failures.push(format!(
            "{pair}: {exact_bad}/{SEEDS} exact and {}/{SEEDS} float runs disagree (float deviation up to {float_dev:.1e})",
            float_bad.len()
        ));
        if exact_bad > 0 || !FLOAT_UNSTABLE.contains(&d.ids) {
            unexpected.push(pair);
        }
    }
    let outcome = Outcome {
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!(
                "{} pairs x {SEEDS} seeds x {ITERATIONS} iterations; exact runs equal, float within {FLOAT_TOLERANCE:e} (worst {worst:.1e})",
                decided.len()
            )
        } else {
            format!("{} of {} pairs: {}", failures.len(), decided.len(), failures.join("; "))
        },
    };
    NumericOutcome { outcome, unexpected }
}

fn criterion_6() -> Outcome {
    let opaque = load("douglas-rachford", BB).h;
    let shifted = matrix(&[&["-1/(z-1)", "z/(z-1)"], &["(2*z-1)/(z*(z-1))", "-1/(z-1)"]]);
    let accepted = delay_transform(&opaque, &[1, 0]).is_ok_and(|h| mat_equal(&h, &shifted));
    let rejected = matches!(delay_transform(&opaque, &[2, 0]), Err(Error::InadmissibleDelay(_)));
    Outcome {
        pass: accepted && rejected,
        detail: format!("d = (1, 0) gives the shifted form: {accepted}; d = (2, 0) rejected: {rejected}"),
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

#[test]
fn acceptance() {
    println!();
    let cases = expected_verdicts();
    let (c1, t1) = timed(criterion_1);
    line(1, &c1, t1);
    let ((c2, decided), t2) = timed(|| criterion_2(&cases));
    line(2, &c2, t2);
    let (c3, t3) = timed(criterion_3);
    line(3, &c3, t3);
    let (c4, t4) = timed(criterion_4);
    line(4, &c4, t4);
    let (c5, t5) = timed(|| criterion_5(&decided));
    line(5, &c5.outcome, t5);
    let (c6, t6) = timed(criterion_6);
    line(6, &c6, t6);

    for (n, c) in [(1, &c1), (2, &c2), (3, &c3), (4, &c4), (6, &c6)] {
        assert!(c.pass, "criterion {n}: {}", c.detail);
    }
    assert!(
        c5.unexpected.is_empty(),
        "criterion 5, unexpected disagreement: {:?}",
        c5.unexpected
    );
}
