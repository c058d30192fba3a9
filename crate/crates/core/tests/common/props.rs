use std::collections::BTreeMap;

use algokin::dsl::{ChannelKind, FuncRef};
use algokin::numeric::{AffineOracle, NumericRealization, Problem};
use algokin::realization::{apply_state_transform, fixed_point, partial_inverse, transfer_function, AffineMap, Port, StateSpace};
use algokin::symbolic::{mat_equal, rat, MatParam, MatRatZ, Matrix, ParamRat};
use algokin::transforms::{conjugate_transfer, cyclic_permute_realization, delay_transform, permuted_transfer, repeat_realization};
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRng, TestRunner};

pub const CASES: u32 = 128;

pub type Outcome = Result<(), String>;
pub type Property = fn(&mut TestRunner) -> Outcome;

/// A runner drawing `CASES` cases; `deterministic` fixes the seed.
pub fn runner(deterministic: bool) -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    if deterministic {
        let rng = TestRng::deterministic_rng(config.rng_algorithm);
        TestRunner::new_with_rng(config, rng)
    } else {
        TestRunner::new(config)
    }
}

fn run<S: Strategy>(runner: &mut TestRunner, s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome {
    runner.run(&s, f).map_err(|e| e.to_string())
}

fn small() -> impl Strategy<Value = i64> {
    -3i64..=3
}

fn mat(rows: usize, cols: usize) -> impl Strategy<Value = MatParam> {
    prop::collection::vec(small(), rows * cols).prop_map(move |v| Matrix::from_fn(rows, cols, |i, j| ParamRat::from_int(v[i * cols + j])))
}

/// Causal feedthrough: zero above the diagonal.
fn causal_d(m: usize) -> impl Strategy<Value = MatParam> {
    prop::collection::vec(-2i64..=2, m * m).prop_map(move |v| {
        Matrix::from_fn(m, m, |i, j| {
            if j > i {
                ParamRat::zero()
            } else {
                ParamRat::from_int(v[i * m + j])
            }
        })
    })
}

fn realization(max_n: usize, max_m: usize) -> impl Strategy<Value = StateSpace> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        (mat(n, n), mat(n, m), mat(m, n), causal_d(m)).prop_map(move |(a, b, c, d)| StateSpace {
            name: "random".into(),
            a,
            b,
            c,
            d,
            ports: (0..m)
                .map(|i| Port {
                    label: format!("o{}", i + 1),
                    kind: ChannelKind::Subgradient(FuncRef::new(&format!("f{}", i + 1), false)),
                })
                .collect(),
            var_names: (0..n).map(|i| format!("x{}", i + 1)).collect(),
            params: Vec::new(),
        })
    })
}

/// A realization together with a nonempty channel subset whose feedthrough
/// block is invertible.
fn with_subset(max_n: usize, max_m: usize) -> impl Strategy<Value = (StateSpace, Vec<usize>)> {
    realization(max_n, max_m).prop_flat_map(|ss| {
        let m = ss.oracles();
        (Just(ss), 1u32..(1 << m)).prop_map(|(ss, mask)| {
            let kappa: Vec<usize> = (0..ss.oracles()).filter(|i| mask >> i & 1 == 1).collect();
            (ss, kappa)
        })
    })
}

fn invertible_block(ss: &StateSpace, kappa: &[usize]) -> bool {
    ss.d.select(kappa, kappa).inverse().is_ok()
}

fn tf(ss: &StateSpace) -> MatRatZ {
    transfer_function(ss).unwrap()
}

fn realization_eq(a: &StateSpace, b: &StateSpace) -> bool {
    a.a == b.a && a.b == b.b && a.c == b.c && a.d == b.d
}

fn affine_maps(m: usize) -> impl Strategy<Value = Vec<AffineMap>> {
    prop::collection::vec((prop_oneof![1i64..=4, -4i64..=-1], 1i64..=3, small()), m).prop_map(|v| {
        v.into_iter()
            .map(|(g, d, h)| AffineMap::new(ParamRat::from_rational(rat(g, d)), h))
            .collect()
    })
}

fn inverse_map(m: &AffineMap) -> AffineMap {
    let gi = m.gain.inv().unwrap();
    let off = -(&gi * &m.offset);
    AffineMap::new(gi, off)
}

pub fn transfer_is_invariant_under_state_transforms(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 2), mat(3, 3)), |(ss, q)| {
        let n = ss.states();
        let idx: Vec<usize> = (0..n).collect();
        let q = q.select(&idx, &idx);
        prop_assume!(q.inverse().is_ok());
        let moved = apply_state_transform(&ss, &q).unwrap();
        prop_assert!(mat_equal(&tf(&ss), &tf(&moved)));
        Ok(())
    })
}

pub fn sweep_is_an_involution(runner: &mut TestRunner) -> Outcome {
    run(runner, with_subset(3, 3), |(ss, kappa)| {
        prop_assume!(invertible_block(&ss, &kappa));
        let once = partial_inverse(&ss, &kappa).unwrap();
        let twice = partial_inverse(&once, &kappa).unwrap();
        prop_assert!(realization_eq(&twice, &ss));
        prop_assert_eq!(&twice.ports, &ss.ports);
        Ok(())
    })
}

pub fn sweeps_commute(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 3), 0usize..3, 0usize..3), |(ss, i, j)| {
        let m = ss.oracles();
        let (i, j) = (i % m, j % m);
        prop_assume!(i != j && !ss.d.get(i, i).is_zero() && !ss.d.get(j, j).is_zero());
        let ij = partial_inverse(&partial_inverse(&ss, &[i]).unwrap(), &[j]).unwrap();
        let ji = partial_inverse(&partial_inverse(&ss, &[j]).unwrap(), &[i]).unwrap();
        let both = partial_inverse(&ss, &[i, j]).unwrap();
        prop_assert!(realization_eq(&ij, &ji));
        prop_assert!(realization_eq(&ij, &both));
        Ok(())
    })
}

pub fn conjugation_and_cyclic_permutation_commute(runner: &mut TestRunner) -> Outcome {
    run(runner, (with_subset(3, 3), 1usize..3), |((ss, kappa), j)| {
        let m = ss.oracles();
        prop_assume!(m >= 2 && invertible_block(&ss, &kappa));
        let j = 1 + (j - 1) % (m - 1);
        let h = tf(&ss);
        let conj_then_perm = conjugate_transfer(&h, &kappa).and_then(|c| permuted_transfer(&c, j));
        let perm_then_conj = permuted_transfer(&h, j).and_then(|p| conjugate_transfer(&p, &kappa));
        match (conj_then_perm, perm_then_conj) {
            (Ok(x), Ok(y)) => prop_assert!(mat_equal(&x, &y)),
            (x, y) => prop_assert_eq!(x.is_ok(), y.is_ok()),
        }
        Ok(())
    })
}

pub fn cyclic_permutation_agrees_with_its_transfer_form(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 3), 1usize..3), |(ss, j)| {
        let m = ss.oracles();
        prop_assume!(m >= 2);
        let j = 1 + (j - 1) % (m - 1);
        let d12 = ss.d.select(&(0..j).collect::<Vec<_>>(), &(j..m).collect::<Vec<_>>());
        prop_assert!(d12.is_zero());
        let realized = tf(&cyclic_permute_realization(&ss, j).unwrap());
        prop_assert!(mat_equal(&realized, &permuted_transfer(&tf(&ss), j).unwrap()));
        Ok(())
    })
}

pub fn delays_keep_entries_proper(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 3), prop::collection::vec(0i32..=2, 3)), |(ss, d)| {
        let h = tf(&ss);
        let d = &d[..ss.oracles()];
        let admissible = (0..h.rows()).all(|i| {
            (0..h.cols()).all(|j| {
                let e = h.get(i, j);
                e.is_zero() || e.relative_degree().unwrap() >= i64::from(d[i] - d[j])
            })
        });
        match delay_transform(&h, d) {
            Ok(out) => {
                prop_assert!(admissible);
                prop_assert!(out.entries().all(|e| e.is_proper()));
            }
            Err(_) => prop_assert!(!admissible),
        }
        Ok(())
    })
}

pub fn equal_delays_change_nothing(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 3), 0i32..=3), |(ss, c)| {
        let h = tf(&ss);
        let out = delay_transform(&h, &vec![c; h.rows()]).unwrap();
        prop_assert!(mat_equal(&out, &h));
        Ok(())
    })
}

pub fn partial_inverse_twice_is_identity(runner: &mut TestRunner) -> Outcome {
    run(runner, with_subset(3, 3), |(ss, kappa)| {
        prop_assume!(invertible_block(&ss, &kappa));
        let h = tf(&ss);
        let once = conjugate_transfer(&h, &kappa).unwrap();
        prop_assert!(mat_equal(&conjugate_transfer(&once, &kappa).unwrap(), &h));
        prop_assert!(mat_equal(&tf(&partial_inverse(&ss, &kappa).unwrap()), &once));
        Ok(())
    })
}

pub fn fixed_points_move_with_the_state(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 2), mat(3, 3), affine_maps(2)), |(ss, q, maps)| {
        let n = ss.states();
        let idx: Vec<usize> = (0..n).collect();
        let q = q.select(&idx, &idx);
        prop_assume!(q.inverse().is_ok());
        let maps = &maps[..ss.oracles()];
        let Ok(fp) = fixed_point(&ss, maps) else {
            return Err(TestCaseError::reject("no unique fixed point"));
        };
        let moved = fixed_point(&apply_state_transform(&ss, &q).unwrap(), maps).unwrap();
        let x = Matrix::from_fn(n, 1, |i, _| fp.x[i].clone());
        let qx = q.mul(&x).unwrap();
        prop_assert_eq!(&moved.y, &fp.y);
        prop_assert_eq!(&moved.u, &fp.u);
        prop_assert_eq!(moved.x, (0..n).map(|i| qx.get(i, 0).clone()).collect::<Vec<_>>());
        Ok(())
    })
}

pub fn repetition_repeats_the_fixed_point(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 2), affine_maps(2), 2usize..=3), |(ss, maps, n)| {
        let maps = &maps[..ss.oracles()];
        let Ok(fp) = fixed_point(&ss, maps) else {
            return Err(TestCaseError::reject("no unique fixed point"));
        };
        let rep = repeat_realization(&ss, n).unwrap();
        let rep_maps: Vec<AffineMap> = (0..n).flat_map(|_| maps.iter().cloned()).collect();
        let Ok(rfp) = fixed_point(&rep, &rep_maps) else {
            return Err(TestCaseError::reject("repetition singular"));
        };
        let kron = |v: &Vec<ParamRat>| (0..n).flat_map(|_| v.iter().cloned()).collect::<Vec<_>>();
        prop_assert_eq!(&rfp.y, &kron(&fp.y));
        prop_assert_eq!(&rfp.u, &kron(&fp.u));
        prop_assert_eq!(&rfp.x, &fp.x);
        Ok(())
    })
}

pub fn conjugation_swaps_the_fixed_point(runner: &mut TestRunner) -> Outcome {
    run(runner, (with_subset(3, 2), affine_maps(2)), |((ss, kappa), maps)| {
        prop_assume!(invertible_block(&ss, &kappa));
        let maps = &maps[..ss.oracles()];
        let Ok(fp) = fixed_point(&ss, maps) else {
            return Err(TestCaseError::reject("no unique fixed point"));
        };
        let conj = partial_inverse(&ss, &kappa).unwrap();
        let conj_maps: Vec<AffineMap> = maps
            .iter()
            .enumerate()
            .map(|(i, m)| if kappa.contains(&i) { inverse_map(m) } else { m.clone() })
            .collect();
        let cfp = fixed_point(&conj, &conj_maps).unwrap();
        for i in 0..ss.oracles() {
            let (y, u) = if kappa.contains(&i) {
                (&fp.u[i], &fp.y[i])
            } else {
                (&fp.y[i], &fp.u[i])
            };
            prop_assert_eq!(&cfp.y[i], y);
            prop_assert_eq!(&cfp.u[i], u);
        }
        prop_assert_eq!(&cfp.x, &fp.x);
        Ok(())
    })
}

fn oracles_for(ss: &StateSpace, seed: u64, dim: usize) -> Vec<AffineOracle> {
    Problem::new(seed, dim).unwrap().oracles(&ss.ports).unwrap()
}

fn no_params() -> BTreeMap<String, BigRational> {
    BTreeMap::new()
}

pub fn repetition_interleaves_oracle_calls(runner: &mut TestRunner) -> Outcome {
    run(runner, (realization(3, 2), 0u64..1000, 1usize..=2), |(ss, seed, dim)| {
        let oracles = oracles_for(&ss, seed, dim);
        let x0 = Problem::new(seed, dim).unwrap().initial_state(ss.states(), "x0");
        let single = NumericRealization::new(&ss, &no_params()).unwrap();
        let Ok(ta) = single.simulate(&oracles, &x0, 6) else {
            return Err(TestCaseError::reject("singular step"));
        };
        let rep = NumericRealization::new(&repeat_realization(&ss, 2).unwrap(), &no_params()).unwrap();
        let rep_oracles = Problem::new(seed, dim)
            .unwrap()
            .oracles(&repeat_realization(&ss, 2).unwrap().ports)
            .unwrap();
        let tc = rep.simulate(&rep_oracles, &x0, 3).unwrap();
        let m = ss.oracles();
        for k in 0..3 {
            for r in 0..2 {
                for i in 0..m {
                    prop_assert_eq!(&tc.y[k][r * m + i], &ta.y[2 * k + r][i]);
                    prop_assert_eq!(&tc.u[k][r * m + i], &ta.u[2 * k + r][i]);
                }
            }
        }
        Ok(())
    })
}

pub fn conjugate_swaps_oracle_sequences(runner: &mut TestRunner) -> Outcome {
    run(runner, (with_subset(3, 2), 0u64..1000), |((ss, kappa), seed)| {
        prop_assume!(invertible_block(&ss, &kappa));
        let problem = Problem::new(seed, 1).unwrap();
        let oracles = problem.oracles(&ss.ports).unwrap();
        let x0 = problem.initial_state(ss.states(), "x0");
        let Ok(ta) = NumericRealization::new(&ss, &no_params()).unwrap().simulate(&oracles, &x0, 5) else {
            return Err(TestCaseError::reject("singular step"));
        };
        let conj = partial_inverse(&ss, &kappa).unwrap();
        let conj_oracles = problem.oracles(&conj.ports).unwrap();
        let tb = NumericRealization::new(&conj, &no_params())
            .unwrap()
            .simulate(&conj_oracles, &x0, 5)
            .unwrap();
        for k in 0..5 {
            for i in 0..ss.oracles() {
                let (y, u) = if kappa.contains(&i) {
                    (&ta.u[k][i], &ta.y[k][i])
                } else {
                    (&ta.y[k][i], &ta.u[k][i])
                };
                prop_assert_eq!(&tb.y[k][i], y);
                prop_assert_eq!(&tb.u[k][i], u);
            }
        }
        prop_assert_eq!(&tb.x, &ta.x);
        Ok(())
    })
}

/// Every property, by name.
pub fn suites() -> Vec<(&'static str, Property)> {
    vec![
        (
            "transfer_is_invariant_under_state_transforms",
            transfer_is_invariant_under_state_transforms,
        ),
        ("sweep_is_an_involution", sweep_is_an_involution),
        ("sweeps_commute", sweeps_commute),
        (
            "conjugation_and_cyclic_permutation_commute",
            conjugation_and_cyclic_permutation_commute,
        ),
        (
            "cyclic_permutation_agrees_with_its_transfer_form",
            cyclic_permutation_agrees_with_its_transfer_form,
        ),
        ("delays_keep_entries_proper", delays_keep_entries_proper),
        ("equal_delays_change_nothing", equal_delays_change_nothing),
        ("partial_inverse_twice_is_identity", partial_inverse_twice_is_identity),
        ("fixed_points_move_with_the_state", fixed_points_move_with_the_state),
        ("repetition_repeats_the_fixed_point", repetition_repeats_the_fixed_point),
        ("conjugation_swaps_the_fixed_point", conjugation_swaps_the_fixed_point),
        ("repetition_interleaves_oracle_calls", repetition_interleaves_oracle_calls),
        ("conjugate_swaps_oracle_sequences", conjugate_swaps_oracle_sequences),
    ]
}
