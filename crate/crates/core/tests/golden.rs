mod common;

use std::collections::BTreeSet;

use algokin::dsl::Mode;
use algokin::library::Library;
use algokin::symbolic::mat_equal;
use algokin::symbolic::matz::to_strings;
use common::{goldens, load, matrix};

#[test]
fn displayed_transfer_matrices() {
    for g in goldens() {
        let (got, want) = (g.computed(), g.expected());
        assert!(
            mat_equal(&got, &want),
            "{}: got {:?}, want {:?}",
            g.id,
            to_strings(&got),
            to_strings(&want)
        );
        assert_eq!(to_strings(&got), to_strings(&want), "{}: canonical print differs", g.id);
    }
}

const WITHOUT_DISPLAY: &[&str] = &[
    "admm",
    "arrow-hurwicz",
    "branching-splitting",
    "extrapolation-from-past",
    "optimistic-mirror-descent",
    "reflected-gradient",
];

#[test]
fn every_library_display_is_covered() {
    let all = goldens();
    let ids: BTreeSet<&str> = all.iter().map(|g| g.id).collect();
    assert_eq!(ids.len(), all.len());
    let sources: BTreeSet<&str> = all.iter().map(|g| g.source).collect();
    for e in &Library::builtin().entries {
        assert!(WITHOUT_DISPLAY.contains(&e.id.as_str()) || sources.contains(e.id.as_str()), "{} has no golden", e.id);
    }
}

#[test]
fn swapped_independent_branches_keep_transfer() {
    let a = load("branching-splitting", Mode::BlackBox);
    let b = load("branching-swapped.alg", Mode::BlackBox);
    let order = ["gradf", "gradg", "gradh", "proxf"];
    assert!(mat_equal(&common::in_order(&a, &order), &common::in_order(&b, &order)));
}

#[test]
fn three_gradient_steps() {
    let h = load("gradient-thrice.alg", Mode::Functional).h;
    let want = matrix(&[
        &["-t/(z-1)", "-t/(z-1)", "-t/(z-1)"],
        &["-t*z/(z-1)", "-t/(z-1)", "-t/(z-1)"],
        &["-t*z/(z-1)", "-t*z/(z-1)", "-t/(z-1)"],
    ]);
    assert!(mat_equal(&h, &want), "{:?}", to_strings(&h));
}
