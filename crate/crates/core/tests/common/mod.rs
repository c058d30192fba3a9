#![allow(dead_code)]

pub mod props;

use std::collections::BTreeMap;
use std::path::PathBuf;

use algokin::dsl::{parse_algorithm, Mode};
use algokin::equivalence::CompiledAlgorithm;
use algokin::library::Library;
use algokin::symbolic::matz::reorder;
use algokin::symbolic::{param_substitute, parse_matrix, parse_ratz, MatRatZ, ParamRat};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn library_path(id: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("library").join(format!("{id}.alg"))
}

/// A library entry (by id) or a test fixture (by `.alg` file name).
pub fn load(name: &str, mode: Mode) -> CompiledAlgorithm {
    let def = if name.ends_with(".alg") {
        parse_algorithm(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
    } else {
        Library::builtin()
            .get(name)
            .unwrap_or_else(|| panic!("no library entry {name}"))
            .def
            .clone()
    };
    CompiledAlgorithm::new(def, mode).unwrap()
}

/// The transfer matrix with channels listed in `labels` order.
pub fn in_order(alg: &CompiledAlgorithm, labels: &[&str]) -> MatRatZ {
    let have = alg.ss.labels();
    let perm: Vec<usize> = labels
        .iter()
        .map(|l| {
            have.iter()
                .position(|h| h == l)
                .unwrap_or_else(|| panic!("no channel {l} in {have:?}"))
        })
        .collect();
    reorder(&alg.h, &perm)
}

pub fn substitute(h: &MatRatZ, subs: &[(&str, &str)]) -> MatRatZ {
    let map: BTreeMap<String, ParamRat> = subs
        .iter()
        .map(|(k, v)| (k.to_string(), parse_ratz(v).unwrap().at_infinity()))
        .collect();
    param_substitute(h, &map).unwrap()
}

pub fn matrix(rows: &[&[&str]]) -> MatRatZ {
    parse_matrix(rows).unwrap()
}

/// One displayed transfer matrix and the algorithm that should produce it.
pub struct Golden {
    pub id: &'static str,
    pub source: &'static str,
    pub mode: Mode,
    /// Channel order of the display, when it differs from call order.
    pub order: Option<&'static [&'static str]>,
    pub subs: &'static [(&'static str, &'static str)],
    pub rows: &'static [&'static [&'static str]],
}

impl Golden {
    pub fn computed(&self) -> MatRatZ {
        let alg = load(self.source, self.mode);
        let h = match self.order {
            Some(o) => in_order(&alg, o),
            None => alg.h.clone(),
        };
        substitute(&h, self.subs)
    }

    pub fn expected(&self) -> MatRatZ {
        matrix(self.rows)
    }
}

const F: Mode = Mode::Functional;
const BB: Mode = Mode::BlackBox;

const SPLIT_H5: &[&[&str]] = &[&["-1/(z-1)", "1/(z-1)"], &["(2*z-1)/(z-1)", "-1/(z-1)"]];
const SPLIT_H6: &[&[&str]] = &[&["-1/(z-1)", "z/(z-1)"], &["(2*z-1)/(z*(z-1))", "-1/(z-1)"]];
const DR_FUNCTIONAL: &[&[&str]] = &[&["-t*z/(z-1)", "-t/(z-1)"], &["t*(1-2*z)/(z-1)", "-t*z/(z-1)"]];

pub fn goldens() -> Vec<Golden> {
    vec![
        Golden {
            id: "extrapolated gradient",
            source: "gradient-extrapolated",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["(-2*z+1)/(10*(z-1)^2)"]],
        },
        Golden {
            id: "two-state gradient",
            source: "gradient-two-state",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["(-2*z+1)/(10*(z-1)^2)"]],
        },
        Golden {
            id: "reparameterized gradient",
            source: "gradient-reparameterized",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-1/(5*(z-1))"]],
        },
        Golden {
            id: "fixed-step gradient",
            source: "gradient-fixed-step",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-1/(5*(z-1))"]],
        },
        Golden {
            id: "opaque splitting",
            source: "splitting-black-box",
            mode: BB,
            order: None,
            subs: &[],
            rows: SPLIT_H5,
        },
        Golden {
            id: "opaque splitting, reordered",
            source: "splitting-black-box-reordered",
            mode: BB,
            order: Some(&["proxf", "proxg"]),
            subs: &[],
            rows: SPLIT_H6,
        },
        Golden {
            id: "triple momentum",
            source: "triple-momentum",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-α*((η+1)*z - η)/((z-1)*(z-β))"]],
        },
        Golden {
            id: "opaque splitting, rotated once",
            source: "splitting-rotated-1.alg",
            mode: BB,
            order: Some(&["proxf", "proxg"]),
            subs: &[],
            rows: SPLIT_H6,
        },
        Golden {
            id: "opaque splitting, rotated twice",
            source: "splitting-rotated-2.alg",
            mode: BB,
            order: None,
            subs: &[],
            rows: SPLIT_H5,
        },
        Golden {
            id: "opaque Douglas-Rachford",
            source: "douglas-rachford",
            mode: BB,
            order: None,
            subs: &[],
            rows: SPLIT_H5,
        },
        Golden {
            id: "opaque simplified ADMM",
            source: "simplified-admm",
            mode: BB,
            order: Some(&["prox_f", "prox_g"]),
            subs: &[],
            rows: SPLIT_H6,
        },
        Golden {
            id: "gradient",
            source: "gradient",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-t/(z-1)"]],
        },
        Golden {
            id: "two gradient steps",
            source: "gradient-twice",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-t/(z-1)", "-t/(z-1)"], &["-t*z/(z-1)", "-t/(z-1)"]],
        },
        Golden {
            id: "proximal gradient",
            source: "proximal-gradient",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["-t/(z-1)", "-t/(z-1)"], &["-t*z/(z-1)", "-t*z/(z-1)"]],
        },
        Golden {
            id: "conjugate proximal gradient",
            source: "proximal-gradient-conjugate",
            mode: F,
            order: None,
            subs: &[],
            rows: &[&["0", "1/z"], &["-1", "-(z-1)/(t*z)"]],
        },
        Golden {
            id: "Chambolle-Pock",
            source: "chambolle-pock",
            mode: F,
            order: None,
            subs: &[],
            rows: &[
                &[
                    "-τ*z*(z-1)/(2*σ*τ*z - σ*τ + z^2 - 2*z + 1)",
                    "σ*τ*z/(2*σ*τ*z - σ*τ + z^2 - 2*z + 1)",
                ],
                &[
                    "σ*τ*z*(1-2*z)/(2*σ*τ*z - σ*τ + z^2 - 2*z + 1)",
                    "-σ*z*(z-1)/(2*σ*τ*z - σ*τ + z^2 - 2*z + 1)",
                ],
            ],
        },
        Golden {
            id: "Chambolle-Pock, τ = t, σ = 1/t",
            source: "chambolle-pock",
            mode: F,
            order: None,
            subs: &[("τ", "t"), ("σ", "1/t")],
            rows: &[&["t*(1-z)/z", "1/z"], &["(1-2*z)/z", "(1-z)/(t*z)"]],
        },
        Golden {
            id: "Douglas-Rachford",
            source: "douglas-rachford",
            mode: F,
            order: None,
            subs: &[],
            rows: DR_FUNCTIONAL,
        },
        Golden {
            id: "conjugate ADMM, ρ = t",
            source: "admm-conjugate",
            mode: F,
            order: None,
            subs: &[("ρ", "t")],
            rows: &[&["-z/(t*(z-1))", "(2*z-1)/(t*z*(z-1))"], &["z/(t*(z-1))", "-z/(t*(z-1))"]],
        },
        Golden {
            id: "simplified ADMM, ρ = 1/t",
            source: "simplified-admm",
            mode: F,
            order: Some(&["prox_f", "prox_g"]),
            subs: &[("ρ", "1/t")],
            rows: &[&["-t*z/(z-1)", "-t*z/(z-1)"], &["(t-2*t*z)/(z*(z-1))", "-t*z/(z-1)"]],
        },
    ]
}
