//! Reference algorithms with metadata, and search of an input algorithm
//! against them.
//!
//! A library is a directory holding one `NAME.alg` source per entry and an
//! optional `NAME.meta.json` sidecar with aliases, citations and tags.

use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::dsl::{parse_algorithm, AlgorithmDef, Mode};
use crate::equivalence::{check_all, check_repetition, CompiledAlgorithm, RelationReport, Verdict};
use crate::error::{Error, Result};

/// Environment variable naming a library directory.
pub const LIBRARY_ENV: &str = "ALGOKIN_LIBRARY";

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Meta {
    pub aliases: Vec<String>,
    pub citations: Vec<String>,
    pub tags: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct LibraryEntry {
    /// File stem.
    pub id: String,
    pub def: AlgorithmDef,
    pub meta: Meta,
    pub compiled: CompiledAlgorithm,
}

#[derive(Clone, Debug, Default)]
pub struct Library {
    pub entries: Vec<LibraryEntry>,
}

macro_rules! builtin {
    ($($id:literal),* $(,)?) => {
        &[$(($id,
            include_str!(concat!("../library/", $id, ".alg")),
            include_str!(concat!("../library/", $id, ".meta.json")))),*]
    };
}

const BUILTIN: &[(&str, &str, &str)] = builtin![
    "admm",
    "admm-conjugate",
    "arrow-hurwicz",
    "branching-splitting",
    "chambolle-pock",
    "douglas-rachford",
    "extrapolation-from-past",
    "gradient",
    "gradient-extrapolated",
    "gradient-fixed-step",
    "gradient-reparameterized",
    "gradient-twice",
    "gradient-two-state",
    "optimistic-mirror-descent",
    "proximal-gradient",
    "proximal-gradient-conjugate",
    "reflected-gradient",
    "simplified-admm",
    "splitting-black-box",
    "splitting-black-box-reordered",
    "triple-momentum",
];

fn entry(id: &str, src: &str, meta: Option<&str>) -> Result<LibraryEntry> {
    let wrap = |e: Error| Error::Library {
        entry: id.to_string(),
        message: e.to_string(),
    };
    let def = parse_algorithm(src).map_err(wrap)?;
    let meta = match meta {
        Some(m) => serde_json::from_str(m).map_err(|e| Error::Library {
            entry: id.to_string(),
            message: format!("metadata: {e}"),
        })?,
        None => Meta::default(),
    };
    let compiled = CompiledAlgorithm::new(def.clone(), Mode::Functional).map_err(wrap)?;
    Ok(LibraryEntry {
        id: id.to_string(),
        def,
        meta,
        compiled,
    })
}

impl Library {
    /// The library shipped with the crate.
    pub fn builtin() -> Library {
        Library {
            entries: BUILTIN
                .iter()
                .map(|(id, src, meta)| entry(id, src, Some(meta)).expect("shipped library entry compiles"))
                .collect(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&LibraryEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads every `*.alg` file of `dir` in file-name order.
pub fn load_library(dir: &Path) -> Result<Library> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "alg"))
        .collect();
    paths.sort();
    let mut entries = Vec::with_capacity(paths.len());
    for p in paths {
        let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let src = std::fs::read_to_string(&p).map_err(|e| Error::Library {
            entry: p.display().to_string(),
            message: e.to_string(),
        })?;
        let meta_path = p.with_extension("meta.json");
        let meta = match std::fs::read_to_string(&meta_path) {
            Ok(m) => Some(m),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(Error::Io(format!("{}: {e}", meta_path.display()))),
        };
        let file = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
        entries.push(entry(&id, &src, meta.as_deref()).map_err(|e| match e {
            Error::Library { message, .. } => Error::Library { entry: file, message },
            e => e,
        })?);
    }
    Ok(Library { entries })
}

/// The library named by `dir`, else by [`LIBRARY_ENV`], else the built-in one.
pub fn resolve_library(dir: Option<&Path>) -> Result<Library> {
    match dir {
        Some(d) => load_library(d),
        None => match std::env::var_os(LIBRARY_ENV) {
            Some(d) if !d.is_empty() => load_library(Path::new(&d)),
            _ => Ok(Library::builtin()),
        },
    }
}

#[derive(Clone, Debug)]
pub struct SearchHit {
    pub entry_id: String,
    pub entry_name: String,
    pub aliases: Vec<String>,
    pub citations: Vec<String>,
    pub report: RelationReport,
}

impl SearchHit {
    pub fn to_json(&self) -> Value {
        json!({
            "entry": self.entry_id,
            "name": self.entry_name,
            "aliases": self.aliases,
            "citations": self.citations,
            "report": self.report.to_json(),
        })
    }
}

/// Every relation between `input` and each entry, including an input that
/// repeats an entry, ranked by verdict priority, then fully solved before
/// conditional, then number of conditions, then entry id.
pub fn search(input: &CompiledAlgorithm, library: &Library, mode: Mode, max_repeat: usize) -> Result<Vec<SearchHit>> {
    let mut hits = Vec::new();
    for e in &library.entries {
        let target = match mode {
            Mode::Functional => e.compiled.clone(),
            Mode::BlackBox => CompiledAlgorithm::new(e.def.clone(), mode)?,
        };
        let reverse = check_repetition(&target, input, max_repeat);
        let reverse = (reverse.verdict == Verdict::Repetition).then_some(reverse);
        for report in check_all(input, &target, max_repeat).into_iter().chain(reverse) {
            hits.push(SearchHit {
                entry_id: e.id.clone(),
                entry_name: e.def.name.clone(),
                aliases: e.meta.aliases.clone(),
                citations: e.meta.citations.clone(),
                report,
            });
        }
    }
    hits.sort_by(|x, y| {
        let key = |h: &SearchHit| (h.report.verdict, !h.report.condition.verified, h.report.conditions().len());
        key(x).cmp(&key(y)).then_with(|| x.entry_id.cmp(&y.entry_id))
    });
    Ok(hits)
}
