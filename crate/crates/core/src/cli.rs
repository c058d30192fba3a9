use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use algokin::dsl::{parse_algorithm, Mode};
use algokin::equivalence::{
    check_all, check_conjugate, check_conjugate_permutation, check_oracle_equivalent, check_repetition, check_shift_equivalent,
    CompiledAlgorithm, RelationReport, DEFAULT_MAX_REPEAT,
};
use algokin::library::{resolve_library, search};
use algokin::numeric::{simulate, Problem, Trajectory};
use algokin::realization::build_odg;
use algokin::symbolic::matz::to_strings;
use algokin::symbolic::parse_ratz;
use algokin::Error;

const EXIT_OK: i32 = 0;
const EXIT_UNRELATED: i32 = 1;
const EXIT_USAGE: i32 = 2;

const GRAMMAR: &str = "\
algorithm file grammar:
  algorithm \"NAME\" {
    params p1 p2;                      # symbolic parameters
    functions f g;                     # functions the oracles act on
    oracles a = grad(f), b, c = prox(g, t);
    vars x1 x2;                        # state variables
    update x1 <- x1 - t*grad(f)(x2);   # one update per line, in order
  }
oracle forms: grad(f), subgrad(f), prox(f, step), argmin(v, objective),
or a bare name for an opaque oracle. Use f* for the conjugate of f.";

#[derive(Parser)]
#[command(
    name = "algokin",
    version,
    about = "Detect equivalences between linear first-order optimization algorithms"
)]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Treat every oracle as opaque instead of expanding prox and argmin.
    #[arg(long, global = true)]
    black_box: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareMode {
    All,
    Equiv,
    Shift,
    Conj,
    Conjperm,
    Repeat,
}

#[derive(Subcommand)]
enum Command {
    /// Print the state-space realization.
    Parse { file: PathBuf },
    /// Print the transfer matrix, entries in oracle call order.
    Tf { file: PathBuf },
    /// Decide how two algorithms are related.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        mode: CompareMode,
        #[arg(long, default_value_t = DEFAULT_MAX_REPEAT)]
        max_repeat: usize,
    },
    /// Find library algorithms related to the input.
    Search {
        file: PathBuf,
        /// Library directory; defaults to $ALGOKIN_LIBRARY, then the built-in library.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_REPEAT)]
        max_repeat: usize,
    },
    /// Run the algorithm on a random quadratic problem; prints CSV.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Parameter value, e.g. `t=1/5`; repeatable.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
        /// Exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
}

enum Failure {
    Usage(String),
    Parse(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::UnknownSymbol(_) | Error::Nonlinear(_) | Error::DuplicateOracleCall(_) | Error::Invalid(_) => {
                Failure::Parse(e.to_string())
            }
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mode = if cli.black_box { Mode::BlackBox } else { Mode::Functional };
    let mut out = std::io::stdout().lock();
    match execute(&cli, mode, &mut out) {
        Ok(code) => code,
        Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}\n\n{GRAMMAR}");
            EXIT_USAGE
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn compile(path: &Path, mode: Mode) -> std::result::Result<CompiledAlgorithm, Failure> {
    let src = read(path)?;
    let def = parse_algorithm(&src).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    Ok(CompiledAlgorithm::new(def, mode)?)
}

fn emit(out: &mut impl Write, v: &Value) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn execute(cli: &Cli, mode: Mode, out: &mut impl Write) -> Outcome {
    match &cli.command {
        Command::Parse { file } => {
            let alg = compile(file, mode)?;
            if cli.json {
                let odg = build_odg(&alg.ss).ok();
                emit(out, &json!({"realization": alg.ss.dump(), "odg": odg}));
            } else {
                let _ = write!(out, "{}", alg.ss);
            }
            Ok(EXIT_OK)
        }
        Command::Tf { file } => {
            let alg = compile(file, mode)?;
            let labels = alg.ss.labels();
            if cli.json {
                emit(out, &json!({"name": alg.name(), "oracles": labels, "H": to_strings(&alg.h)}));
            } else if alg.h.shape() == (1, 1) {
                let _ = writeln!(out, "{}", alg.h.get(0, 0));
            } else {
                let _ = writeln!(out, "{} (oracles: {})", alg.name(), labels.join(", "));
                for (i, row) in to_strings(&alg.h).iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        let _ = writeln!(out, "  H[{}, {}] = {e}", labels[i], labels[j]);
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Compare {
            a,
            b,
            mode: which,
            max_repeat,
        } => {
            let (a, b) = (compile(a, mode)?, compile(b, mode)?);
            let report: RelationReport = match which {
                CompareMode::All => check_all(&a, &b, *max_repeat)
                    .into_iter()
                    .next()
                    .unwrap_or_else(|| check_oracle_equivalent(&a, &b)),
                CompareMode::Equiv => check_oracle_equivalent(&a, &b),
                CompareMode::Shift => check_shift_equivalent(&a, &b),
                CompareMode::Conj => check_conjugate(&a, &b),
                CompareMode::Conjperm => check_conjugate_permutation(&a, &b),
                CompareMode::Repeat => check_repetition(&a, &b, *max_repeat),
            };
            if cli.json {
                emit(out, &report.to_json());
            } else {
                let _ = write!(out, "{report}");
            }
            Ok(if report.is_related() { EXIT_OK } else { EXIT_UNRELATED })
        }
        Command::Search { file, library, max_repeat } => {
            let input = compile(file, mode)?;
            let lib = resolve_library(library.as_deref())?;
            let hits = search(&input, &lib, mode, *max_repeat)?;
            if cli.json {
                let hits: Vec<Value> = hits.iter().map(|h| h.to_json()).collect();
                emit(out, &json!({"input": input.name(), "library_size": lib.len(), "hits": hits}));
            } else if hits.is_empty() {
                let _ = writeln!(out, "no related algorithms among {} library entries", lib.len());
            } else {
                for (rank, h) in hits.iter().enumerate() {
                    let aka = if h.aliases.is_empty() {
                        String::new()
                    } else {
                        format!(" (also {})", h.aliases.join(", "))
                    };
                    let _ = writeln!(out, "{}. {} [{}]{aka}", rank + 1, h.entry_name, h.entry_id);
                    for line in h.report.to_string().lines() {
                        let _ = writeln!(out, "   {line}");
                    }
                    for c in &h.citations {
                        let _ = writeln!(out, "   see: {c}");
                    }
                }
            }
            Ok(if hits.is_empty() { EXIT_UNRELATED } else { EXIT_OK })
        }
        Command::Simulate {
            file,
            seed,
            iters,
            dim,
            params,
            exact,
        } => {
            let alg = compile(file, mode)?;
            let point = parse_params(params)?;
            if let Some(missing) = alg.ss.params.iter().find(|p| !point.contains_key(*p)) {
                return Err(Failure::Usage(format!(
                    "missing value for parameter `{missing}` (use --param {missing}=VALUE)"
                )));
            }
            let problem = Problem::new(*seed, *dim)?;
            let oracles = problem.oracles(&alg.ss.ports)?;
            let x0 = problem.initial_state(alg.ss.states(), "x0");
            let rows = if *exact {
                table(&simulate::<BigRational>(&alg.ss, &point, &oracles, &x0, *iters)?)
            } else {
                table(&simulate::<f64>(&alg.ss, &point, &oracles, &x0, *iters)?)
            };
            let summary = json!({
                "algorithm": alg.name(),
                "seed": seed,
                "dim": dim,
                "iterations": iters,
                "exact": exact,
                "params": point.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect::<serde_json::Map<_, _>>(),
                "oracles": alg.ss.labels(),
                "states": alg.ss.var_names,
                "initial_state": x0.iter().map(|v| v.iter().map(|q| q.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "final_state": rows.final_state,
            });
            if cli.json {
                let mut s = summary;
                s["csv"] = Value::String(rows.csv);
                emit(out, &s);
            } else {
                let _ = write!(out, "{}", rows.csv);
                eprintln!("{summary}");
            }
            Ok(EXIT_OK)
        }
    }
}

fn parse_params(params: &[String]) -> std::result::Result<BTreeMap<String, BigRational>, Failure> {
    let mut point = BTreeMap::new();
    for p in params {
        let bad = || Failure::Usage(format!("expected NAME=VALUE with a rational VALUE, got `{p}`"));
        let (k, v) = p.split_once('=').ok_or_else(bad)?;
        let value = parse_ratz(v.trim())
            .ok()
            .and_then(|r| r.at_infinity().constant_value())
            .filter(|_| !v.contains('z'))
            .ok_or_else(bad)?;
        point.insert(k.trim().to_string(), value);
    }
    Ok(point)
}

struct Table {
    csv: String,
    final_state: Vec<Vec<String>>,
}

fn table<T: algokin::numeric::Field>(t: &Trajectory<T>) -> Table {
    let dim = t.y.first().and_then(|k| k.first()).map_or(0, Vec::len);
    let mut csv = String::from("iteration,oracle");
    for c in 1..=dim {
        csv.push_str(&format!(",y{c}"));
    }
    for c in 1..=dim {
        csv.push_str(&format!(",u{c}"));
    }
    csv.push('\n');
    for (k, (ys, us)) in t.y.iter().zip(&t.u).enumerate() {
        for (i, label) in t.labels.iter().enumerate() {
            csv.push_str(&format!("{k},{label}"));
            for v in ys[i].iter().chain(&us[i]) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
    }
    let final_state =
        t.x.last()
            .map(|x| x.iter().map(|v| v.iter().map(|q| q.to_string()).collect()).collect())
            .unwrap_or_default();
    Table { csv, final_state }
}
