use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kreg_core::growth::{
    check_upper_growth, estimate_growth, estimate_growth_rep, verify_theorem, BoundSettings,
    DEFAULT_HORIZON,
};
use kreg_core::jsr::{
    branch_and_bound, compare_representations, scaled_norm_refine, BnbOptions, MatrixSet,
};
use kreg_core::kernel::{guess_regular, GuessBudget};
use kreg_core::rep::catalog_entries;
use kreg_core::witness::{build_witness, length_bound_check, WitnessOptions};
use kreg_core::{catalog, Error, LinearRep, NormKind, Scalar, SequenceOracle};

/// Exact tools for k-regular sequences: evaluation, kernel guessing, joint
/// spectral radius brackets, growth estimates and witness families.
///
/// Exit status: 0 on success, 1 when a check fails, 2 on usage or input errors.
#[derive(Parser, Debug)]
#[command(name = "kreg", version)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a representation at one index or on a prefix.
    Eval {
        #[command(flatten)]
        source: RepSource,
        /// Index to evaluate (arbitrary precision).
        #[arg(long, conflicts_with = "count")]
        n: Option<String>,
        /// Print f(0), ..., f(count - 1).
        #[arg(long)]
        count: Option<u64>,
    },
    /// Guess a basis representation from a term file.
    Guess {
        /// Term file: one integer or p/q per line, starting at n = 0.
        #[arg(long)]
        oracle: PathBuf,
        #[arg(long)]
        k: u32,
        /// Largest kernel depth to scan (default: as deep as the terms allow).
        #[arg(long)]
        max_depth: Option<u32>,
        /// Truncation length of kernel vectors (default: k^(depth+1)).
        #[arg(long)]
        trunc: Option<u64>,
        /// Also write the representation file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bracket the joint spectral radius of a matrix set.
    Jsr {
        /// Representation file or a bare JSON array of square matrices.
        #[arg(long, conflicts_with_all = ["catalog", "x"], required_unless_present = "catalog")]
        rep: Option<PathBuf>,
        #[arg(long)]
        catalog: Option<String>,
        #[arg(long, requires = "catalog")]
        x: Option<String>,
        /// Target bracket width.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Branch-and-bound node budget.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Longest product length for the lower-bound search.
        #[arg(long, default_value_t = 12)]
        m_max: usize,
        #[arg(long, value_enum, default_value_t = NormArg::RowSum)]
        norm: NormArg,
    },
    /// Estimate the growth exponent from representation terms or a term file.
    Growth {
        #[command(flatten)]
        source: OptRepSource,
        /// Term file, instead of a representation.
        #[arg(long, conflicts_with_all = ["rep", "catalog"])]
        oracle: Option<PathBuf>,
        /// Number of terms (default 2^20, or the whole term file).
        #[arg(long)]
        horizon: Option<u64>,
        /// Also report c_emp = max |f(n)| / n^(log_k(ub + eps)); fails when the
        /// maximiser sits in the last quarter of the horizon.
        #[arg(long, requires = "eps")]
        upper: bool,
        #[arg(long)]
        eps: Option<f64>,
        /// JSR bracket width used by --upper.
        #[arg(long, default_value_t = 1e-3)]
        jsr_tol: f64,
        /// Branch-and-bound node budget used by --upper.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// Check that the growth estimate lies within tol of log_k of the JSR bracket.
    Verify {
        #[command(flatten)]
        source: RepSource,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: u64,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long, default_value_t = 1e-3)]
        jsr_tol: f64,
        /// Branch-and-bound node budget.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        /// Run on a spanning-set representation instead of refusing it.
        #[arg(long)]
        allow_spanning: bool,
    },
    /// Build the witness family N(n) with |f(N(n))| >= c (rho - eps)^n.
    Witness {
        #[command(flatten)]
        source: RepSource,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Largest cycle repetition checked.
        #[arg(long, default_value_t = 20)]
        n: u32,
        /// Longest cycle word searched.
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        /// Word budget for the spanning-word and expansion searches.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// Seed for probe vectors.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare JSR brackets of a basis and a spanning representation of one sequence.
    Compare {
        #[arg(long, required_unless_present = "basis_catalog")]
        basis: Option<PathBuf>,
        #[arg(long, conflicts_with = "basis")]
        basis_catalog: Option<String>,
        #[arg(long, required_unless_present = "spanning_catalog")]
        spanning: Option<PathBuf>,
        #[arg(long, conflicts_with = "spanning")]
        spanning_catalog: Option<String>,
        /// Parameter for catalog entries that take one.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
    },
    /// List built-in representations, or print one as a representation file.
    Catalog {
        #[arg(long)]
        name: Option<String>,
        #[arg(long, requires = "name")]
        x: Option<String>,
    },
}

#[derive(Args, Debug)]
struct RepSource {
    /// Representation file (JSON).
    #[arg(long, required_unless_present = "catalog", conflicts_with = "catalog")]
    rep: Option<PathBuf>,
    /// Built-in representation name.
    #[arg(long)]
    catalog: Option<String>,
    /// Parameter for catalog entries that take one.
    #[arg(long, requires = "catalog")]
    x: Option<String>,
}

#[derive(Args, Debug)]
struct OptRepSource {
    #[arg(long, conflicts_with = "catalog")]
    rep: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long, requires = "catalog")]
    x: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum NormArg {
    RowSum,
    ColSum,
    Frobenius,
    /// Row sums under diagonal weights fitted by coordinate descent.
    Scaled,
}

/// A finished command: the report and whether its check passed.
struct Outcome {
    report: Value,
    pass: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, pass: true }
    }
}

fn parse_x(x: &Option<String>) -> anyhow::Result<Option<Scalar>> {
    x.as_deref()
        .map(|s| s.parse::<Scalar>().map_err(|e| anyhow!("--x: {e}")))
        .transpose()
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_rep(
    rep: &Option<PathBuf>,
    name: &Option<String>,
    x: &Option<String>,
) -> anyhow::Result<LinearRep> {
    match (rep, name) {
        (Some(path), _) => LinearRep::from_json(&read(path)?)
            .with_context(|| format!("parsing {}", path.display())),
        (None, Some(name)) => Ok(catalog(name, parse_x(x)?)?),
        (None, None) => Err(anyhow!("one of --rep or --catalog is required")),
    }
}

fn load_oracle(path: &Path) -> anyhow::Result<SequenceOracle> {
    SequenceOracle::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn to_value<T: serde::Serialize>(t: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(t)?)
}

fn bnb(budget: u64, set: &MatrixSet, m_max: usize, norm: NormArg) -> BnbOptions {
    let kind = match norm {
        NormArg::RowSum => NormKind::RowSum,
        NormArg::ColSum => NormKind::ColSum,
        NormArg::Frobenius => NormKind::Frobenius,
        NormArg::Scaled => scaled_norm_refine(set, 40).0,
    };
    BnbOptions {
        max_nodes: budget,
        lower_depth: m_max,
        kind,
        ..BnbOptions::default()
    }
}

fn settings(tol: f64, budget: u64) -> BoundSettings {
    BoundSettings {
        tol,
        bnb: BnbOptions {
            max_nodes: budget,
            ..BnbOptions::default()
        },
    }
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Eval { source, n, count } => {
            let rep = load_rep(&source.rep, &source.catalog, &source.x)?;
            match (n, count) {
                (Some(n), _) => {
                    let big = n
                        .parse()
                        .map_err(|_| anyhow!("--n: expected a non-negative integer, got {n:?}"))?;
                    Ok(Outcome::ok(json!({ "n": n, "value": rep.eval_big(&big) })))
                }
                (None, Some(c)) => Ok(Outcome::ok(
                    json!({ "count": c, "values": rep.eval_prefix(c) }),
                )),
                (None, None) => Err(anyhow!("one of --n or --count is required")),
            }
        }
        Command::Guess {
            oracle,
            k,
            max_depth,
            trunc,
            out,
        } => {
            let oracle = load_oracle(&oracle)?;
            let report = guess_regular(
                &oracle,
                k,
                GuessBudget {
                    max_depth,
                    trunc_len: trunc,
                },
            );
            if let (Some(path), Some(rep)) = (&out, &report.rep) {
                let text = serde_json::to_string_pretty(rep)?;
                std::fs::write(path, text + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(Outcome {
                pass: report.found,
                report: to_value(&report)?,
            })
        }
        Command::Jsr {
            rep,
            catalog: name,
            x,
            tol,
            budget,
            m_max,
            norm,
        } => {
            let set = match (&rep, &name) {
                (Some(path), _) => MatrixSet::from_json(&read(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
                _ => MatrixSet::from_rep(&load_rep(&None, &name, &x)?),
            };
            let bracket = branch_and_bound(&set, tol, &bnb(budget, &set, m_max, norm))?;
            Ok(Outcome::ok(to_value(&bracket)?))
        }
        Command::Growth {
            source,
            oracle,
            horizon,
            upper,
            eps,
            jsr_tol,
            budget,
        } => {
            if let Some(path) = oracle {
                if upper {
                    return Err(anyhow!("--upper needs a representation"));
                }
                let oracle = load_oracle(&path)?;
                let est = estimate_growth(&oracle, horizon.unwrap_or(oracle.horizon()))?;
                return Ok(Outcome::ok(to_value(&est)?));
            }
            let rep = load_rep(&source.rep, &source.catalog, &source.x)?;
            let horizon = horizon.unwrap_or(DEFAULT_HORIZON);
            let est = estimate_growth_rep(&rep, horizon)?;
            if !upper {
                return Ok(Outcome::ok(to_value(&est)?));
            }
            let eps = eps.expect("clap requires --eps with --upper");
            let report = check_upper_growth(&rep, eps, horizon, &settings(jsr_tol, budget))?;
            Ok(Outcome {
                pass: report.stable,
                report: json!({ "estimate": est, "upper": report }),
            })
        }
        Command::Verify {
            source,
            horizon,
            tol,
            jsr_tol,
            budget,
            allow_spanning,
        } => {
            let rep = load_rep(&source.rep, &source.catalog, &source.x)?;
            let report = verify_theorem(
                &rep,
                horizon,
                tol,
                &settings(jsr_tol, budget),
                allow_spanning,
            )?;
            Ok(Outcome {
                pass: report.pass,
                report: to_value(&report)?,
            })
        }
        Command::Witness {
            source,
            eps,
            n,
            m_max,
            budget,
            seed,
        } => {
            let rep = load_rep(&source.rep, &source.catalog, &source.x)?;
            let family = build_witness(
                &rep,
                eps,
                n,
                &WitnessOptions {
                    m_max,
                    budget,
                    seed,
                },
            )?;
            let bound = length_bound_check(&family, rep.k())?;
            let pass = family.pass && bound.pass;
            Ok(Outcome {
                pass,
                report: json!({ "family": family, "length_bound": bound }),
            })
        }
        Command::Compare {
            basis,
            basis_catalog,
            spanning,
            spanning_catalog,
            x,
            tol,
            budget,
        } => {
            let b = load_rep(&basis, &basis_catalog, &x)?;
            let s = load_rep(&spanning, &spanning_catalog, &x)?;
            let opts = BnbOptions {
                max_nodes: budget,
                ..BnbOptions::default()
            };
            match compare_representations(&b, &s, tol, &opts) {
                Ok(report) => Ok(Outcome {
                    pass: report.consistent,
                    report: to_value(&report)?,
                }),
                Err(Error::RepresentationsDisagree(n)) => Ok(Outcome {
                    pass: false,
                    report: json!({ "consistent": false, "disagree_at": n }),
                }),
                Err(e) => Err(e.into()),
            }
        }
        Command::Catalog {
            name: Some(name),
            x,
        } => {
            let rep = catalog(&name, parse_x(&x)?)?;
            Ok(Outcome::ok(serde_json::from_str(&rep.to_json())?))
        }
        Command::Catalog { name: None, .. } => {
            let entries: Vec<Value> = catalog_entries()
                .iter()
                .map(|e| json!({ "label": e.label(), "description": e.description }))
                .collect();
            Ok(Outcome::ok(Value::Array(entries)))
        }
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flattens a report into `path  value` lines.
fn render_text(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |key: &str| {
        if prefix.is_empty() {
            key.to_string()
        } else {
            format!("{prefix}.{key}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                render_text(&join(k), child, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let line = items.iter().map(scalar_text).collect::<Vec<_>>().join(" ");
            out.push((prefix.to_string(), format!("[{line}]")));
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                render_text(&join(&i.to_string()), child, out);
            }
        }
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

fn emit(report: &Value, format: Format) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(report).expect("reports serialize")
        ),
        Format::Text => {
            // single-value reports print just the value
            if let Some(v) = report
                .get("value")
                .filter(|_| report.as_object().is_some_and(|m| m.len() == 2))
            {
                println!("{}", scalar_text(v));
                return;
            }
            let mut rows = Vec::new();
            match report.as_array() {
                Some(items) if items.iter().all(|i| i.get("label").is_some()) => {
                    for i in items {
                        rows.push((
                            scalar_text(&i["label"]),
                            i.get("description").map(scalar_text).unwrap_or_default(),
                        ));
                    }
                }
                _ => render_text("", report, &mut rows),
            }
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in rows {
                println!("{k:<width$}  {v}");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => {
            emit(&outcome.report, cli.format);
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
