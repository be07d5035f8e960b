//! `wco`: JSON reports on weighted composition operators.
//!
//! Exit codes: 0 when every requested theorem-invariant holds, 2 when one is
//! violated, 1 on input errors.

mod aluthge;
mod input;
mod report;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use wco::agreement::Tolerances;
use wco::gallery::{self, FAMILIES};
use wco::properties::{self, CheckKind};

use input::{parse_list, parse_number, parse_params, CliError, Input, InputArgs};

#[derive(Parser, Debug)]
#[command(name = "wco", version, about = "Weighted composition operators: criteria, Aluthge transforms and oracle checks")]
struct Cli {
    /// Write the JSON output here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run checks on a space, a gallery family window or random spaces.
    Report {
        #[command(flatten)]
        input: InputArgs,
        /// Check to run, repeatable; all checks when omitted.
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<CheckKind>,
        #[arg(long, default_value = "1")]
        p: String,
        /// Defaults to p/2.
        #[arg(long)]
        q: Option<String>,
        #[arg(long, default_value = "1/2")]
        alpha: String,
        /// Rational arithmetic for quasinormality and fixed points.
        #[arg(long)]
        exact: bool,
    },
    /// The Aluthge weight, its Radon-Nikodym derivative, the perp set and the closedness verdict.
    Aluthge {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "1/2")]
        alpha: String,
        #[arg(long)]
        exact: bool,
    },
    /// Compare the pointwise formulas with the dense-matrix oracle.
    Oracle {
        #[command(flatten)]
        input: InputArgs,
        /// Hermitian matrix (nested [re, im] pairs) to diagonalize.
        #[arg(long, value_name = "FILE")]
        matrix: Option<PathBuf>,
        #[arg(long = "alpha", default_value = "1/4,1/2,3/4,1")]
        alphas: String,
        #[arg(long = "p", default_value = "1/4,1/2,1,2")]
        ps: String,
    },
    /// Example families.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    List,
    Build {
        name: String,
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        #[arg(long, default_value_t = 8)]
        window: u64,
    },
}

enum Outcome {
    Ok(Value),
    Violation(Value),
    Failed(Value),
}

fn tolerance_from_env() -> Result<Option<f64>, CliError> {
    match std::env::var("WCO_TOL") {
        Ok(s) => {
            let t: f64 = s.trim().parse().map_err(|_| CliError::Usage(format!("WCO_TOL={s:?} is not a number")))?;
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("WCO_TOL must be positive, got {t}")));
            }
            Ok(Some(t))
        }
        Err(_) => Ok(None),
    }
}

fn input_seed(input: &Input) -> u64 {
    match input {
        Input::Random { seed, .. } => *seed,
        _ => 0,
    }
}

fn execute(command: Command) -> Result<Outcome, CliError> {
    let override_tol = tolerance_from_env()?;
    if let Some(t) = override_tol {
        properties::set_tolerance(t);
    }
    let started = Instant::now();
    match command {
        Command::Report { input, checks, p, q, alpha, exact } => {
            let p = parse_number("p", &p)?;
            let q = match q {
                Some(q) => parse_number("q", &q)?,
                None => {
                    let half = &p.exact / num_rational::BigRational::from_integer(2.into());
                    parse_number("q", &half.to_string())?
                }
            };
            let nums = report::Numbers { p, q, alpha: parse_number("alpha", &alpha)?, exact };
            let input = input.load(false)?.expect("input required");
            let checks = if checks.is_empty() { CheckKind::ALL.to_vec() } else { checks };
            let entries = report::run(&input, &checks, &nums);
            let mut violated = entries.iter().any(|e| e.violation);
            let seed = input_seed(&input);
            let mut out = json!({
                "command": "report",
                "input": input.describe(),
                "tolerance": properties::tolerance(),
                "seed": seed,
                "results": entries.into_iter().map(|e| e.json).collect::<Vec<_>>(),
                "elapsed_ms": started.elapsed().as_millis() as u64,
            });
            if let Some((block, bad)) = report::oracle_block(&input, &nums, seed) {
                out["oracle"] = block;
                violated |= bad;
            }
            if let Input::Gallery { item, window, .. } = &input {
                if let gallery::GalleryItem::Countable(f) = item {
                    out["certificates"] = f.certificates_json();
                    out["window_points"] = json!(f.window(*window).len());
                }
            }
            Ok(if violated { Outcome::Violation(out) } else { Outcome::Ok(out) })
        }
        Command::Aluthge { input, alpha, exact } => {
            let alpha = parse_number("alpha", &alpha)?;
            let input = input.load(false)?.expect("input required");
            Ok(Outcome::Ok(aluthge::run(&input, &alpha, exact)?))
        }
        Command::Oracle { input, matrix, alphas, ps } => {
            if input.gallery.is_some() {
                return Err(CliError::Usage("the oracle works on finite spaces; use --space or --random".into()));
            }
            let config = input.random_config()?;
            let space = match &input.space {
                Some(path) => Some((path.clone(), input::load_space(path)?)),
                None => None,
            };
            let mut tol = Tolerances::default();
            if let Some(t) = override_tol {
                tol.psd_floor = tol.psd_floor.max(t);
            }
            let args = verify::OracleArgs {
                space: space.as_ref().map(|(p, s)| (p, s)),
                matrix: matrix.as_ref(),
                random: input.random.unwrap_or(0),
                seed: input.seed,
                config,
                alphas: parse_list("alpha", &alphas)?,
                ps: parse_list("p", &ps)?,
                tol,
            };
            let run = verify::run(&args)?;
            let mut out = run.json;
            out["elapsed_ms"] = json!(started.elapsed().as_millis() as u64);
            Ok(if run.errors > 0 {
                Outcome::Failed(out)
            } else if run.violations > 0 {
                Outcome::Violation(out)
            } else {
                Outcome::Ok(out)
            })
        }
        Command::Gallery { action: GalleryAction::List } => Ok(Outcome::Ok(json!({
            "families": FAMILIES.iter().map(|f| json!({
                "name": f.name,
                "description": f.description,
                "params": f.params.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            })).collect::<Vec<_>>(),
        }))),
        Command::Gallery { action: GalleryAction::Build { name, params, window } } => {
            let params: BTreeMap<String, String> = parse_params(&params)?;
            let item = gallery::build(&name, &params)?;
            Ok(Outcome::Ok(item.to_json(window)))
        }
    }
}

fn emit(out: &Option<PathBuf>, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|source| CliError::Write { path: path.clone(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Write { path: "<stdout>".into(), source: e }),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            println!("{}", json!({"error": e.kind().to_string(), "message": e.to_string().trim()}));
            return ExitCode::from(1);
        }
    };
    let (value, code) = match execute(cli.command) {
        Ok(Outcome::Ok(v)) => (v, 0),
        Ok(Outcome::Violation(v)) => (v, 2),
        Ok(Outcome::Failed(v)) => (v, 1),
        Err(e) => {
            eprintln!("wco: {e}");
            (json!({"error": e.to_string()}), 1)
        }
    };
    if let Err(e) = emit(&cli.out, &value) {
        eprintln!("wco: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
