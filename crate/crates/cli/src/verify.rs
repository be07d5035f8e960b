use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};

use wco::agreement::{compare, Agreement, Tolerances};
use wco::oracle::{sym_eig, DenseMatrix};
use wco::random::random_corpus;
use wco::PointSpace;

use crate::input::{read_json, CliError};

pub struct OracleRun {
    pub json: Value,
    pub errors: usize,
    pub violations: usize,
}

fn space_entry(label: Value, space: &PointSpace, alphas: &[f64], ps: &[f64], seed: u64, tol: &Tolerances) -> (Value, usize, usize) {
    match compare(space, alphas, ps, seed, tol) {
        Ok(a) => {
            let v = a.violations(tol);
            let n = v.len();
            (json!({"input": label, "agreement": a, "violations": v}), 0, usize::from(n > 0))
        }
        Err(e) => (json!({"input": label, "status": "error", "error": e.to_string()}), 1, 0),
    }
}

/// Eigendecomposition of a user matrix; a non-Hermitian matrix is an error entry.
fn matrix_entry(path: &PathBuf) -> (Value, usize) {
    let label = json!({"kind": "matrix", "path": path});
    let m = match read_json(path) {
        Ok(v) => DenseMatrix::from_json(&v),
        Err(e) => return (json!({"input": label, "status": "error", "error": e.to_string()}), 1),
    };
    let Some(m) = m else {
        return (json!({"input": label, "status": "error", "error": "not a square matrix of [re, im] pairs"}), 1);
    };
    match sym_eig(&m) {
        Ok(eig) => {
            let err = (&eig.reconstruct() - &m).frobenius_norm() / m.frobenius_norm().max(f64::MIN_POSITIVE);
            (json!({"input": label, "eigenvalues": eig.eigenvalues, "reconstruction_error": err}), 0)
        }
        Err(e) => (json!({"input": label, "status": "error", "error": e.to_string()}), 1),
    }
}

pub struct OracleArgs<'a> {
    pub space: Option<(&'a PathBuf, &'a PointSpace)>,
    pub matrix: Option<&'a PathBuf>,
    pub random: usize,
    pub seed: u64,
    pub config: wco::random::RandomSpaceConfig,
    pub alphas: Vec<f64>,
    pub ps: Vec<f64>,
    pub tol: Tolerances,
}

pub fn run(args: &OracleArgs<'_>) -> Result<OracleRun, CliError> {
    let mut entries = Vec::new();
    let (mut errors, mut violations) = (0, 0);
    if let Some((path, space)) = args.space {
        let (e, er, vi) = space_entry(json!({"kind": "space", "path": path}), space, &args.alphas, &args.ps, args.seed, &args.tol);
        entries.push(e);
        errors += er;
        violations += vi;
    }
    if let Some(path) = args.matrix {
        let (e, er) = matrix_entry(path);
        entries.push(e);
        errors += er;
    }
    if args.random > 0 {
        let spaces = random_corpus(args.seed, args.random, &args.config);
        let results: Vec<Result<Agreement, String>> = spaces
            .par_iter()
            .enumerate()
            .map(|(i, s)| compare(s, &args.alphas, &args.ps, args.seed ^ (i as u64 + 1), &args.tol).map_err(|e| e.to_string()))
            .collect();
        let mut total = Agreement::default();
        let mut failing = Vec::new();
        let mut failed_to_run = Vec::new();
        for (i, r) in results.iter().enumerate() {
            match r {
                Ok(a) => {
                    if !a.violations(&args.tol).is_empty() {
                        failing.push(i);
                    }
                    total = total.merge(a);
                }
                Err(e) => failed_to_run.push(json!({"space": i, "error": e})),
            }
        }
        errors += failed_to_run.len();
        let v = total.violations(&args.tol);
        violations += usize::from(!v.is_empty());
        entries.push(json!({
            "input": {"kind": "random", "seed": args.seed, "count": args.random, "max_dim": args.config.max_dim},
            "agreement": total,
            "violations": v,
            "failing_spaces": failing,
            "errors": failed_to_run,
        }));
    }
    let json = json!({
        "command": "oracle",
        "seed": args.seed,
        "alphas": args.alphas,
        "ps": args.ps,
        "tolerances": args.tol,
        "entries": entries,
    });
    Ok(OracleRun { json, errors, violations })
}
