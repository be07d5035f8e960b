use rayon::prelude::*;
use serde_json::{json, Map, Value};

use wco::agreement::{compare, Agreement, Tolerances};
use wco::exact::ExactSpace;
use wco::family::{self, CheckArgs, FamilyInstance};
use wco::gallery::{GalleryItem, LinearGaussian};
use wco::properties::{self as props, CheckKind};
use wco::{PointSpace, Verdict};

use crate::input::{Input, Number};

/// Exponents shared by all checks of one report.
pub struct Numbers {
    pub p: Number,
    pub q: Number,
    pub alpha: Number,
    pub exact: bool,
}

impl Numbers {
    fn params(&self, kind: CheckKind) -> Value {
        let mut m = Map::new();
        let uses_alpha = matches!(
            kind,
            CheckKind::DomainPerp | CheckKind::ClosedCriterion | CheckKind::Serwis | CheckKind::FixedPoint | CheckKind::Improvement | CheckKind::Ups
        );
        let uses_p = matches!(kind, CheckKind::PHyponormal | CheckKind::ClassQ | CheckKind::Improvement | CheckKind::Ups | CheckKind::PqMonotonicity);
        if uses_alpha {
            m.insert("alpha".into(), json!(self.alpha.text));
        }
        if uses_p {
            m.insert("p".into(), json!(self.p.text));
        }
        if kind == CheckKind::PqMonotonicity {
            m.insert("q".into(), json!(self.q.text));
        }
        if self.exact && matches!(kind, CheckKind::Quasinormal | CheckKind::FixedPoint) {
            m.insert("exact".into(), json!(true));
        }
        Value::Object(m)
    }

    fn args(&self) -> CheckArgs {
        CheckArgs { p: Some(self.p.value), q: Some(self.q.value), alpha: Some(self.alpha.value), condition: None }
    }
}

/// One report line; `violation` marks a failed theorem-invariant.
pub struct Entry {
    pub json: Value,
    pub violation: bool,
}

fn entry(kind: CheckKind, nums: &Numbers, body: Result<Map<String, Value>, String>) -> Entry {
    let mut m = Map::new();
    m.insert("check".into(), json!(kind.name()));
    m.insert("params".into(), nums.params(kind));
    let violation = match body {
        Ok(b) => {
            let v = b.get("theorem_violation").and_then(Value::as_bool).unwrap_or(false);
            m.extend(b);
            v
        }
        Err(e) => {
            m.insert("status".into(), json!("error"));
            m.insert("error".into(), json!(e));
            false
        }
    };
    m.insert("theorem_violation".into(), json!(violation));
    Entry { json: Value::Object(m), violation }
}

fn with_verdict(v: Verdict, violation: bool) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("status".into(), serde_json::to_value(v.status).expect("status serializes"));
    m.insert("verdict".into(), v.to_json());
    m.insert("theorem_violation".into(), json!(violation));
    m
}

fn is_theorem_violation(kind: CheckKind, v: &Verdict) -> bool {
    match kind {
        CheckKind::Improvement | CheckKind::Ups | CheckKind::PqMonotonicity => v.fails_p(),
        _ => false,
    }
}

fn serwis_body(verdicts: [&Verdict; 4]) -> Map<String, Value> {
    let [i, ii, iii, iv] = verdicts.map(Verdict::holds_p);
    let broken = if i && !ii {
        Some("(i) holds but (ii) fails")
    } else if ii != iii {
        Some("(ii) and (iii) disagree")
    } else if iii && !iv {
        Some("(iii) holds but (iv) fails")
    } else {
        None
    };
    let mut m = Map::new();
    m.insert("conditions".into(), Value::Array(verdicts.iter().map(|v| v.to_json()).collect()));
    m.insert("implication_violation".into(), json!(broken));
    m.insert("theorem_violation".into(), json!(broken.is_some()));
    m
}

pub fn space_check(space: &PointSpace, kind: CheckKind, nums: &Numbers) -> Entry {
    let (p, q, alpha) = (nums.p.value, nums.q.value, nums.alpha.value);
    let body = (|| -> Result<Map<String, Value>, String> {
        let err = |e: &dyn std::fmt::Display| e.to_string();
        Ok(match kind {
            CheckKind::DenselyDefined => with_verdict(props::is_densely_defined(space), false),
            CheckKind::Bounded => with_verdict(props::is_bounded(space), false),
            CheckKind::DomainPerp => {
                let perp = props::aluthge_domain_perp(space, alpha).map_err(|e| err(&e))?;
                let mut m = Map::new();
                m.insert("perp".into(), json!(perp));
                m
            }
            // on a finite space h is bounded, so the criterion must hold
            CheckKind::ClosedCriterion => {
                let v = props::aluthge_closed_criterion(space, alpha).map_err(|e| err(&e))?;
                let bad = v.fails_p();
                with_verdict(v, bad)
            }
            CheckKind::Serwis => {
                let r = props::serwis_conditions(space, alpha).map_err(|e| err(&e))?;
                serwis_body(r.as_array())
            }
            CheckKind::PHyponormal => with_verdict(props::is_p_hyponormal(space, p).map_err(|e| err(&e))?, false),
            CheckKind::ClassQ => with_verdict(props::in_class_q(space, p).map_err(|e| err(&e))?, false),
            CheckKind::Quasinormal if nums.exact => {
                with_verdict(ExactSpace::from_point_space(space).map_err(|e| err(&e))?.is_quasinormal(), false)
            }
            CheckKind::Quasinormal => with_verdict(props::is_quasinormal(space), false),
            CheckKind::FixedPoint => {
                let (v, q) = if nums.exact {
                    let e = ExactSpace::from_point_space(space).map_err(|e| err(&e))?;
                    (e.aluthge_fixed_point(&nums.alpha.exact), e.is_quasinormal())
                } else {
                    (props::aluthge_fixed_point(space, alpha).map_err(|e| err(&e))?, props::is_quasinormal(space))
                };
                // fixed points are exactly the quasinormal operators
                let bad = v.status != q.status;
                with_verdict(v, bad)
            }
            CheckKind::Improvement | CheckKind::Ups | CheckKind::PqMonotonicity => {
                let v = match kind {
                    CheckKind::Improvement => props::improvement_report(space, p, alpha),
                    CheckKind::Ups => props::ups_inequality(space, p, alpha),
                    _ => props::pq_monotonicity(space, p, q),
                }
                .map_err(|e| err(&e))?;
                let bad = is_theorem_violation(kind, &v);
                with_verdict(v, bad)
            }
        })
    })();
    entry(kind, nums, body)
}

pub fn family_check(inst: &FamilyInstance, window: u64, kind: CheckKind, nums: &Numbers) -> Entry {
    let body = (|| -> Result<Map<String, Value>, String> {
        let err = |e: &dyn std::fmt::Display| e.to_string();
        if nums.exact && matches!(kind, CheckKind::Quasinormal | CheckKind::FixedPoint) {
            let t = family::truncate_exact(inst, &inst.window(window)).map_err(|e| err(&e))?;
            let v = if kind == CheckKind::Quasinormal { t.is_quasinormal() } else { t.aluthge_fixed_point(&nums.alpha.exact) };
            let mut m = with_verdict(v, false);
            m.insert("scope".into(), json!("truncated window"));
            return Ok(m);
        }
        Ok(match kind {
            CheckKind::DomainPerp => {
                let (perp, undecided) = family::domain_perp_family(inst, nums.alpha.value, window).map_err(|e| err(&e))?;
                let mut m = Map::new();
                m.insert("perp".into(), json!(perp.iter().map(ToString::to_string).collect::<Vec<_>>()));
                m.insert("undecided".into(), json!(undecided.iter().map(ToString::to_string).collect::<Vec<_>>()));
                m
            }
            CheckKind::Serwis => {
                let v = family::serwis_family(inst, nums.alpha.value, window).map_err(|e| err(&e))?;
                serwis_body([&v[0], &v[1], &v[2], &v[3]])
            }
            _ => {
                let v = family::check_family(inst, kind, &nums.args(), window).map_err(|e| err(&e))?;
                let bad = is_theorem_violation(kind, &v);
                with_verdict(v, bad)
            }
        })
    })();
    entry(kind, nums, body)
}

fn linear_check(lg: &LinearGaussian, kind: CheckKind, nums: &Numbers) -> Entry {
    let body = match kind {
        CheckKind::Bounded => Ok(with_verdict(lg.system().bounded(), false)),
        CheckKind::ClosedCriterion => lg.system().closed_criterion(nums.alpha.value).map(|v| with_verdict(v, false)).map_err(|e| e.to_string()),
        _ => Err(format!("check {} is not available for the analytic family", kind.name())),
    };
    entry(kind, nums, body)
}

/// Entries for every requested check, in input order.
pub fn run(input: &Input, checks: &[CheckKind], nums: &Numbers) -> Vec<Entry> {
    match input {
        Input::Space { space, .. } => checks.iter().map(|&k| space_check(space, k, nums)).collect(),
        Input::Gallery { item: GalleryItem::Countable(f), window, .. } => checks.iter().map(|&k| family_check(f, *window, k, nums)).collect(),
        Input::Gallery { item: GalleryItem::Linear(lg), .. } => checks.iter().map(|&k| linear_check(lg, k, nums)).collect(),
        Input::Random { spaces, .. } => {
            let per_space: Vec<Vec<Entry>> = spaces
                .par_iter()
                .enumerate()
                .map(|(i, s)| {
                    checks
                        .iter()
                        .map(|&k| {
                            let mut e = space_check(s, k, nums);
                            e.json["space"] = json!(i);
                            e
                        })
                        .collect()
                })
                .collect();
            per_space.into_iter().flatten().collect()
        }
    }
}

/// Oracle agreement on the finite spaces behind an input; `None` for the analytic family
/// or a window that does not truncate to a space.
pub fn oracle_block(input: &Input, nums: &Numbers, seed: u64) -> Option<(Value, bool)> {
    let spaces: Vec<PointSpace> = match input {
        Input::Space { space, .. } => vec![space.clone()],
        Input::Random { spaces, .. } => spaces.clone(),
        Input::Gallery { item: GalleryItem::Countable(f), window, .. } => vec![family::truncate(f, &f.window(*window)).ok()?],
        Input::Gallery { .. } => return None,
    };
    let tol = Tolerances::default();
    let alphas = [nums.alpha.value];
    let ps = [nums.p.value];
    let results: Vec<Result<Agreement, String>> = spaces
        .par_iter()
        .enumerate()
        .map(|(i, s)| compare(s, &alphas, &ps, seed ^ (i as u64 + 1), &tol).map_err(|e| e.to_string()))
        .collect();
    let mut total = Agreement::default();
    let mut errors = Vec::new();
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(a) => total = total.merge(a),
            Err(e) => errors.push(json!({"space": i, "error": e})),
        }
    }
    let violations = total.violations(&tol);
    let bad = !violations.is_empty();
    Some((json!({"agreement": total, "violations": violations, "errors": errors, "tolerances": tol}), bad))
}
