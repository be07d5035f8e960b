//! Lazily enumerated countable spaces with closed-form certificates.
//!
//! A [`FamilyInstance`] evaluates `h`, `E` and `w_α` at any point through the
//! generic [`Calculus`], using the family's own fibers (so values on a window
//! are the values of the infinite space, not of a truncation). A window can
//! refute a property by itself; to confirm one, the window must agree with a
//! certificate attached to the family.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::calculus::Calculus;
use crate::exact::{ExactComplex, ExactError, ExactSpace};
use crate::properties::{self as props, CheckKind, PropertyError};
use crate::series::{SeriesConfig, TailReason};
use crate::space::{DiscreteSystem, Fiber, PointSpace, SpaceError};
use crate::verdict::{number, Verdict, Witness};

/// A point of ℤ or of ℤ×ℤ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Int(i64),
    Pair(i64, i64),
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Int(n) => write!(f, "{n}"),
            Point::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse point {0:?}")]
pub struct PointParseError(pub String);

impl FromStr for Point {
    type Err = PointParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PointParseError(s.to_string());
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',').ok_or_else(err)?;
            return Ok(Point::Pair(a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?));
        }
        t.parse().map(Point::Int).map_err(|_| err())
    }
}

pub type PointFn<T> = Arc<dyn Fn(&Point) -> T + Send + Sync>;

/// Fiber description returned by a family.
#[derive(Clone)]
pub enum FiberSpec {
    Finite(Vec<Point>),
    /// Enumerator `k ↦ y_k` over an infinite fiber.
    Infinite(Arc<dyn Fn(u64) -> Point + Send + Sync>),
}

/// What a pointwise certificate evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `h_{φ,w}`.
    Rn,
    /// `E(h^α)∘φ⁻¹`.
    RnPowPullback,
    /// `|w_α|`.
    AluthgeWeight,
    /// `E(h^p∘φ/h^p)`, evaluated with the exponent in place of `α`.
    HyponormalityRatio,
}

/// Arguments of a check; unused ones are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckArgs {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    /// Serwis condition index `0..4`.
    pub condition: Option<usize>,
}

/// A certified global answer for a check.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub holds: bool,
    pub constant: Option<f64>,
}

pub enum Certificate {
    /// Closed form for a quantity; `None` where the formula does not apply.
    Pointwise {
        name: String,
        quantity: Quantity,
        tolerance: f64,
        eval: Arc<dyn Fn(&Point, f64) -> Option<f64> + Send + Sync>,
    },
    /// Convergence of the fiber sum defining a quantity at a point.
    Series { name: String, point: Point, quantity: Quantity, alpha: Option<f64>, converges: bool, reason: TailReason },
    /// A global property, possibly depending on the check arguments.
    Property { name: String, check: CheckKind, decide: Arc<dyn Fn(&CheckArgs) -> Option<Decision> + Send + Sync> },
}

impl Certificate {
    pub fn name(&self) -> &str {
        match self {
            Certificate::Pointwise { name, .. } | Certificate::Series { name, .. } | Certificate::Property { name, .. } => name,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Certificate::Pointwise { name, quantity, tolerance, .. } => {
                json!({"kind": "pointwise", "name": name, "quantity": quantity, "tolerance": tolerance})
            }
            Certificate::Series { name, point, quantity, alpha, converges, reason } => json!({
                "kind": "series", "name": name, "point": point.to_string(), "quantity": quantity,
                "alpha": alpha, "converges": converges, "reason": reason,
            }),
            Certificate::Property { name, check, .. } => json!({"kind": "property", "name": name, "check": check.name()}),
        }
    }
}

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("missing argument {0} for this check")]
    MissingArgument(&'static str),
    #[error("family {0} has no exact weights")]
    NoExactWeights(String),
    #[error("check {0} has no windowed form")]
    Unsupported(String),
}

/// A countable space given by closures, with counting measure, plus certificates.
pub struct FamilyInstance {
    pub name: String,
    pub description: String,
    pub params: BTreeMap<String, String>,
    pub(crate) phi: PointFn<Point>,
    pub(crate) weight: PointFn<Complex64>,
    pub(crate) fiber: PointFn<FiberSpec>,
    pub(crate) window: Arc<dyn Fn(u64) -> Vec<Point> + Send + Sync>,
    /// Replacement image for points whose image leaves a truncation window.
    pub(crate) boundary: Option<PointFn<Point>>,
    pub(crate) exact_weight: Option<PointFn<ExactComplex>>,
    pub certificates: Vec<Certificate>,
}

impl DiscreteSystem for FamilyInstance {
    type Pt = Point;

    fn mass(&self, _x: &Point) -> f64 {
        1.0
    }
    fn phi(&self, x: &Point) -> Point {
        (self.phi)(x)
    }
    fn weight(&self, x: &Point) -> Complex64 {
        (self.weight)(x)
    }
    fn fiber(&self, x: &Point) -> Fiber<'_, Point> {
        match (self.fiber)(x) {
            FiberSpec::Finite(v) => Fiber::Finite(Cow::Owned(v)),
            FiberSpec::Infinite(f) => Fiber::Infinite(Box::new(move |k| f(k))),
        }
    }
    fn label(&self, x: &Point) -> String {
        x.to_string()
    }
}

impl FamilyInstance {
    /// The family's standard window with size parameter `size`.
    pub fn window(&self, size: u64) -> Vec<Point> {
        (self.window)(size)
    }

    pub fn has_boundary_convention(&self) -> bool {
        self.boundary.is_some()
    }

    /// Certified answer for a check, if any certificate covers these arguments.
    pub fn decision(&self, check: CheckKind, args: &CheckArgs) -> Option<(String, Decision)> {
        self.certificates.iter().find_map(|c| match c {
            Certificate::Property { name, check: k, decide } if *k == check => decide(args).map(|d| (name.clone(), d)),
            _ => None,
        })
    }

    pub fn certificates_json(&self) -> Value {
        Value::Array(self.certificates.iter().map(Certificate::to_json).collect())
    }
}

/// Adds `φ`-images to `points` until closed or until `cap` points are present.
pub fn close_under_phi(inst: &FamilyInstance, points: &[Point], cap: usize) -> Vec<Point> {
    let mut set: BTreeSet<Point> = points.iter().copied().collect();
    let mut frontier: Vec<Point> = points.to_vec();
    while let Some(x) = frontier.pop() {
        if set.len() >= cap {
            break;
        }
        let y = inst.phi(&x);
        if set.insert(y) {
            frontier.push(y);
        }
    }
    set.into_iter().collect()
}

/// Restriction of the family to a finite window, with counting measure.
///
/// A point whose image leaves the window is an error unless the family declares
/// a boundary convention, which then supplies the image. Fibers (and hence `h`)
/// of the truncation only see the window.
pub fn truncate(inst: &FamilyInstance, window: &[Point]) -> Result<PointSpace, SpaceError> {
    let (labels, phi) = truncated_structure(inst, window)?;
    let weight = window.iter().map(|x| inst.weight(x)).collect();
    PointSpace::from_indices(labels, vec![1.0; window.len()], phi, weight)
}

fn truncated_structure(inst: &FamilyInstance, window: &[Point]) -> Result<(Vec<String>, Vec<usize>), SpaceError> {
    let index: BTreeMap<Point, usize> = window.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut phi = Vec::with_capacity(window.len());
    for x in window {
        let y = inst.phi(x);
        let target = match index.get(&y) {
            Some(&i) => i,
            None => {
                let b = inst.boundary.as_ref().ok_or_else(|| SpaceError::WindowNotClosed { point: x.to_string(), image: y.to_string() })?;
                let y = b(x);
                *index.get(&y).ok_or_else(|| SpaceError::WindowNotClosed { point: x.to_string(), image: y.to_string() })?
            }
        };
        phi.push(target);
    }
    Ok((window.iter().map(Point::to_string).collect(), phi))
}

/// Exact truncation, for families with rational weights.
pub fn truncate_exact(inst: &FamilyInstance, window: &[Point]) -> Result<ExactSpace, FamilyError> {
    let ew = inst.exact_weight.as_ref().ok_or_else(|| FamilyError::NoExactWeights(inst.name.clone()))?;
    let (labels, phi) = truncated_structure(inst, window)?;
    let one = crate::exact::rational(1, 1);
    Ok(ExactSpace::new(labels, vec![one; window.len()], phi, window.iter().map(|x| ew(x)).collect())?)
}

/// Worst disagreement between a certificate and the calculus on a window.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub name: String,
    pub alpha: Option<f64>,
    pub points_checked: usize,
    pub max_rel_error: f64,
    pub worst_point: Option<String>,
    pub ok: bool,
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}

/// Checks every pointwise and series certificate against direct computation.
pub fn verify_certificates(inst: &FamilyInstance, size: u64, alphas: &[f64], series: &SeriesConfig) -> Vec<CertificateCheck> {
    let calc = Calculus::with_series(inst, *series);
    let window = inst.window(size);
    let mut out = Vec::new();
    let value = |q: Quantity, x: &Point, a: f64| -> f64 {
        match q {
            Quantity::Rn => calc.rn(x).get(),
            Quantity::RnPowPullback => calc.rn_pow_pullback(x, a).get(),
            Quantity::AluthgeWeight => calc.aluthge_weight(x, a).map(|w| w.norm()).unwrap_or(f64::INFINITY),
            Quantity::HyponormalityRatio => calc.hyponormality_ratio(x, a).get(),
        }
    };
    for cert in &inst.certificates {
        match cert {
            Certificate::Pointwise { name, quantity, tolerance, eval } => {
                let alpha_list: Vec<f64> = if *quantity == Quantity::Rn { vec![1.0] } else { alphas.to_vec() };
                for &a in &alpha_list {
                    let mut worst = (0.0_f64, None);
                    let mut n = 0;
                    for x in &window {
                        if let Some(expect) = eval(x, a) {
                            n += 1;
                            let e = rel_err(value(*quantity, x, a), expect);
                            if e > worst.0 || worst.1.is_none() {
                                worst = (e.max(worst.0), if e >= worst.0 { Some(x.to_string()) } else { worst.1 });
                            }
                        }
                    }
                    out.push(CertificateCheck {
                        name: name.clone(),
                        alpha: (*quantity != Quantity::Rn).then_some(a),
                        points_checked: n,
                        max_rel_error: worst.0,
                        worst_point: worst.1,
                        ok: worst.0 <= *tolerance,
                    });
                }
            }
            Certificate::Series { name, point, quantity, alpha, converges, .. } => {
                let v = value(*quantity, point, alpha.unwrap_or(1.0));
                let undecided = calc.undecided().contains(point);
                out.push(CertificateCheck {
                    name: name.clone(),
                    alpha: *alpha,
                    points_checked: 1,
                    max_rel_error: 0.0,
                    worst_point: Some(point.to_string()),
                    ok: !undecided && v.is_finite() == *converges,
                });
            }
            Certificate::Property { .. } => {}
        }
    }
    out
}

/// Sizes at which sup-type constants are re-evaluated before declaring growth.
const DOUBLINGS: u32 = 3;
/// A sup past this on some doubled window counts as unbounded.
pub const GROWTH_THRESHOLD: f64 = 1e12;

fn need(v: Option<f64>, name: &'static str) -> Result<f64, FamilyError> {
    v.ok_or(FamilyError::MissingArgument(name))
}

fn window_verdict(calc: &Calculus<FamilyInstance>, window: &[Point], kind: CheckKind, args: &CheckArgs) -> Result<Verdict, FamilyError> {
    Ok(match kind {
        CheckKind::DenselyDefined => props::densely_defined_on(calc, window),
        CheckKind::Bounded => props::bounded_on(calc, window),
        CheckKind::ClosedCriterion => props::closed_criterion_on(calc, window, need(args.alpha, "alpha")?)?,
        CheckKind::PHyponormal => props::p_hyponormal_on(calc, window, need(args.p, "p")?)?,
        CheckKind::ClassQ => props::class_q_on(calc, window, need(args.p, "p")?)?,
        CheckKind::Quasinormal => props::quasinormal_on(calc, window),
        CheckKind::FixedPoint => props::fixed_point_on(calc, window, need(args.alpha, "alpha")?)?,
        CheckKind::Improvement => props::improvement_on(calc, window, need(args.p, "p")?, need(args.alpha, "alpha")?)?,
        CheckKind::Ups => props::ups_on(calc, window, need(args.p, "p")?, need(args.alpha, "alpha")?)?,
        CheckKind::PqMonotonicity => props::pq_monotonicity_on(calc, window, need(args.p, "p")?, need(args.q, "q")?)?,
        CheckKind::Serwis => {
            let r = props::serwis_on(calc, window, need(args.alpha, "alpha")?)?;
            r.as_array()[args.condition.unwrap_or(0).min(3)].clone()
        }
        CheckKind::DomainPerp => return Err(FamilyError::Unsupported(kind.name().to_string())),
    })
}

/// The window point where the quantity behind a sup/inf criterion is extreme.
fn extreme_point(calc: &Calculus<FamilyInstance>, window: &[Point], kind: CheckKind, args: &CheckArgs) -> Witness {
    let pick = |score: &dyn Fn(&Point) -> f64| -> Witness {
        let best = window.iter().max_by(|a, b| score(a).total_cmp(&score(b)));
        match best {
            Some(x) => Witness::at(x.to_string()).with("value", score(x).abs()),
            None => Witness::at("window"),
        }
    };
    match (kind, args.condition) {
        (CheckKind::Bounded, _) => pick(&|x| calc.rn(x).get()),
        (CheckKind::Serwis, Some(0)) => pick(&|x| -calc.rn(x).get()),
        (CheckKind::Serwis, Some(1 | 2)) => {
            let a = args.alpha.unwrap_or(1.0);
            pick(&|x| if calc.rn(x).is_zero() { f64::NEG_INFINITY } else { -calc.rn_pow_pullback(x, a).get() })
        }
        (CheckKind::ClosedCriterion | CheckKind::Serwis, _) => {
            let a = args.alpha.unwrap_or(1.0);
            pick(&|x| props::closed_ratio(calc, x, a).get())
        }
        _ => window.first().map_or(Witness::at("window"), |x| Witness::at(x.to_string())),
    }
}

fn is_sup_check(kind: CheckKind, args: &CheckArgs) -> bool {
    matches!(kind, CheckKind::Bounded | CheckKind::ClosedCriterion)
        || (kind == CheckKind::Serwis && args.condition.unwrap_or(0) == 3)
}

/// Verdict for a check on a family: window evaluation, then certificate or growth analysis.
pub fn check_family(inst: &FamilyInstance, kind: CheckKind, args: &CheckArgs, size: u64) -> Result<Verdict, FamilyError> {
    let calc = Calculus::new(inst);
    let window = inst.window(size);
    let v = window_verdict(&calc, &window, kind, args)?;
    let on_window = format!("{} (window of {} points)", v.details, window.len());
    match v.status {
        crate::verdict::Status::Fails | crate::verdict::Status::Inconclusive => {
            return Ok(Verdict { details: on_window, ..v });
        }
        crate::verdict::Status::Holds => {}
    }
    if v.details.starts_with("not p-hyponormal") {
        // vacuous pass of an implication check is final
        return Ok(Verdict { details: on_window, ..v });
    }
    if let Some((name, d)) = inst.decision(kind, args) {
        return Ok(if d.holds {
            Verdict { constant: d.constant.or(v.constant), details: format!("{on_window}; certified: {name}"), ..v }
        } else {
            Verdict::fails(extreme_point(&calc, &window, kind, args), format!("certified to fail: {name}; {on_window}"))
        });
    }
    if kind == CheckKind::ClosedCriterion && args.alpha.is_some_and(|a| a >= 1.0) {
        // h^0 = 1 on supp h, so the ratio is 1/(1 + E(h)∘φ⁻¹) ≤ 1 everywhere
        return Ok(Verdict { constant: Some(1.0), details: format!("{on_window}; at alpha = 1 the ratio is at most 1"), ..v });
    }
    if is_sup_check(kind, args) {
        let mut growth = vec![v.constant.unwrap_or(0.0)];
        for k in 1..=DOUBLINGS {
            let bigger = inst.window(size << k);
            let vk = window_verdict(&calc, &bigger, kind, args)?;
            let c = match vk.status {
                crate::verdict::Status::Holds => vk.constant.unwrap_or(0.0),
                _ => return Ok(Verdict { details: format!("{} (window of {} points)", vk.details, bigger.len()), ..vk }),
            };
            growth.push(c);
            if c > GROWTH_THRESHOLD {
                let w = extreme_point(&calc, &bigger, kind, args);
                return Ok(Verdict::fails(w, format!("sup grows past {GROWTH_THRESHOLD:e} over window doublings: {growth:?}")));
            }
        }
        return Ok(Verdict::inconclusive(format!("sup stays finite on windows but no certificate: {growth:?}")));
    }
    Ok(Verdict::inconclusive(format!("{on_window}; no certificate covers the whole space")))
}

/// The four Serwis verdicts on a family.
pub fn serwis_family(inst: &FamilyInstance, alpha: f64, size: u64) -> Result<[Verdict; 4], FamilyError> {
    let mut out = Vec::with_capacity(4);
    for c in 0..4 {
        let args = CheckArgs { alpha: Some(alpha), condition: Some(c), ..CheckArgs::default() };
        out.push(check_family(inst, CheckKind::Serwis, &args, size)?);
    }
    Ok(out.try_into().expect("four verdicts"))
}

/// Window points where `E(h^α)∘φ⁻¹ = ∞`, with the series evidence for each infinite fiber met.
pub fn domain_perp_family(inst: &FamilyInstance, alpha: f64, size: u64) -> Result<(Vec<Point>, Vec<Point>), FamilyError> {
    let calc = Calculus::new(inst);
    let window = inst.window(size);
    let perp = props::domain_perp_on(&calc, &window, alpha)?;
    let undecided = calc.undecided().into_iter().collect();
    Ok((perp, undecided))
}

/// JSON block describing the instance on a window: truncated space if possible, certificates, fields.
pub fn instance_json(inst: &FamilyInstance, size: u64) -> Value {
    let window = inst.window(size);
    let calc = Calculus::new(inst);
    let h: serde_json::Map<String, Value> = window.iter().map(|x| (x.to_string(), number(calc.rn(x).get()))).collect();
    let (space, truncation_error) = match truncate(inst, &window) {
        Ok(s) => (serde_json::to_value(s.to_document()).expect("document serializes"), Value::Null),
        Err(e) => (Value::Null, Value::String(e.to_string())),
    };
    json!({
        "name": inst.name,
        "description": inst.description,
        "params": inst.params,
        "window_size": size,
        "space": space,
        "truncation_error": truncation_error,
        "fields": {"h": h},
        "certificates": inst.certificates_json(),
    })
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn is<T: Send + Sync>() {}
    is::<FamilyInstance>();
}
