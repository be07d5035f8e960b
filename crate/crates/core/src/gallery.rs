//! Example families with closed-form certificates.
//!
//! | name              | space                  | `φ`                                  |
//! |-------------------|------------------------|--------------------------------------|
//! | `swap`            | ℕ                      | `2n ↔ 2n−1`                          |
//! | `grid-tree`       | ℕ×ℕ                    | `(n,m+1)→(n,m)`, `(n+1,1)→(n,1)`, root fixed |
//! | `buda`            | ℤ₊ ⊔ ℕ×ℕ               | `n→n+1`, `(k,1)→0`, `(k,n)→(k,n−1)`  |
//! | `bilateral`       | ℤ                      | `n→n−1`                              |
//! | `star`            | ℤ₊                     | everything to `0`                    |
//! | `linear-gaussian` | ℝ² with Gaussian measure | `(x₁,x₂)→(θx₂,x₁)`                 |

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{exact, ExactComplex};
use crate::family::{
    instance_json, CheckArgs, Certificate, Decision, FamilyInstance, FiberSpec, Point, Quantity,
};
use crate::linear::{self, LinearError, LinearSystem, Stages};
use crate::properties::CheckKind;
use crate::series::TailReason;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalleryError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("family {family} has no parameter {name:?}")]
    UnknownParam { family: String, name: String },
    #[error("bad value {value:?} for parameter {name}: {reason}")]
    BadParam { name: String, value: String, reason: String },
    #[error(transparent)]
    Linear(#[from] LinearError),
}

pub struct FamilyInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// `(parameter, accepted values and default)`.
    pub params: &'static [(&'static str, &'static str)],
}

pub const FAMILIES: &[FamilyInfo] = &[
    FamilyInfo {
        name: "swap",
        description: "pairwise swap 2n <-> 2n-1 on N, h(n) = w(phi(n))^2",
        params: &[("weight", "linear (default) | const | zero-start"), ("value", "constant for weight=const, default 1")],
    },
    FamilyInfo {
        name: "grid-tree",
        description: "N x N with rows collapsing onto the first column, weights a_n on the first two columns",
        params: &[("a_seq", "harmonic (default) | geometric"), ("ratio", "ratio for geometric, default 1/2")],
    },
    FamilyInfo {
        name: "buda",
        description: "chain Z+ fed by infinitely many branches; densely defined with nontrivial Aluthge perp set at alpha = 1",
        params: &[],
    },
    FamilyInfo {
        name: "bilateral",
        description: "bilateral weighted shift phi(n) = n-1 on Z",
        params: &[("base", "w(n) = base^n, default 2"), ("const", "w(n) = const instead of base^n")],
    },
    FamilyInfo { name: "star", description: "all of Z+ mapped to 0 with unit weights; h(0) = inf", params: &[] },
    FamilyInfo {
        name: "linear-gaussian",
        description: "phi(x1,x2) = (theta x2, x1) on R^2 with Gaussian measure; analytic, no point space",
        params: &[("theta", "positive, not 1; decimal or p/q, default 1/2")],
    },
];

/// A gallery instance: a countable family or the analytic linear one.
pub enum GalleryItem {
    Countable(FamilyInstance),
    Linear(LinearGaussian),
}

impl GalleryItem {
    pub fn to_json(&self, size: u64) -> Value {
        match self {
            GalleryItem::Countable(f) => instance_json(f, size),
            GalleryItem::Linear(l) => l.to_json(),
        }
    }

    pub fn countable(self) -> Option<FamilyInstance> {
        match self {
            GalleryItem::Countable(f) => Some(f),
            GalleryItem::Linear(_) => None,
        }
    }
}

pub fn build(name: &str, params: &BTreeMap<String, String>) -> Result<GalleryItem, GalleryError> {
    let info = FAMILIES.iter().find(|f| f.name == name).ok_or_else(|| GalleryError::UnknownFamily(name.to_string()))?;
    if let Some(k) = params.keys().find(|k| !info.params.iter().any(|(p, _)| p == k)) {
        return Err(GalleryError::UnknownParam { family: name.to_string(), name: k.clone() });
    }
    let get = |k: &str| params.get(k).map(String::as_str);
    Ok(match name {
        "swap" => {
            let rule = match get("weight").unwrap_or("linear") {
                "linear" => SwapWeight::Linear,
                "zero-start" => SwapWeight::ZeroStart,
                "const" => SwapWeight::Const(get("value").map(|v| parse_real("value", v)).transpose()?.unwrap_or(1.0)),
                other => return Err(bad("weight", other, "expected linear, const or zero-start")),
            };
            GalleryItem::Countable(swap_family(rule))
        }
        "grid-tree" => {
            let seq = match get("a_seq").unwrap_or("harmonic") {
                "harmonic" => GridSequence::Harmonic,
                "geometric" => {
                    let r = get("ratio").map(|v| parse_rational("ratio", v)).transpose()?.unwrap_or(BigRational::new(1.into(), 2.into()));
                    if !(r.is_positive() && r < BigRational::from_integer(1.into())) {
                        return Err(bad("ratio", get("ratio").unwrap_or(""), "must lie in (0, 1)"));
                    }
                    GridSequence::Geometric(r)
                }
                other => return Err(bad("a_seq", other, "expected harmonic or geometric")),
            };
            GalleryItem::Countable(grid_tree_family(seq))
        }
        "buda" => GalleryItem::Countable(buda_family()),
        "bilateral" => {
            let rule = match (get("base"), get("const")) {
                (Some(_), Some(_)) => return Err(bad("const", get("const").unwrap(), "give either base or const")),
                (_, Some(c)) => ShiftWeight::Const(parse_rational("const", c)?),
                (b, None) => ShiftWeight::Base(b.map(|v| parse_rational("base", v)).transpose()?.unwrap_or(BigRational::from_integer(2.into()))),
            };
            GalleryItem::Countable(bilateral_shift_family(rule))
        }
        "star" => GalleryItem::Countable(star_family()),
        "linear-gaussian" => {
            let theta = get("theta").map(|v| parse_rational("theta", v)).transpose()?.unwrap_or(BigRational::new(1.into(), 2.into()));
            GalleryItem::Linear(LinearGaussian::new(theta)?)
        }
        _ => unreachable!("registry and builder disagree"),
    })
}

fn bad(name: &str, value: &str, reason: &str) -> GalleryError {
    GalleryError::BadParam { name: name.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn parse_real(name: &str, v: &str) -> Result<f64, GalleryError> {
    parse_rational(name, v)?.to_f64().ok_or_else(|| bad(name, v, "out of range"))
}

/// Parses `p/q`, integers and plain decimals exactly.
pub fn parse_rational(name: &str, v: &str) -> Result<BigRational, GalleryError> {
    let t = v.trim();
    let int = |s: &str| s.trim().parse::<BigInt>().map_err(|_| bad(name, v, "not a number"));
    if let Some((p, q)) = t.split_once('/') {
        let q = int(q)?;
        if q.is_zero() {
            return Err(bad(name, v, "zero denominator"));
        }
        return Ok(BigRational::new(int(p)?, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad(name, v, "not a decimal"));
        }
        let neg = whole.starts_with('-');
        let w = if whole.is_empty() || whole == "-" { BigInt::zero() } else { int(whole)?.abs() };
        let den = num_traits::pow::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(w * &den + int(frac)?, den);
        return Ok(if neg { -r } else { r });
    }
    Ok(BigRational::from_integer(int(t)?))
}

fn real(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn exact_real(r: BigRational) -> ExactComplex {
    (r, BigRational::zero())
}

fn int_of(p: &Point) -> i64 {
    match p {
        Point::Int(n) => *n,
        Point::Pair(..) => panic!("expected an integer point, got {p}"),
    }
}

fn pair_of(p: &Point) -> (i64, i64) {
    match p {
        Point::Pair(a, b) => (*a, *b),
        Point::Int(_) => panic!("expected a pair point, got {p}"),
    }
}

fn property(name: &str, check: CheckKind, decide: impl Fn(&CheckArgs) -> Option<Decision> + Send + Sync + 'static) -> Certificate {
    Certificate::Property { name: name.to_string(), check, decide: Arc::new(decide) }
}

fn pointwise(name: &str, quantity: Quantity, tolerance: f64, eval: impl Fn(&Point, f64) -> Option<f64> + Send + Sync + 'static) -> Certificate {
    Certificate::Pointwise { name: name.to_string(), quantity, tolerance, eval: Arc::new(eval) }
}

fn verdict(holds: bool, constant: Option<f64>) -> Option<Decision> {
    Some(Decision { holds, constant })
}

/// `h^{1−α}/(1 + E(h^α)∘φ⁻¹·h^{1−α})` from its two ingredients.
fn closed_ratio_value(h: f64, pullback: f64, alpha: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let u = h.powf(1.0 - alpha);
    u / (1.0 + pullback * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwapWeight {
    /// `w(n) = n`.
    Linear,
    /// `w(n) = c`.
    Const(f64),
    /// `w(1) = 0`, `w(n) = 1` otherwise.
    ZeroStart,
}

impl SwapWeight {
    fn at(self, n: i64) -> f64 {
        match self {
            SwapWeight::Linear => n as f64,
            SwapWeight::Const(c) => c,
            SwapWeight::ZeroStart => f64::from(u8::from(n != 1)),
        }
    }

    fn exact_at(self, n: i64) -> BigRational {
        match self {
            SwapWeight::Linear => BigRational::from_integer(n.into()),
            SwapWeight::Const(c) => exact(c).expect("finite constant"),
            SwapWeight::ZeroStart => BigRational::from_integer(i64::from(n != 1).into()),
        }
    }
}

fn swap_phi(n: i64) -> i64 {
    if n % 2 == 0 {
        n - 1
    } else {
        n + 1
    }
}

/// Pairwise swap on ℕ. Since `φ` is an involution, `h(n) = |w(φ(n))|²` and
/// `E(h^α)∘φ⁻¹ = h^α∘φ` off the zero set of `h`.
pub fn swap_family(rule: SwapWeight) -> FamilyInstance {
    let w = move |n: i64| rule.at(n);
    let h = move |n: i64| w(swap_phi(n)).powi(2);
    let mut certificates = vec![
        pointwise("h(n) = w(phi(n))^2", Quantity::Rn, 1e-12, move |p, _| Some(h(int_of(p)))),
        pointwise("E(h^a) o phi^-1 = h^a o phi on {h > 0}", Quantity::RnPowPullback, 1e-12, move |p, a| {
            let n = int_of(p);
            Some(if h(n) > 0.0 { h(swap_phi(n)).powf(a) } else { 0.0 })
        }),
        property("densely defined: every fiber is a single point", CheckKind::DenselyDefined, |_| verdict(true, None)),
    ];
    let (bounded, quasinormal, lower) = match rule {
        SwapWeight::Linear => ((false, None), false, Some(1.0)),
        SwapWeight::Const(c) => ((true, Some(c * c)), true, (c != 0.0).then_some(c * c)),
        SwapWeight::ZeroStart => ((true, Some(1.0)), false, None),
    };
    certificates.push(property("bounded iff w is bounded", CheckKind::Bounded, move |_| verdict(bounded.0, bounded.1)));
    certificates.push(property("quasinormal iff |w(n)| = |w(phi(n))| on supp w", CheckKind::Quasinormal, move |_| {
        verdict(quasinormal, None)
    }));
    certificates.push(property("fixed point iff quasinormal", CheckKind::FixedPoint, move |_| verdict(quasinormal, None)));
    // past n = 2 both members of a pair carry weight >= 1 (or a constant), so the
    // closedness ratio is at most max(1, value on the first pair)
    let closed_constant = move |alpha: f64| {
        let first_pair = (1..=2).map(|n| closed_ratio_value(h(n), if h(n) > 0.0 { h(swap_phi(n)).powf(alpha) } else { 0.0 }, alpha));
        let tail = match rule {
            SwapWeight::Const(c) if c != 0.0 => closed_ratio_value(c * c, (c * c).powf(alpha), alpha),
            SwapWeight::Const(_) => 0.0,
            _ => 1.0,
        };
        first_pair.fold(tail, f64::max).max(f64::MIN_POSITIVE)
    };
    certificates.push(property("closedness ratio bounded by its value on the first pair and 1", CheckKind::ClosedCriterion, move |a| {
        verdict(true, Some(closed_constant(a.alpha?)))
    }));
    certificates.push(property("serwis conditions from h(n) = w(phi(n))^2", CheckKind::Serwis, move |a| {
        let alpha = a.alpha?;
        match a.condition? {
            0 => verdict(lower.is_some(), lower),
            // zero-start: h(1) = 1 while E(h^a) o phi^-1 (1) = h(2)^a = 0
            1 => verdict(lower.is_some(), lower.map(|c| c.powf(alpha))),
            2 => verdict(lower.is_some(), lower.map(|c| c.powf(-alpha))),
            3 => verdict(true, Some(closed_constant(alpha))),
            _ => None,
        }
    }));
    let label = match rule {
        SwapWeight::Linear => "linear".to_string(),
        SwapWeight::Const(c) => format!("const {c}"),
        SwapWeight::ZeroStart => "zero-start".to_string(),
    };
    FamilyInstance {
        name: "swap".into(),
        description: "phi(2n) = 2n-1, phi(2n-1) = 2n on N with counting measure".into(),
        params: BTreeMap::from([("weight".to_string(), label)]),
        phi: Arc::new(|p| Point::Int(swap_phi(int_of(p)))),
        weight: Arc::new(move |p| real(w(int_of(p)))),
        fiber: Arc::new(|p| FiberSpec::Finite(vec![Point::Int(swap_phi(int_of(p)))])),
        window: Arc::new(|size| (1..=2 * size as i64).map(Point::Int).collect()),
        boundary: None,
        exact_weight: Some(Arc::new(move |p| exact_real(rule.exact_at(int_of(p))))),
        certificates,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridSequence {
    /// `a_n = 1/n`.
    Harmonic,
    /// `a_n = r^n`.
    Geometric(BigRational),
}

impl GridSequence {
    fn exact_at(&self, n: i64) -> BigRational {
        match self {
            GridSequence::Harmonic => BigRational::new(1.into(), n.into()),
            GridSequence::Geometric(r) => num_traits::pow::pow(r.clone(), n as usize),
        }
    }
}

/// `ℕ×ℕ` with `φ(n,m+1) = (n,m)`, `φ(n+1,1) = (n,1)`, `φ(1,1) = (1,1)`,
/// `w(n,1) = a_n`, `w(n,2) = a_{n+1}` and `w = 1` elsewhere.
///
/// The source text writes the second rule as `φ(n+1,1) = (n,0)`, which leaves
/// ℕ×ℕ; its own values of `h` require `(n,1)`, which is what is used here.
/// `h(1,1) = a₁²+2a₂²`, `h(n,1) = 2a_{n+1}²` for `n ≥ 2` and `h(n,m) = 1` for `m ≥ 2`.
pub fn grid_tree_family(seq: GridSequence) -> FamilyInstance {
    let a_float: Arc<dyn Fn(i64) -> f64 + Send + Sync> = match &seq {
        GridSequence::Harmonic => Arc::new(|n| 1.0 / n as f64),
        GridSequence::Geometric(r) => {
            let r = r.to_f64().expect("ratio in (0,1)");
            Arc::new(move |n| r.powi(n as i32))
        }
    };
    let a = a_float.clone();
    let weight = move |p: &Point| {
        let (n, m) = pair_of(p);
        match m {
            1 => a(n),
            2 => a(n + 1),
            _ => 1.0,
        }
    };
    let a = a_float.clone();
    let h = move |n: i64, m: i64| -> f64 {
        match (n, m) {
            (1, 1) => a(1).powi(2) + 2.0 * a(2).powi(2),
            (_, 1) => 2.0 * a(n + 1).powi(2),
            _ => 1.0,
        }
    };
    let hc = h.clone();
    let a = a_float.clone();
    // E(h^α)∘φ⁻¹ by the discrete fiber formula on the fibers above
    let pullback = move |n: i64, m: i64, alpha: f64| -> f64 {
        match (n, m) {
            (1, 1) => {
                let (a1, a2) = (a(1).powi(2), a(2).powi(2));
                (a1 * hc(1, 1).powf(alpha) + a2 + a2 * hc(2, 1).powf(alpha)) / (a1 + 2.0 * a2)
            }
            (_, 1) => (1.0 + hc(n + 1, 1).powf(alpha)) / 2.0,
            _ => 1.0,
        }
    };
    let a = a_float.clone();
    let h_max = h(1, 1).max(2.0 * a(2).powi(2)).max(1.0);
    let pb = pullback.clone();
    let mut certificates = vec![
        pointwise("h(1,1) = a1^2 + 2a2^2, h(n,1) = 2a_{n+1}^2, h(n,m) = 1 for m >= 2", Quantity::Rn, 1e-12, move |p, _| {
            let (n, m) = pair_of(p);
            Some(h(n, m))
        }),
        pointwise(
            "E(h^a) o phi^-1 (1,1) = (a1^2 h(1,1)^a + a2^2 + a2^2 (2a3^2)^a)/(a1^2 + 2a2^2), (n,1): (1 + (2a_{n+2}^2)^a)/2, else 1",
            Quantity::RnPowPullback,
            1e-12,
            move |p, alpha| {
                let (n, m) = pair_of(p);
                Some(pb(n, m, alpha))
            },
        ),
        property("densely defined: finite fibers with positive weights", CheckKind::DenselyDefined, |_| verdict(true, None)),
        property("bounded: a_n is decreasing, so h <= max(h(1,1), 2a2^2, 1)", CheckKind::Bounded, move |_| verdict(true, Some(h_max))),
    ];
    let pb = pullback.clone();
    certificates.push(property(
        "serwis: a_n -> 0 breaks (i); E(h^a) o phi^-1 >= min(1/2, value at (1,1)) gives (ii), (iii); h bounded gives (iv)",
        CheckKind::Serwis,
        move |args| {
            let alpha = args.alpha?;
            let inf_e = pb(1, 1, alpha).min(0.5);
            match args.condition? {
                0 => verdict(false, None),
                1 => verdict(true, Some(inf_e)),
                2 => verdict(true, Some(1.0 / inf_e)),
                3 => verdict(true, Some(h_max.powf(1.0 - alpha))),
                _ => None,
            }
        },
    ));
    certificates.push(property("closedness: h bounded", CheckKind::ClosedCriterion, move |args| {
        verdict(true, Some(h_max.powf(1.0 - args.alpha?)))
    }));
    let label = match &seq {
        GridSequence::Harmonic => "harmonic".to_string(),
        GridSequence::Geometric(r) => format!("geometric {r}"),
    };
    let mut params = BTreeMap::from([("a_seq".to_string(), label)]);
    params.insert("cluster_point_zero".into(), "true".into());
    let exact_seq = seq.clone();
    FamilyInstance {
        name: "grid-tree".into(),
        description: "N x N, phi(n,m+1) = (n,m), phi(n+1,1) = (n,1) (printed as (n,0) in the source), phi(1,1) = (1,1)".into(),
        params,
        phi: Arc::new(|p| {
            let (n, m) = pair_of(p);
            match (n, m) {
                (1, 1) => Point::Pair(1, 1),
                (_, 1) => Point::Pair(n - 1, 1),
                _ => Point::Pair(n, m - 1),
            }
        }),
        weight: Arc::new(move |p| real(weight(p))),
        fiber: Arc::new(|p| {
            let (n, m) = pair_of(p);
            FiberSpec::Finite(match (n, m) {
                (1, 1) => vec![Point::Pair(1, 1), Point::Pair(1, 2), Point::Pair(2, 1)],
                (_, 1) => vec![Point::Pair(n, 2), Point::Pair(n + 1, 1)],
                _ => vec![Point::Pair(n, m + 1)],
            })
        }),
        window: Arc::new(|size| {
            let s = size.max(1) as i64;
            (1..=s).flat_map(|n| (1..=s).map(move |m| Point::Pair(n, m))).collect()
        }),
        boundary: None,
        exact_weight: Some(Arc::new(move |p| {
            let (n, m) = pair_of(p);
            exact_real(match m {
                1 => exact_seq.exact_at(n),
                2 => exact_seq.exact_at(n + 1),
                _ => BigRational::from_integer(1.into()),
            })
        })),
        certificates,
    }
}

/// A chain `0 → 1 → 2 → …` fed at `0` by infinitely many branches
/// `… → (k,2) → (k,1) → 0`, with `w(k,1) = 1/k`, `w(k,2) = √k` and `w = 1` elsewhere.
///
/// `h(0) = Σ 1/k² = π²/6`, `h(k,1) = k`, and `h = 1` elsewhere, so `C` is densely
/// defined but unbounded. `E(h^α)∘φ⁻¹(0) = Σ k^{α−2}/h(0)` is finite exactly when
/// `α < 1`. Truncations send the top of the chain to itself.
pub fn buda_family() -> FamilyInstance {
    let weight = |p: &Point| match *p {
        Point::Pair(k, 1) => 1.0 / k as f64,
        Point::Pair(k, 2) => (k as f64).sqrt(),
        _ => 1.0,
    };
    let h = |p: &Point| match *p {
        Point::Int(0) => PI * PI / 6.0,
        Point::Pair(k, 1) => k as f64,
        _ => 1.0,
    };
    let certificates = vec![
        pointwise("h(0) = pi^2/6", Quantity::Rn, 1e-4, move |p, _| (*p == Point::Int(0)).then(|| h(p))),
        pointwise("h(k,1) = k, h = 1 elsewhere off 0", Quantity::Rn, 1e-12, move |p, _| (*p != Point::Int(0)).then(|| h(p))),
        Certificate::Series {
            name: "sum of w(k,1)^2 = sum 1/k^2 converges".into(),
            point: Point::Int(0),
            quantity: Quantity::Rn,
            alpha: None,
            converges: true,
            reason: TailReason::PSeries { exponent: 2.0 },
        },
        Certificate::Series {
            name: "sum of w(k,1)^2 w(k,2)^(2a) = sum k^(a-2) converges for a = 1/2".into(),
            point: Point::Int(0),
            quantity: Quantity::RnPowPullback,
            alpha: Some(0.5),
            converges: true,
            reason: TailReason::PSeries { exponent: 1.5 },
        },
        Certificate::Series {
            name: "sum of w(k,1)^2 w(k,2)^(2a) = sum 1/k diverges for a = 1".into(),
            point: Point::Int(0),
            quantity: Quantity::RnPowPullback,
            alpha: Some(1.0),
            converges: false,
            reason: TailReason::DivergentByComparison { exponent: 1.0 },
        },
        property("densely defined: h is finite everywhere", CheckKind::DenselyDefined, |_| verdict(true, None)),
        property("unbounded: h(k,1) = k", CheckKind::Bounded, |_| verdict(false, None)),
    ];
    FamilyInstance {
        name: "buda".into(),
        description: "chain Z+ with branches (k,n) entering at 0; w(k,1) = 1/k, w(k,2) = sqrt(k)".into(),
        params: BTreeMap::new(),
        phi: Arc::new(|p| match *p {
            Point::Int(n) => Point::Int(n + 1),
            Point::Pair(_, 1) => Point::Int(0),
            Point::Pair(k, n) => Point::Pair(k, n - 1),
        }),
        weight: Arc::new(move |p| real(weight(p))),
        fiber: Arc::new(|p| match *p {
            Point::Int(0) => FiberSpec::Infinite(Arc::new(|k| Point::Pair(k as i64 + 1, 1))),
            Point::Int(n) => FiberSpec::Finite(vec![Point::Int(n - 1)]),
            Point::Pair(k, n) => FiberSpec::Finite(vec![Point::Pair(k, n + 1)]),
        }),
        window: Arc::new(|size| {
            let s = size.max(1) as i64;
            let chain = (0..=s).map(Point::Int);
            chain.chain((1..=s).flat_map(|k| (1..=s).map(move |n| Point::Pair(k, n)))).collect()
        }),
        boundary: Some(Arc::new(|p| *p)),
        exact_weight: None,
        certificates,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShiftWeight {
    /// `w(n) = bⁿ`.
    Base(BigRational),
    /// `w(n) = c`.
    Const(BigRational),
}

/// Bilateral weighted shift `φ(n) = n − 1` on ℤ with counting measure.
///
/// `h(n) = |w(n+1)|²`. For `w(n) = bⁿ`: `h(n) = b^{2(n+1)}`, `w_α(n) = b^{n+α}` (for
/// `b > 0`), and `E(h^p∘φ/h^p) = b^{−2p}`, so `C` is p-hyponormal for every `p`
/// exactly when `|b| ≥ 1` and quasinormal exactly when `|b| = 1`.
pub fn bilateral_shift_family(rule: ShiftWeight) -> FamilyInstance {
    let (base, label) = match &rule {
        ShiftWeight::Base(b) => (b.to_f64().expect("finite base"), format!("base {b}")),
        ShiftWeight::Const(c) => (1.0, format!("const {c}")),
    };
    let scale = match &rule {
        ShiftWeight::Base(_) => 1.0,
        ShiftWeight::Const(c) => c.to_f64().expect("finite constant"),
    };
    let b = base.abs();
    let w = move |n: i64| scale * base.powi(n as i32);
    let h = move |n: i64| w(n + 1).powi(2);
    let k_alpha = move |alpha: f64| (b * b).powf(alpha) * (scale * scale).powf(alpha);
    let expanding = b >= 1.0 && scale != 0.0;
    let quasinormal = b == 1.0 || scale == 0.0;
    let mut certificates = vec![
        pointwise("h(n) = |w(n+1)|^2", Quantity::Rn, 1e-12, move |p, _| Some(h(int_of(p)))),
        pointwise("E(h^a) o phi^-1 (n) = h(n+1)^a", Quantity::RnPowPullback, 1e-12, move |p, a| Some(h(int_of(p) + 1).powf(a))),
        pointwise("|w_a(n)| = |w(n)| b^a", Quantity::AluthgeWeight, 1e-12, move |p, a| Some(w(int_of(p)).abs() * b.powf(a))),
        pointwise("E(h^p o phi / h^p) = b^(-2p)", Quantity::HyponormalityRatio, 1e-12, move |_, e| {
            (scale != 0.0).then(|| b.powf(-2.0 * e))
        }),
        property("densely defined: single-point fibers", CheckKind::DenselyDefined, |_| verdict(true, None)),
        property("bounded iff |b| = 1", CheckKind::Bounded, move |_| verdict(quasinormal, Some((scale * scale).max(f64::MIN_POSITIVE)))),
        property("quasinormal iff |b| = 1", CheckKind::Quasinormal, move |_| verdict(quasinormal, None)),
        property("fixed point iff |b| = 1", CheckKind::FixedPoint, move |_| verdict(quasinormal, None)),
        property("p-hyponormal iff b^(-2p) <= 1", CheckKind::PHyponormal, move |_| verdict(expanding, None)),
        property("class Q_p iff b^(-2p) <= 1", CheckKind::ClassQ, move |_| verdict(expanding, None)),
        property("q-hyponormal for q < p once p-hyponormal", CheckKind::PqMonotonicity, move |_| verdict(true, None)),
        property("transform is (p+a)-hyponormal: its ratio is b^(-2(p+a))", CheckKind::Improvement, move |_| {
            expanding.then(|| Decision { holds: true, constant: None })
        }),
        property("both sides of the inequality are powers of b", CheckKind::Ups, move |_| {
            expanding.then(|| Decision { holds: true, constant: None })
        }),
    ];
    // sup over t > 0 of t^{1−α}/(1 + k t) with k = b^{2α}·|c|^{2α}
    let closed_bound = move |alpha: f64| {
        if scale == 0.0 {
            return f64::MIN_POSITIVE;
        }
        let k = k_alpha(alpha);
        alpha * ((1.0 - alpha) / (alpha * k)).powf(1.0 - alpha)
    };
    certificates.push(property("closedness ratio <= a((1-a)/(a b^(2a)))^(1-a)", CheckKind::ClosedCriterion, move |a| {
        verdict(true, Some(closed_bound(a.alpha?)))
    }));
    certificates.push(property("serwis: h = b^(2(n+1)) has inf 0 unless |b| = 1", CheckKind::Serwis, move |a| {
        let alpha = a.alpha?;
        let c2 = scale * scale;
        match a.condition? {
            0 => verdict(quasinormal && c2 > 0.0, (quasinormal && c2 > 0.0).then_some(c2)),
            1 => verdict(quasinormal, Some(if c2 > 0.0 { c2.powf(alpha) } else { 1.0 })),
            2 => verdict(quasinormal, Some(if c2 > 0.0 { c2.powf(-alpha) } else { 1.0 })),
            3 => verdict(true, Some(closed_bound(alpha))),
            _ => None,
        }
    }));
    let exact_rule = rule.clone();
    FamilyInstance {
        name: "bilateral".into(),
        description: "bilateral weighted shift phi(n) = n-1 on Z with counting measure".into(),
        params: BTreeMap::from([("weight".to_string(), label)]),
        phi: Arc::new(|p| Point::Int(int_of(p) - 1)),
        weight: Arc::new(move |p| real(w(int_of(p)))),
        fiber: Arc::new(|p| FiberSpec::Finite(vec![Point::Int(int_of(p) + 1)])),
        window: Arc::new(|size| (-(size as i64)..=size as i64).map(Point::Int).collect()),
        boundary: None,
        exact_weight: Some(Arc::new(move |p| {
            let n = int_of(p);
            exact_real(match &exact_rule {
                ShiftWeight::Base(b) if b.is_zero() => BigRational::zero(),
                ShiftWeight::Base(b) => num_traits::Pow::pow(b, n as i32),
                ShiftWeight::Const(c) => c.clone(),
            })
        })),
        certificates,
    }
}

/// Everything in ℤ₊ mapped to `0` with unit weights: `h(0) = ∞`, not densely defined.
pub fn star_family() -> FamilyInstance {
    FamilyInstance {
        name: "star".into(),
        description: "phi(n) = 0 for all n in Z+, w = 1; the fiber of 0 is infinite".into(),
        params: BTreeMap::new(),
        phi: Arc::new(|_| Point::Int(0)),
        weight: Arc::new(|_| real(1.0)),
        fiber: Arc::new(|p| match *p {
            Point::Int(0) => FiberSpec::Infinite(Arc::new(|k| Point::Int(k as i64))),
            _ => FiberSpec::Finite(Vec::new()),
        }),
        window: Arc::new(|size| (0..=size as i64).map(Point::Int).collect()),
        boundary: None,
        exact_weight: None,
        certificates: vec![
            Certificate::Series {
                name: "h(0) = sum of 1 over Z+ diverges".into(),
                point: Point::Int(0),
                quantity: Quantity::Rn,
                alpha: None,
                converges: false,
                reason: TailReason::DivergentByComparison { exponent: 0.0 },
            },
            property("not densely defined: h(0) = inf", CheckKind::DenselyDefined, |_| verdict(false, None)),
        ],
    }
}

/// The analytic family `φ(x₁,x₂) = (θx₂, x₁)` on ℝ² with Gaussian measure.
///
/// `C_{φ,1_α}` is hyponormal exactly when both [`Stages`] inequalities hold; the
/// set of such `α` is an interval ending at `1/2` for `θ < 1`.
pub struct LinearGaussian {
    theta: BigRational,
    system: LinearSystem,
}

impl LinearGaussian {
    pub fn new(theta: BigRational) -> Result<Self, LinearError> {
        let t = theta.to_f64().unwrap_or(f64::NAN);
        let system = linear::swap_scale_system(t)?;
        Ok(LinearGaussian { theta, system })
    }

    pub fn theta(&self) -> &BigRational {
        &self.theta
    }

    pub fn system(&self) -> &LinearSystem {
        &self.system
    }

    pub fn stages(&self, alpha: &BigRational) -> Stages {
        linear::stages_feasible_exact(alpha, &self.theta)
    }

    /// Feasible `α ∈ {0.01, …, 1}`.
    pub fn feasible_alphas(&self) -> Vec<BigRational> {
        linear::feasible_alpha_grid(&self.theta, 1, 100)
    }

    /// Grid points where the stages verdict and sampled hyponormality disagree.
    pub fn equivalence_violations(&self) -> Result<Vec<f64>, LinearError> {
        let samples = linear::sample_grid();
        let mut bad = Vec::new();
        for k in 1..=100 {
            let alpha = BigRational::new(k.into(), 100.into());
            let a = k as f64 / 100.0;
            let sampled = linear::hyponormal_on_samples(&self.system, a, &samples)?.is_none();
            if sampled != self.stages(&alpha).feasible() {
                bad.push(a);
            }
        }
        Ok(bad)
    }

    pub fn to_json(&self) -> Value {
        let feasible = self.feasible_alphas();
        let ends = |v: Option<&BigRational>| v.map(|r| r.to_string());
        json!({
            "name": "linear-gaussian",
            "theta": self.theta.to_string(),
            "feasible_alpha_grid": {
                "step": "1/100",
                "count": feasible.len(),
                "min": ends(feasible.first()),
                "max": ends(feasible.last()),
                "is_interval": linear::is_grid_interval(&feasible),
            },
            "bounded": self.system.bounded(),
            "certificates": [{
                "kind": "equivalence",
                "name": "C_{phi,w_a} hyponormal iff both stage inequalities hold",
                "violations_on_samples": self.equivalence_violations().unwrap_or_default(),
            }],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Calculus;
    use crate::family::{check_family, domain_perp_family, truncate, truncate_exact, verify_certificates};
    use crate::exact::rational;
    use crate::series::SeriesConfig;
    use crate::space::SpaceError;

    fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn family(name: &str, kv: &[(&str, &str)]) -> FamilyInstance {
        build(name, &params(kv)).unwrap().countable().unwrap()
    }

    #[test]
    fn certificates_match_calculus_on_windows() {
        let alphas = [0.25, 0.5, 0.75, 1.0];
        for (name, kv) in [
            ("swap", vec![]),
            ("swap", vec![("weight", "zero-start")]),
            ("swap", vec![("weight", "const"), ("value", "0.5")]),
            ("grid-tree", vec![]),
            ("grid-tree", vec![("a_seq", "geometric"), ("ratio", "1/3")]),
            ("buda", vec![]),
            ("bilateral", vec![]),
            ("bilateral", vec![("base", "1/2")]),
            ("bilateral", vec![("const", "3")]),
            ("star", vec![]),
        ] {
            let f = family(name, &kv);
            for c in verify_certificates(&f, 8, &alphas, &SeriesConfig::default()) {
                assert!(c.ok, "{name} {kv:?}: {c:?}");
            }
        }
    }

    #[test]
    fn grid_tree_values() {
        let f = family("grid-tree", &[]);
        let calc = Calculus::new(&f);
        assert_eq!(calc.rn(&Point::Pair(1, 1)).get(), 1.5);
        let t = truncate_exact(&f, &f.window(4)).unwrap();
        // the window is φ-closed but only sees part of each fiber at the edge
        assert_eq!(t.rn()[t.index_of("(1,1)").unwrap()], rational(3, 2));
        assert_eq!(t.rn()[t.index_of("(2,1)").unwrap()], rational(2, 9));
        let s = crate::family::serwis_family(&f, 0.5, 8).unwrap();
        assert!(s[0].fails_p());
        assert!(s[1].holds_p() && s[1].constant == Some(0.5));
        assert!(s[2].holds_p() && s[2].constant == Some(2.0));
        assert!(s[3].holds_p());
    }

    #[test]
    fn buda_perp_sets() {
        let f = family("buda", &[]);
        let (perp, undecided) = domain_perp_family(&f, 1.0, 10).unwrap();
        assert_eq!(perp, vec![Point::Int(0)]);
        assert!(undecided.is_empty());
        let (perp, undecided) = domain_perp_family(&f, 0.5, 10).unwrap();
        assert!(perp.is_empty() && undecided.is_empty());
        assert!(check_family(&f, CheckKind::DenselyDefined, &CheckArgs::default(), 10).unwrap().holds_p());
        assert!(check_family(&f, CheckKind::Bounded, &CheckArgs::default(), 10).unwrap().fails_p());
        let big = SeriesConfig { base: 10_000, ..SeriesConfig::default() };
        for c in verify_certificates(&f, 10, &[0.5, 1.0], &big) {
            assert!(c.ok, "{c:?}");
        }
        assert!(truncate(&f, &f.window(5)).is_ok());
    }

    #[test]
    fn bilateral_aluthge_weight_and_truncation() {
        let f = family("bilateral", &[("base", "2")]);
        let calc = Calculus::new(&f);
        for n in -5..=5 {
            let wa = calc.aluthge_weight(&Point::Int(n), 0.5).unwrap();
            assert!((wa.re - 2f64.powf(n as f64 + 0.5)).abs() <= 1e-12 * wa.re);
        }
        let err = truncate(&f, &f.window(3)).unwrap_err();
        assert!(matches!(err, SpaceError::WindowNotClosed { .. }));
        let args = CheckArgs { p: Some(0.5), ..CheckArgs::default() };
        assert!(check_family(&f, CheckKind::PHyponormal, &args, 64).unwrap().holds_p());
        assert!(check_family(&f, CheckKind::Quasinormal, &args, 64).unwrap().fails_p());
        assert!(check_family(&f, CheckKind::Bounded, &args, 64).unwrap().fails_p());
        let shrinking = family("bilateral", &[("base", "0.5")]);
        assert!(check_family(&shrinking, CheckKind::PHyponormal, &args, 16).unwrap().fails_p());
    }

    #[test]
    fn swap_examples() {
        let f = family("swap", &[("weight", "zero-start")]);
        let s = crate::family::serwis_family(&f, 0.5, 10).unwrap();
        assert!(s[2].fails_p());
        assert!(s[3].holds_p());
        let lin = family("swap", &[]);
        assert!(check_family(&lin, CheckKind::Bounded, &CheckArgs::default(), 10).unwrap().fails_p());
        let one = family("swap", &[("weight", "const")]);
        assert!(check_family(&one, CheckKind::Quasinormal, &CheckArgs::default(), 10).unwrap().holds_p());
    }

    #[test]
    fn star_is_not_densely_defined() {
        let f = family("star", &[]);
        let v = check_family(&f, CheckKind::DenselyDefined, &CheckArgs::default(), 5).unwrap();
        assert!(v.fails_p());
        assert_eq!(v.witness.unwrap().point, "0");
    }

    #[test]
    fn linear_gaussian_stages() {
        let lg = match build("linear-gaussian", &params(&[("theta", "0.5")])).unwrap() {
            GalleryItem::Linear(l) => l,
            GalleryItem::Countable(_) => unreachable!(),
        };
        assert!(lg.stages(&rational(1, 2)).feasible());
        assert!(!lg.stages(&rational(3, 5)).feasible());
        let grid = lg.feasible_alphas();
        assert!(linear::is_grid_interval(&grid));
        assert_eq!(grid.last(), Some(&rational(1, 2)));
        assert!(lg.equivalence_violations().unwrap().is_empty());
        assert!(build("linear-gaussian", &params(&[("theta", "1")])).is_err());
        assert!(build("linear-gaussian", &params(&[("theta", "-2")])).is_err());
    }

    #[test]
    fn parameters_are_validated() {
        assert!(matches!(build("nope", &params(&[])), Err(GalleryError::UnknownFamily(_))));
        assert!(matches!(build("swap", &params(&[("x", "1")])), Err(GalleryError::UnknownParam { .. })));
        assert!(matches!(build("bilateral", &params(&[("base", "two")])), Err(GalleryError::BadParam { .. })));
        assert_eq!(parse_rational("t", "0.125").unwrap(), rational(1, 8));
        assert_eq!(parse_rational("t", "-1.5").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("t", "3/6").unwrap(), rational(1, 2));
    }
}
