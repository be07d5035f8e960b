//! Pointwise decision procedures.
//!
//! Every check is written once against a [`Calculus`] and a window of points,
//! so the same code serves finite spaces (window = all points, verdict final)
//! and lazy families (window verdicts are upgraded by certificates in
//! [`crate::family`]). The `is_*` wrappers take a finite [`PointSpace`].
//!
//! "a.e. `[μ_w]`" means "at every point with `w ≠ 0`"; points with `w = 0` are skipped.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::calculus::{check_alpha, Calculus, CalculusError};
use crate::ext::ExtReal;
use crate::space::{DiscreteSystem, PointSpace, Reweighted};
use crate::verdict::{Verdict, Witness};

/// Default relative slack for closed-form inequalities.
pub const EXACT_TOL: f64 = 1e-12;

static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0x3D71_9799_812D_EA11);

/// Current relative slack of every pointwise criterion (initially [`EXACT_TOL`]).
pub fn tolerance() -> f64 {
    f64::from_bits(TOLERANCE_BITS.load(Ordering::Relaxed))
}

/// Process-wide override of the criterion slack.
pub fn set_tolerance(tol: f64) {
    TOLERANCE_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PropertyError {
    #[error("not densely defined: h = inf at point {0}")]
    NotDenselyDefined(String),
    #[error("precondition failed: not {p}-hyponormal")]
    NotPHyponormal { p: f64 },
    #[error("precondition failed: alpha = {alpha} exceeds 1 - p = {bound}")]
    AlphaTooLarge { alpha: f64, bound: f64 },
    #[error("precondition failed: q = {q} is not below p = {p}")]
    QNotBelowP { p: f64, q: f64 },
    #[error("precondition failed: h of the transformed operator is infinite at point {0}")]
    TransformNotDenselyDefined(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

fn check_exponent(p: f64) -> Result<(), PropertyError> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(CalculusError::NonPositiveExponent(p).into())
    }
}

fn supported<S: DiscreteSystem>(sys: &S, x: &S::Pt) -> bool {
    sys.weight(x) != Complex64::new(0.0, 0.0)
}

/// Fails with `NotDenselyDefined` if `h` or `h∘φ` is infinite somewhere on the window.
pub fn require_dense<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt]) -> Result<(), PropertyError> {
    let sys = calc.system();
    for x in window {
        for y in [x.clone(), sys.phi(x)] {
            if calc.rn(&y).is_infinite() {
                return Err(PropertyError::NotDenselyDefined(sys.label(&y)));
            }
        }
    }
    Ok(())
}

/// `h < ∞` at every window point.
pub fn densely_defined_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt]) -> Verdict {
    let sys = calc.system();
    for x in window {
        if calc.rn(x).is_infinite() {
            return Verdict::fails(Witness::at(sys.label(x)).with("h", f64::INFINITY), "fiber sum of |w|^2 mass diverges");
        }
    }
    let undecided = calc.undecided();
    if window.iter().any(|x| undecided.contains(x)) {
        return Verdict::inconclusive("an infinite fiber sum is still growing on the examined range");
    }
    Verdict::holds("h is finite at every point")
}

/// Largest value of `h` on the window and where it occurs.
pub fn sup_rn<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt]) -> (ExtReal, Option<S::Pt>) {
    let mut best = (ExtReal::ZERO, None);
    for x in window {
        let h = calc.rn(x);
        if best.1.is_none() || h > best.0 {
            best = (h, Some(x.clone()));
        }
    }
    best
}

/// `sup h < ∞` on the window; the sup is the constant.
pub fn bounded_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt]) -> Verdict {
    match sup_rn(calc, window) {
        (h, Some(x)) if h.is_infinite() => {
            Verdict::fails(Witness::at(calc.system().label(&x)).with("h", f64::INFINITY), "h is infinite")
        }
        (h, _) => Verdict::holds_with(h.get(), "sup h is finite"),
    }
}

/// `{x : E(h^α)∘φ⁻¹(x) = ∞}`, the support of the orthogonal complement of the domain of `C_{φ,w_α}`.
pub fn domain_perp_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], alpha: f64) -> Result<Vec<S::Pt>, PropertyError> {
    check_alpha(alpha)?;
    Ok(window.iter().filter(|x| calc.rn_pow_pullback(x, alpha).is_infinite()).cloned().collect())
}

/// `h^{1−α}/(1 + E(h^α)∘φ⁻¹·h^{1−α})`, zero where `h = 0`.
pub fn closed_ratio<S: DiscreteSystem>(calc: &Calculus<S>, x: &S::Pt, alpha: f64) -> ExtReal {
    let h = calc.rn(x);
    if h.is_zero() {
        return ExtReal::ZERO;
    }
    let top = if alpha == 1.0 { ExtReal::ONE } else { h.powf(1.0 - alpha) };
    let e = calc.rn_pow_pullback(x, alpha);
    if e.is_infinite() {
        return ExtReal::ZERO;
    }
    if top.is_infinite() {
        return ExtReal::INFINITY;
    }
    top / (ExtReal::ONE + e * top)
}

fn sup_closed_ratio<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], alpha: f64) -> (ExtReal, Option<S::Pt>) {
    let mut best = (ExtReal::ZERO, None);
    for x in window {
        let r = closed_ratio(calc, x, alpha);
        if best.1.is_none() || r > best.0 {
            best = (r, Some(x.clone()));
        }
    }
    best
}

/// Closedness of `Δ_α(C)` as `C_{φ,w_α}`: `h^{1−α} ≤ c(1 + E(h^α)∘φ⁻¹·h^{1−α})` for some `c`.
pub fn closed_criterion_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], alpha: f64) -> Result<Verdict, PropertyError> {
    check_alpha(alpha)?;
    let (sup, at) = sup_closed_ratio(calc, window, alpha);
    Ok(match at {
        Some(x) if sup.is_infinite() => {
            Verdict::fails(Witness::at(calc.system().label(&x)).with("ratio", f64::INFINITY), "ratio is infinite")
        }
        _ if sup.is_zero() => Verdict::holds_with(1.0, "h vanishes on the window; any constant works"),
        _ => Verdict::holds_with(sup.get(), "sup of h^(1-a)/(1 + E(h^a)ophi^-1 h^(1-a))"),
    })
}

/// The four conditions compared in the closedness analysis, with their constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SerwisReport {
    /// `h ≥ c`.
    pub lower_bound: Verdict,
    /// `E(h^α)∘φ⁻¹ ≥ c` on `{h ≠ 0}`.
    pub pullback_lower_bound: Verdict,
    /// `c·E(h^α)∘φ⁻¹·h^{1−α} ≥ h^{1−α}` on `{h ≠ 0}`.
    pub scaled_domination: Verdict,
    /// `c(1 + E(h^α)∘φ⁻¹·h^{1−α}) ≥ h^{1−α}` on `{h ≠ 0}`.
    pub closedness: Verdict,
}

impl SerwisReport {
    pub fn as_array(&self) -> [&Verdict; 4] {
        [&self.lower_bound, &self.pullback_lower_bound, &self.scaled_domination, &self.closedness]
    }

    /// (i)⇒(ii), (ii)⇔(iii), (iii)⇒(iv); returns the first broken link.
    pub fn implication_violation(&self) -> Option<&'static str> {
        let [i, ii, iii, iv] = self.as_array().map(|v| v.holds_p());
        if i && !ii {
            Some("(i) holds but (ii) fails")
        } else if ii != iii {
            Some("(ii) and (iii) disagree")
        } else if iii && !iv {
            Some("(iii) holds but (iv) fails")
        } else {
            None
        }
    }
}

pub fn serwis_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], alpha: f64) -> Result<SerwisReport, PropertyError> {
    check_alpha(alpha)?;
    let sys = calc.system();

    let lower_bound = {
        let mut inf: Option<(ExtReal, S::Pt)> = None;
        for x in window {
            let h = calc.rn(x);
            if inf.as_ref().map_or(true, |(v, _)| h < *v) {
                inf = Some((h, x.clone()));
            }
        }
        match inf {
            Some((v, x)) if v.is_zero() => Verdict::fails(Witness::at(sys.label(&x)).with("h", 0.0), "h vanishes"),
            Some((v, _)) => Verdict::holds_with(v.get(), "inf h"),
            None => Verdict::holds_with(1.0, "empty window"),
        }
    };

    let mut inf_e: Option<(ExtReal, S::Pt)> = None;
    for x in window.iter().filter(|x| !calc.rn(x).is_zero()) {
        let e = calc.rn_pow_pullback(x, alpha);
        if inf_e.as_ref().map_or(true, |(v, _)| e < *v) {
            inf_e = Some((e, x.clone()));
        }
    }
    let (pullback_lower_bound, scaled_domination) = match inf_e {
        Some((v, x)) if v.is_zero() => {
            let w = Witness::at(sys.label(&x)).with("E(h^a)ophi^-1", 0.0).with("h", calc.rn(&x).get());
            (
                Verdict::fails(w.clone(), "E(h^a)ophi^-1 vanishes where h does not"),
                Verdict::fails(w, "E(h^a)ophi^-1 vanishes where h does not"),
            )
        }
        Some((v, _)) if v.is_infinite() => (
            Verdict::holds_with(f64::MAX, "E(h^a)ophi^-1 is infinite on {h != 0}"),
            Verdict::holds_with(f64::MIN_POSITIVE, "E(h^a)ophi^-1 is infinite on {h != 0}"),
        ),
        Some((v, _)) => (
            Verdict::holds_with(v.get(), "inf of E(h^a)ophi^-1 over {h != 0}"),
            Verdict::holds_with(1.0 / v.get(), "reciprocal of inf E(h^a)ophi^-1 over {h != 0}"),
        ),
        None => (Verdict::holds_with(1.0, "{h != 0} is empty"), Verdict::holds_with(1.0, "{h != 0} is empty")),
    };

    let closedness = closed_criterion_on(calc, window, alpha)?;
    Ok(SerwisReport { lower_bound, pullback_lower_bound, scaled_domination, closedness })
}

/// `h > 0` a.e. `[μ_w]` and `E(h^p∘φ/h^p) ≤ 1` a.e. `[μ_w]`.
pub fn p_hyponormal_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], p: f64) -> Result<Verdict, PropertyError> {
    check_exponent(p)?;
    require_dense(calc, window)?;
    let sys = calc.system();
    if let Some(z) = window.iter().find(|z| supported(sys, z) && calc.rn(z).is_zero()) {
        return Ok(Verdict::fails(Witness::at(sys.label(z)).with("h", 0.0), "h vanishes where w does not"));
    }
    for z in window.iter().filter(|z| supported(sys, z)) {
        let ratio = calc.hyponormality_ratio(z, p);
        if !ratio.le_tol(ExtReal::ONE, tolerance()) {
            return Ok(Verdict::fails(Witness::at(sys.label(z)).with("ratio", ratio.get()), "E(h^p o phi / h^p) exceeds 1"));
        }
    }
    Ok(Verdict::holds("h > 0 and E(h^p o phi / h^p) <= 1 on supp w"))
}

/// `h^p∘φ ≤ E(h^p)` a.e. `[μ_w]`.
pub fn class_q_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], p: f64) -> Result<Verdict, PropertyError> {
    check_exponent(p)?;
    require_dense(calc, window)?;
    let sys = calc.system();
    for z in window.iter().filter(|z| supported(sys, z)) {
        let lhs = calc.rn(&sys.phi(z)).powf(p);
        let rhs = calc.cond_exp(z, |y| calc.rn(y).powf(p));
        if !lhs.le_tol(rhs, tolerance()) {
            let w = Witness::at(sys.label(z)).with("h^p o phi", lhs.get()).with("E(h^p)", rhs.get());
            return Ok(Verdict::fails(w, "h^p o phi exceeds E(h^p)"));
        }
    }
    Ok(Verdict::holds("h^p o phi <= E(h^p) on supp w"))
}

/// `h∘φ = h` a.e. `[μ_w]`.
pub fn quasinormal_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt]) -> Verdict {
    let sys = calc.system();
    for z in window.iter().filter(|z| supported(sys, z)) {
        let (a, b) = (calc.rn(&sys.phi(z)), calc.rn(z));
        if !a.approx_eq(b, tolerance()) {
            return Verdict::fails(Witness::at(sys.label(z)).with("h o phi", a.get()).with("h", b.get()), "h o phi differs from h");
        }
    }
    Verdict::holds("h o phi = h on supp w")
}

/// `w_α = w` at every window point.
pub fn fixed_point_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], alpha: f64) -> Result<Verdict, PropertyError> {
    check_alpha(alpha)?;
    let sys = calc.system();
    for x in window {
        let w = sys.weight(x);
        let wa = calc.aluthge_weight(x, alpha)?;
        if (wa - w).norm() > tolerance() * w.norm().max(1.0) {
            let wit = Witness::at(sys.label(x)).with("|w|", w.norm()).with("|w_a|", wa.norm());
            return Ok(Verdict::fails(wit, "the Aluthge weight differs from w"));
        }
    }
    Ok(Verdict::holds("w_a = w"))
}

/// The `w_α`-reweighted system.
pub fn aluthge_system<'a, S: DiscreteSystem>(calc: &'a Calculus<'a, S>, alpha: f64) -> Reweighted<'a, S> {
    Reweighted::new(calc.system(), move |x| calc.aluthge_weight(x, alpha).unwrap_or(Complex64::new(0.0, 0.0)))
}

fn improvement_preconditions<S: DiscreteSystem>(
    calc: &Calculus<S>,
    window: &[S::Pt],
    p: f64,
    alpha: f64,
) -> Result<(), PropertyError> {
    check_exponent(p)?;
    check_alpha(alpha)?;
    if alpha > 1.0 - p + tolerance() {
        return Err(PropertyError::AlphaTooLarge { alpha, bound: 1.0 - p });
    }
    if !p_hyponormal_on(calc, window, p)?.holds_p() {
        return Err(PropertyError::NotPHyponormal { p });
    }
    let sys = calc.system();
    for x in window {
        let h = calc.aluthge_rn(x, alpha);
        let hphi = calc.aluthge_rn(&sys.phi(x), alpha);
        if h.is_infinite() || hphi.is_infinite() {
            return Err(PropertyError::TransformNotDenselyDefined(sys.label(x)));
        }
    }
    Ok(())
}

/// p-hyponormal `C` with `α ≤ 1 − p` gives a `(p+α)`-hyponormal `C_{φ,w_α}`.
/// A failure here is a violation of the theorem, not of the input.
pub fn improvement_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], p: f64, alpha: f64) -> Result<Verdict, PropertyError> {
    improvement_preconditions(calc, window, p, alpha)?;
    let transformed = aluthge_system(calc, alpha);
    let tcalc = Calculus::new(&transformed);
    let v = p_hyponormal_on(&tcalc, window, p + alpha)?;
    Ok(if v.fails_p() {
        Verdict { details: format!("theorem violation: transform is not {}-hyponormal ({})", p + alpha, v.details), ..v }
    } else {
        Verdict { details: format!("transform is {}-hyponormal", p + alpha), ..v }
    })
}

/// `E_{φ,w_α}(h_α^{p+α}∘φ/h_α^{p+α}) ≤ (E(h^α)/h^α)^{p+α−1}` a.e. `[μ_{w_α}]`, `h_α = h_{φ,w_α}`.
pub fn ups_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], p: f64, alpha: f64) -> Result<Verdict, PropertyError> {
    improvement_preconditions(calc, window, p, alpha)?;
    let sys = calc.system();
    let transformed = aluthge_system(calc, alpha);
    let tcalc = Calculus::new(&transformed);
    let q = p + alpha;
    for z in window {
        if !supported(&transformed, z) {
            continue;
        }
        let lhs = tcalc.hyponormality_ratio(z, q);
        let e = calc.cond_exp(z, |y| calc.rn(y).powf(alpha));
        let rhs = (e / calc.rn(z).powf(alpha)).powf(q - 1.0);
        let rhs = if q == 1.0 { ExtReal::ONE } else { rhs };
        if !lhs.le_tol(rhs, tolerance()) {
            let w = Witness::at(sys.label(z)).with("lhs", lhs.get()).with("rhs", rhs.get());
            return Ok(Verdict::fails(w, "theorem violation: inequality fails"));
        }
    }
    Ok(Verdict::holds("inequality holds on supp w_a"))
}

/// p-hyponormal ⇒ q-hyponormal for `q < p`. Vacuous when the space is not p-hyponormal.
pub fn pq_monotonicity_on<S: DiscreteSystem>(calc: &Calculus<S>, window: &[S::Pt], p: f64, q: f64) -> Result<Verdict, PropertyError> {
    check_exponent(q)?;
    if q >= p {
        return Err(PropertyError::QNotBelowP { p, q });
    }
    if !p_hyponormal_on(calc, window, p)?.holds_p() {
        return Ok(Verdict::holds("not p-hyponormal; nothing to check"));
    }
    let v = p_hyponormal_on(calc, window, q)?;
    Ok(if v.fails_p() {
        Verdict { details: format!("theorem violation: p-hyponormal but not {q}-hyponormal"), ..v }
    } else {
        Verdict { details: format!("p-hyponormal and {q}-hyponormal"), ..v }
    })
}

fn all(space: &PointSpace) -> Vec<usize> {
    space.points().collect()
}

pub fn is_densely_defined(space: &PointSpace) -> Verdict {
    densely_defined_on(&Calculus::new(space), &all(space))
}

pub fn is_bounded(space: &PointSpace) -> Verdict {
    bounded_on(&Calculus::new(space), &all(space))
}

/// Labels of `{x : E(h^α)∘φ⁻¹(x) = ∞}`.
pub fn aluthge_domain_perp(space: &PointSpace, alpha: f64) -> Result<Vec<String>, PropertyError> {
    let pts = domain_perp_on(&Calculus::new(space), &all(space), alpha)?;
    Ok(pts.into_iter().map(|x| space.labels()[x].clone()).collect())
}

pub fn aluthge_closed_criterion(space: &PointSpace, alpha: f64) -> Result<Verdict, PropertyError> {
    closed_criterion_on(&Calculus::new(space), &all(space), alpha)
}

pub fn serwis_conditions(space: &PointSpace, alpha: f64) -> Result<SerwisReport, PropertyError> {
    serwis_on(&Calculus::new(space), &all(space), alpha)
}

pub fn is_p_hyponormal(space: &PointSpace, p: f64) -> Result<Verdict, PropertyError> {
    p_hyponormal_on(&Calculus::new(space), &all(space), p)
}

pub fn in_class_q(space: &PointSpace, p: f64) -> Result<Verdict, PropertyError> {
    class_q_on(&Calculus::new(space), &all(space), p)
}

pub fn is_quasinormal(space: &PointSpace) -> Verdict {
    quasinormal_on(&Calculus::new(space), &all(space))
}

pub fn aluthge_fixed_point(space: &PointSpace, alpha: f64) -> Result<Verdict, PropertyError> {
    fixed_point_on(&Calculus::new(space), &all(space), alpha)
}

pub fn improvement_report(space: &PointSpace, p: f64, alpha: f64) -> Result<Verdict, PropertyError> {
    improvement_on(&Calculus::new(space), &all(space), p, alpha)
}

pub fn ups_inequality(space: &PointSpace, p: f64, alpha: f64) -> Result<Verdict, PropertyError> {
    ups_on(&Calculus::new(space), &all(space), p, alpha)
}

pub fn pq_monotonicity(space: &PointSpace, p: f64, q: f64) -> Result<Verdict, PropertyError> {
    pq_monotonicity_on(&Calculus::new(space), &all(space), p, q)
}

/// Names accepted by `--check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    DenselyDefined,
    Bounded,
    DomainPerp,
    ClosedCriterion,
    Serwis,
    PHyponormal,
    ClassQ,
    Quasinormal,
    FixedPoint,
    Improvement,
    Ups,
    PqMonotonicity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::DenselyDefined,
        CheckKind::Bounded,
        CheckKind::DomainPerp,
        CheckKind::ClosedCriterion,
        CheckKind::Serwis,
        CheckKind::PHyponormal,
        CheckKind::ClassQ,
        CheckKind::Quasinormal,
        CheckKind::FixedPoint,
        CheckKind::Improvement,
        CheckKind::Ups,
        CheckKind::PqMonotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::DenselyDefined => "densely-defined",
            CheckKind::Bounded => "bounded",
            CheckKind::DomainPerp => "domain-perp",
            CheckKind::ClosedCriterion => "closed-criterion",
            CheckKind::Serwis => "serwis",
            CheckKind::PHyponormal => "p-hyponormal",
            CheckKind::ClassQ => "class-q",
            CheckKind::Quasinormal => "quasinormal",
            CheckKind::FixedPoint => "fixed-point",
            CheckKind::Improvement => "improvement",
            CheckKind::Ups => "ups",
            CheckKind::PqMonotonicity => "pq-monotonicity",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown check name: {0}")]
pub struct UnknownCheck(pub String);

impl FromStr for CheckKind {
    type Err = UnknownCheck;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| UnknownCheck(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_space;
    use crate::verdict::Status;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn s2() -> PointSpace {
        build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap()
    }

    fn c3(w: [f64; 3]) -> PointSpace {
        build_space(vec!["0", "1", "2"], vec![1.0; 3], vec!["1", "2", "0"], w.iter().map(|&v| c(v)).collect()).unwrap()
    }

    fn identity(ws: &[f64]) -> PointSpace {
        let labels: Vec<String> = (0..ws.len()).map(|i| i.to_string()).collect();
        build_space(labels.clone(), vec![1.0; ws.len()], labels, ws.iter().map(|&v| c(v)).collect()).unwrap()
    }

    /// Swap map on {1,…,2n}: φ(2k) = 2k−1, φ(2k−1) = 2k.
    fn swap(ws: &[f64]) -> PointSpace {
        let labels: Vec<String> = (1..=ws.len()).map(|i| i.to_string()).collect();
        let phi: Vec<String> = (1..=ws.len()).map(|i| if i % 2 == 0 { i - 1 } else { i + 1 }.to_string()).collect();
        build_space(labels, vec![1.0; ws.len()], phi, ws.iter().map(|&v| c(v)).collect()).unwrap()
    }

    #[test]
    fn finite_spaces_are_densely_defined_and_bounded() {
        assert!(is_densely_defined(&s2()).holds_p());
        let b = is_bounded(&c3([1.0, 2.0, 4.0]));
        assert_eq!(b.constant, Some(16.0));
        assert!(aluthge_domain_perp(&s2(), 1.0).unwrap().is_empty());
    }

    #[test]
    fn p_hyponormality_examples() {
        for p in [0.25, 1.0, 3.0] {
            assert!(is_p_hyponormal(&identity(&[2.0, 0.5, 0.0]), p).unwrap().holds_p());
        }
        let v = is_p_hyponormal(&c3([1.0, 2.0, 4.0]), 1.0).unwrap();
        assert_eq!(v.status, Status::Fails);
        let w = v.witness.unwrap();
        assert_eq!(w.point, "1");
        assert_eq!(w.values["ratio"], 4.0);
        let v = is_p_hyponormal(&s2(), 1.0).unwrap();
        assert_eq!(v.witness.unwrap().point, "1");
    }

    #[test]
    fn class_q_examples() {
        let v = in_class_q(&s2(), 1.0).unwrap();
        assert!(v.fails_p());
        assert_eq!(v.witness.unwrap().values["h^p o phi"], 2.0);
        assert!(in_class_q(&identity(&[3.0, 1.0]), 2.0).unwrap().holds_p());
    }

    #[test]
    fn quasinormality_and_fixed_point() {
        assert!(is_quasinormal(&identity(&[2.0, 3.0])).holds_p());
        assert!(is_quasinormal(&c3([1.5, 1.5, 1.5])).holds_p());
        assert!(is_quasinormal(&c3([1.0, 2.0, 4.0])).fails_p());
        assert!(aluthge_fixed_point(&identity(&[2.0, 3.0]), 0.5).unwrap().holds_p());
        let v = aluthge_fixed_point(&c3([1.0, 2.0, 4.0]), 1.0).unwrap();
        assert!(v.fails_p());
        assert_eq!(v.witness.unwrap().values["|w_a|"], 4.0);
    }

    #[test]
    fn closed_criterion_on_identity() {
        let v = aluthge_closed_criterion(&identity(&[2.0]), 0.5).unwrap();
        // h = 4: 4^{1/2}/(1 + 4^{1/2}·4^{1/2}) = 2/5
        assert!((v.constant.unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn serwis_on_swap_window() {
        let r = serwis_conditions(&swap(&[0.0, 1.0, 1.0, 1.0, 2.0, 3.0]), 0.5).unwrap();
        assert!(r.lower_bound.fails_p());
        assert!(r.pullback_lower_bound.fails_p());
        assert!(r.scaled_domination.fails_p());
        assert!(r.closedness.holds_p());
        assert_eq!(r.implication_violation(), None);
    }

    #[test]
    fn serwis_with_zero_weight() {
        let r = serwis_conditions(&c3([0.0, 0.0, 0.0]), 0.5).unwrap();
        assert!(r.lower_bound.fails_p());
        assert!(r.pullback_lower_bound.holds_p());
        assert_eq!(r.implication_violation(), None);
    }

    #[test]
    fn improvement_preconditions_are_named() {
        let err = improvement_report(&c3([1.0, 2.0, 4.0]), 0.5, 0.5).unwrap_err();
        assert_eq!(err, PropertyError::NotPHyponormal { p: 0.5 });
        let err = improvement_report(&identity(&[1.0]), 0.5, 0.75).unwrap_err();
        assert!(matches!(err, PropertyError::AlphaTooLarge { .. }));
        assert!(improvement_report(&identity(&[1.0, 2.0]), 0.5, 0.5).unwrap().holds_p());
        assert!(ups_inequality(&identity(&[1.0, 2.0]), 0.5, 0.5).unwrap().holds_p());
    }

    #[test]
    fn pq_monotonicity_examples() {
        assert!(pq_monotonicity(&c3([1.0, 2.0, 4.0]), 1.0, 0.5).unwrap().holds_p());
        assert!(pq_monotonicity(&identity(&[1.0]), 1.0, 0.5).unwrap().holds_p());
        assert!(matches!(pq_monotonicity(&identity(&[1.0]), 0.5, 1.0), Err(PropertyError::QNotBelowP { .. })));
    }

    #[test]
    fn check_names_round_trip() {
        for c in CheckKind::ALL {
            assert_eq!(c.name().parse::<CheckKind>().unwrap(), c);
        }
        assert!("bogus".parse::<CheckKind>().is_err());
    }
}
