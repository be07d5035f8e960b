//! Discrete measure spaces carrying a self-map `φ` and a weight `w`.
//!
//! The σ-algebra is always the power set of the point set and every point has
//! positive mass, so "almost everywhere `[μ]`" means "at every point" and
//! "almost everywhere `[μ_w]`" means "at every point where `w ≠ 0`".

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ext::ExtReal;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("nonpositive mass {mass} at point {point:?}")]
    NonpositiveMass { point: String, mass: f64 },
    #[error("non-finite {what} at point {point:?}")]
    NonFinite { point: String, what: &'static str },
    #[error("phi target not in point set: phi({point}) = {target}")]
    PhiTargetMissing { point: String, target: String },
    #[error("missing {what} for point {point:?}")]
    MissingEntry { point: String, what: &'static str },
    #[error("length mismatch: {points} points but {len} {what}")]
    LengthMismatch { points: usize, len: usize, what: &'static str },
    #[error("window not closed under phi: phi({point}) = {image} lies outside the window")]
    WindowNotClosed { point: String, image: String },
    #[error("malformed space document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Preimage `φ⁻¹({x})` of a point.
///
/// Finite fibers are listed explicitly; an infinite fiber is given by an
/// enumerator `k ↦ y_k` (`k = 0, 1, …`) visiting each preimage exactly once.
pub enum Fiber<'a, P: Clone> {
    Finite(Cow<'a, [P]>),
    Infinite(Box<dyn Fn(u64) -> P + 'a>),
}

impl<P: Clone> Fiber<'_, P> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Fiber::Finite(_))
    }

    /// The explicit points of a finite fiber.
    pub fn finite_points(&self) -> Option<&[P]> {
        match self {
            Fiber::Finite(pts) => Some(pts),
            Fiber::Infinite(_) => None,
        }
    }
}

/// The local structure every calculus routine needs: masses, the symbol, the
/// weight, and enumerable fibers.
///
/// Implemented by finite [`PointSpace`]s (points are indices) and by the lazily
/// enumerated gallery families.
pub trait DiscreteSystem {
    type Pt: Clone + Eq + Hash + Ord + fmt::Debug;

    fn mass(&self, x: &Self::Pt) -> f64;
    fn phi(&self, x: &Self::Pt) -> Self::Pt;
    fn weight(&self, x: &Self::Pt) -> Complex64;
    fn fiber(&self, x: &Self::Pt) -> Fiber<'_, Self::Pt>;
    fn label(&self, x: &Self::Pt) -> String;
}

/// A system with its weight replaced, e.g. by `w_α` or `w̃`. Fibers and masses
/// are those of the base system.
pub struct Reweighted<'a, S: DiscreteSystem> {
    base: &'a S,
    weight: Box<dyn Fn(&S::Pt) -> Complex64 + 'a>,
}

impl<'a, S: DiscreteSystem> Reweighted<'a, S> {
    pub fn new(base: &'a S, weight: impl Fn(&S::Pt) -> Complex64 + 'a) -> Self {
        Reweighted { base, weight: Box::new(weight) }
    }

    pub fn base(&self) -> &S {
        self.base
    }
}

impl<S: DiscreteSystem> DiscreteSystem for Reweighted<'_, S> {
    type Pt = S::Pt;

    fn mass(&self, x: &S::Pt) -> f64 {
        self.base.mass(x)
    }
    fn phi(&self, x: &S::Pt) -> S::Pt {
        self.base.phi(x)
    }
    fn weight(&self, x: &S::Pt) -> Complex64 {
        (self.weight)(x)
    }
    fn fiber(&self, x: &S::Pt) -> Fiber<'_, S::Pt> {
        self.base.fiber(x)
    }
    fn label(&self, x: &S::Pt) -> String {
        self.base.label(x)
    }
}

/// `φ⁻¹({x})` for every point of a finite space, each list in point order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberIndex {
    preimages: Vec<Vec<usize>>,
}

impl FiberIndex {
    pub fn from_phi(phi: &[usize]) -> Self {
        let mut preimages = vec![Vec::new(); phi.len()];
        for (y, &x) in phi.iter().enumerate() {
            preimages[x].push(y);
        }
        FiberIndex { preimages }
    }

    pub fn preimages(&self, x: usize) -> &[usize] {
        &self.preimages[x]
    }

    pub fn len(&self) -> usize {
        self.preimages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preimages.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.preimages.iter().map(Vec::as_slice)
    }
}

/// Field of extended nonnegative reals indexed by the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField(pub Vec<ExtReal>);

impl ScalarField {
    pub fn constant(n: usize, v: ExtReal) -> Self {
        ScalarField(vec![v; n])
    }

    pub fn from_f64(values: &[f64]) -> Self {
        ScalarField(values.iter().map(|&v| ExtReal::new(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ExtReal> + '_ {
        self.0.iter().copied()
    }

    pub fn map(&self, f: impl Fn(ExtReal) -> ExtReal) -> ScalarField {
        ScalarField(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.get()).collect()
    }

    /// JSON map `label → number`, with `"inf"` for `∞`.
    pub fn to_json(&self, space: &PointSpace) -> Value {
        let map = space
            .labels()
            .iter()
            .zip(&self.0)
            .map(|(l, v)| (l.clone(), serde_json::to_value(v).expect("ExtReal serializes")))
            .collect();
        Value::Object(map)
    }
}

impl Index<usize> for ScalarField {
    type Output = ExtReal;
    fn index(&self, i: usize) -> &ExtReal {
        &self.0[i]
    }
}

/// Complex weight indexed by the points of a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction(pub Vec<Complex64>);

impl WeightFunction {
    pub fn from_real(values: &[f64]) -> Self {
        WeightFunction(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.0.iter().copied()
    }

    /// Largest entrywise modulus of the difference, for oracle comparisons.
    pub fn max_abs_diff(&self, other: &WeightFunction) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self, space: &PointSpace) -> Value {
        let map = space
            .labels()
            .iter()
            .zip(&self.0)
            .map(|(l, w)| (l.clone(), serde_json::json!([w.re, w.im])))
            .collect();
        Value::Object(map)
    }
}

impl Index<usize> for WeightFunction {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// A finite discrete measure space `(X, 2^X, μ)` with symbol `φ` and weight `w`.
///
/// Immutable after construction; the fiber index is derived once.
#[derive(Debug, Clone)]
pub struct PointSpace {
    labels: Vec<String>,
    lookup: HashMap<String, usize>,
    mass: Vec<f64>,
    phi: Vec<usize>,
    weight: WeightFunction,
    fibers: FiberIndex,
}

impl PointSpace {
    /// Builds a space from point indices. `phi[i]` is the index of `φ(i)`.
    pub fn from_indices(
        labels: Vec<String>,
        mass: Vec<f64>,
        phi: Vec<usize>,
        weight: Vec<Complex64>,
    ) -> Result<Self, SpaceError> {
        let n = labels.len();
        for (len, what) in [(mass.len(), "masses"), (phi.len(), "phi entries"), (weight.len(), "weights")] {
            if len != n {
                return Err(SpaceError::LengthMismatch { points: n, len, what });
            }
        }
        let mut lookup = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(SpaceError::DuplicateLabel(l.clone()));
            }
        }
        for (i, &m) in mass.iter().enumerate() {
            if !m.is_finite() {
                return Err(SpaceError::NonFinite { point: labels[i].clone(), what: "mass" });
            }
            if m <= 0.0 {
                return Err(SpaceError::NonpositiveMass { point: labels[i].clone(), mass: m });
            }
        }
        for (i, &t) in phi.iter().enumerate() {
            if t >= n {
                return Err(SpaceError::PhiTargetMissing { point: labels[i].clone(), target: t.to_string() });
            }
        }
        for (i, w) in weight.iter().enumerate() {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(SpaceError::NonFinite { point: labels[i].clone(), what: "weight" });
            }
        }
        let fibers = FiberIndex::from_phi(&phi);
        Ok(PointSpace { labels, lookup, mass, phi, weight: WeightFunction(weight), fibers })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.lookup.get(label).copied()
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn phi_map(&self) -> &[usize] {
        &self.phi
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn fiber_index(&self) -> &FiberIndex {
        &self.fibers
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.labels.len()
    }

    /// The same space and symbol with a different weight.
    pub fn with_weights(&self, weight: WeightFunction) -> Self {
        assert_eq!(weight.len(), self.len(), "weight length must match the point count");
        PointSpace { weight, ..self.clone() }
    }

    /// `μ_w(Δ) = Σ_{x∈Δ} |w(x)|²·μ({x})`.
    pub fn mu_w(&self, set: impl IntoIterator<Item = usize>) -> f64 {
        set.into_iter().map(|x| self.weight[x].norm_sqr() * self.mass[x]).sum()
    }

    pub fn from_document(doc: &SpaceDocument) -> Result<Self, SpaceError> {
        let mut mass = Vec::with_capacity(doc.points.len());
        let mut phi = Vec::with_capacity(doc.points.len());
        let mut weight = Vec::with_capacity(doc.points.len());
        for p in &doc.points {
            let m = doc.mass.get(p).ok_or_else(|| SpaceError::MissingEntry { point: p.clone(), what: "mass" })?;
            let t = doc.phi.get(p).ok_or_else(|| SpaceError::MissingEntry { point: p.clone(), what: "phi" })?;
            let w = doc.w.get(p).ok_or_else(|| SpaceError::MissingEntry { point: p.clone(), what: "w" })?;
            mass.push(*m);
            phi.push(t.clone());
            weight.push(Complex64::new(w[0], w[1]));
        }
        build_space(doc.points.clone(), mass, phi, weight)
    }

    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let doc: SpaceDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }

    pub fn to_document(&self) -> SpaceDocument {
        SpaceDocument {
            points: self.labels.clone(),
            mass: self.points().map(|i| (self.labels[i].clone(), self.mass[i])).collect(),
            phi: self.points().map(|i| (self.labels[i].clone(), self.labels[self.phi[i]].clone())).collect(),
            w: self.points().map(|i| (self.labels[i].clone(), [self.weight[i].re, self.weight[i].im])).collect(),
        }
    }
}

impl DiscreteSystem for PointSpace {
    type Pt = usize;

    fn mass(&self, x: &usize) -> f64 {
        self.mass[*x]
    }
    fn phi(&self, x: &usize) -> usize {
        self.phi[*x]
    }
    fn weight(&self, x: &usize) -> Complex64 {
        self.weight[*x]
    }
    fn fiber(&self, x: &usize) -> Fiber<'_, usize> {
        Fiber::Finite(Cow::Borrowed(self.fibers.preimages(*x)))
    }
    fn label(&self, x: &usize) -> String {
        self.labels[*x].clone()
    }
}

/// The JSON space document
/// `{"points":[...], "mass":{pt:num}, "phi":{pt:pt}, "w":{pt:[re,im]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    pub points: Vec<String>,
    pub mass: BTreeMap<String, f64>,
    pub phi: BTreeMap<String, String>,
    pub w: BTreeMap<String, [f64; 2]>,
}

/// Validates and builds a finite space from labelled data.
pub fn build_space<L: Into<String>>(
    points: Vec<L>,
    masses: Vec<f64>,
    phi_map: Vec<L>,
    weights: Vec<Complex64>,
) -> Result<PointSpace, SpaceError> {
    let labels: Vec<String> = points.into_iter().map(Into::into).collect();
    let targets: Vec<String> = phi_map.into_iter().map(Into::into).collect();
    if targets.len() != labels.len() {
        return Err(SpaceError::LengthMismatch { points: labels.len(), len: targets.len(), what: "phi entries" });
    }
    let mut lookup = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if lookup.insert(l.as_str(), i).is_some() {
            return Err(SpaceError::DuplicateLabel(l.clone()));
        }
    }
    let phi = targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            lookup
                .get(t.as_str())
                .copied()
                .ok_or_else(|| SpaceError::PhiTargetMissing { point: labels[i].clone(), target: t.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    PointSpace::from_indices(labels, masses, phi, weights)
}

/// The fiber index of a finite space.
pub fn fibers(space: &PointSpace) -> &FiberIndex {
    space.fiber_index()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(ws: &[f64]) -> Vec<Complex64> {
        ws.iter().map(|&w| Complex64::new(w, 0.0)).collect()
    }

    #[test]
    fn s2_fibers() {
        let s2 = build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["0", "0"], real(&[1.0, 1.0])).unwrap();
        assert_eq!(fibers(&s2).preimages(0), &[0, 1]);
        assert!(fibers(&s2).preimages(1).is_empty());
    }

    #[test]
    fn c3_fibers_are_singletons() {
        let c3 = build_space(vec!["0", "1", "2"], vec![1.0; 3], vec!["1", "2", "0"], real(&[1.0, 2.0, 4.0])).unwrap();
        for x in 0..3 {
            assert_eq!(fibers(&c3).preimages(x), &[(x + 2) % 3]);
        }
    }

    #[test]
    fn swap_window_fibers() {
        // φ(2n) = 2n−1, φ(2n−1) = 2n on {1,2,3,4}
        let s = build_space(vec!["1", "2", "3", "4"], vec![1.0; 4], vec!["2", "1", "4", "3"], real(&[1.0; 4])).unwrap();
        let got: Vec<Vec<&str>> = (0..4)
            .map(|x| fibers(&s).preimages(x).iter().map(|&y| s.labels()[y].as_str()).collect())
            .collect();
        assert_eq!(got, vec![vec!["2"], vec!["1"], vec!["4"], vec!["3"]]);
    }

    #[test]
    fn construction_errors() {
        let err = build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["5", "0"], real(&[1.0, 1.0])).unwrap_err();
        assert!(err.to_string().contains("phi target not in point set"));
        let err = build_space(vec!["0", "0"], vec![1.0, 1.0], vec!["0", "0"], real(&[1.0, 1.0])).unwrap_err();
        assert!(matches!(err, SpaceError::DuplicateLabel(_)));
        let err = build_space(vec!["0"], vec![0.0], vec!["0"], real(&[1.0])).unwrap_err();
        assert!(matches!(err, SpaceError::NonpositiveMass { .. }));
        let err = build_space(vec!["0"], vec![f64::INFINITY], vec!["0"], real(&[1.0])).unwrap_err();
        assert!(matches!(err, SpaceError::NonFinite { .. }));
    }

    #[test]
    fn json_document_round_trip() {
        let text = r#"{"points":["a","b"],"mass":{"a":1.0,"b":2.5},"phi":{"a":"a","b":"a"},"w":{"a":[1,0],"b":[0,-2]}}"#;
        let s = PointSpace::from_json(text).unwrap();
        assert_eq!(s.phi_map(), &[0, 0]);
        assert_eq!(s.weights()[1], Complex64::new(0.0, -2.0));
        let again = PointSpace::from_document(&s.to_document()).unwrap();
        assert_eq!(again.masses(), s.masses());
        assert_eq!(again.weights(), s.weights());
    }

    #[test]
    fn json_loader_rejects_bad_documents() {
        let missing = r#"{"points":["a"],"mass":{},"phi":{"a":"a"},"w":{"a":[1,0]}}"#;
        assert!(matches!(PointSpace::from_json(missing), Err(SpaceError::MissingEntry { .. })));
        let negative = r#"{"points":["a"],"mass":{"a":-1},"phi":{"a":"a"},"w":{"a":[1,0]}}"#;
        assert!(matches!(PointSpace::from_json(negative), Err(SpaceError::NonpositiveMass { .. })));
        assert!(matches!(PointSpace::from_json("{"), Err(SpaceError::Json(_))));
    }

    #[test]
    fn mu_w_is_additive() {
        let s = build_space(vec!["0", "1", "2"], vec![1.0, 2.0, 0.5], vec!["0", "0", "1"], real(&[1.0, 3.0, 2.0])).unwrap();
        let whole = s.mu_w(0..3);
        assert!((whole - (s.mu_w([0]) + s.mu_w([1, 2]))).abs() < 1e-12);
        assert!((whole - (1.0 + 18.0 + 2.0)).abs() < 1e-12);
    }
}
