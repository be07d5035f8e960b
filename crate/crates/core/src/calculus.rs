//! Pointwise calculus of weighted composition operators `C_{φ,w} f = w·(f∘φ)`.
//!
//! On a discrete space every object reduces to fiber sums:
//!
//! * `h(x) = Σ_{y∈φ⁻¹(x)} |w(y)|² μ(y) / μ(x)` (Radon–Nikodym derivative of `μ_w∘φ⁻¹`),
//! * `E(f)∘φ⁻¹(x)` is the `|w|²μ`-weighted average of `f` over `φ⁻¹(x)`
//!   (zero when that fiber is `μ_w`-null), and `E(f)(z) = (E(f)∘φ⁻¹)(φ(z))`,
//! * `w_α = w·(h / h∘φ)^{α/2}` is the weight of the closed α-Aluthge transform,
//! * `w̃ = w / (h∘φ)^{1/2}` is the weight of the partial isometry in `C = U|C|`.
//!
//! [`Calculus`] evaluates these at single points of any [`DiscreteSystem`],
//! including lazily enumerated ones with infinite fibers. The free functions
//! below evaluate them on every point of a finite [`PointSpace`].

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use thiserror::Error;

use crate::ext::ExtReal;
use crate::series::{sum_series, SeriesConfig, SeriesVerdict};
use crate::space::{DiscreteSystem, Fiber, PointSpace, ScalarField, WeightFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("not densely defined: h = inf at point {point}")]
    NotDenselyDefined { point: String },
    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("vector has length {got}, space has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), CalculusError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CalculusError::AlphaOutOfRange(alpha))
    }
}

/// `|w(y)|²·μ({y})`, the `μ_w`-mass of a single point.
fn point_mu_w<S: DiscreteSystem>(sys: &S, y: &S::Pt) -> ExtReal {
    ExtReal::new(sys.weight(y).norm_sqr() * sys.mass(y))
}

/// Pointwise evaluator with memoised `h`.
///
/// Sums over infinite fibers go through [`sum_series`]; points whose sums could
/// not be classified are recorded and reported by [`Calculus::undecided`].
pub struct Calculus<'a, S: DiscreteSystem> {
    sys: &'a S,
    series: SeriesConfig,
    rn_cache: RefCell<HashMap<S::Pt, ExtReal>>,
    undecided: RefCell<BTreeSet<S::Pt>>,
}

impl<'a, S: DiscreteSystem> Calculus<'a, S> {
    pub fn new(sys: &'a S) -> Self {
        Self::with_series(sys, SeriesConfig::default())
    }

    pub fn with_series(sys: &'a S, series: SeriesConfig) -> Self {
        Calculus { sys, series, rn_cache: RefCell::new(HashMap::new()), undecided: RefCell::new(BTreeSet::new()) }
    }

    pub fn system(&self) -> &'a S {
        self.sys
    }

    /// Points at which some infinite-fiber sum could not be classified.
    pub fn undecided(&self) -> BTreeSet<S::Pt> {
        self.undecided.borrow().clone()
    }

    /// `Σ_{y∈φ⁻¹(x)} term(y)`.
    pub fn fiber_sum(&self, x: &S::Pt, term: impl Fn(&S::Pt) -> ExtReal) -> ExtReal {
        match self.sys.fiber(x) {
            Fiber::Finite(pts) => pts.iter().map(&term).sum(),
            Fiber::Infinite(enumerate) => {
                let s = sum_series(|k| term(&enumerate(k)), &self.series);
                if s.verdict == SeriesVerdict::Undecided {
                    self.undecided.borrow_mut().insert(x.clone());
                }
                s.value
            }
        }
    }

    /// `μ_w(φ⁻¹({x}))`.
    pub fn fiber_mass(&self, x: &S::Pt) -> ExtReal {
        self.fiber_sum(x, |y| point_mu_w(self.sys, y))
    }

    /// `h_{φ,w}(x)`.
    pub fn rn(&self, x: &S::Pt) -> ExtReal {
        if let Some(v) = self.rn_cache.borrow().get(x) {
            return *v;
        }
        let v = self.fiber_mass(x) / ExtReal::new(self.sys.mass(x));
        self.rn_cache.borrow_mut().insert(x.clone(), v);
        v
    }

    /// `(E(f)∘φ⁻¹)(x)`: the `μ_w`-average of `f` over `φ⁻¹({x})`, or `0` when
    /// the fiber is `μ_w`-null.
    pub fn pullback(&self, x: &S::Pt, f: impl Fn(&S::Pt) -> ExtReal) -> ExtReal {
        let den = self.fiber_mass(x);
        if den.is_zero() {
            return ExtReal::ZERO;
        }
        let num = self.fiber_sum(x, |y| f(y) * point_mu_w(self.sys, y));
        if den.is_infinite() {
            // only reachable where h(x) = ∞, i.e. outside dense definiteness
            return if num.is_infinite() { ExtReal::INFINITY } else { ExtReal::ZERO };
        }
        num / den
    }

    /// `E(f)(z) = (E(f)∘φ⁻¹)(φ(z))`.
    pub fn cond_exp(&self, z: &S::Pt, f: impl Fn(&S::Pt) -> ExtReal) -> ExtReal {
        self.pullback(&self.sys.phi(z), f)
    }

    /// `(E(h^α)∘φ⁻¹)(x)`.
    pub fn rn_pow_pullback(&self, x: &S::Pt, alpha: f64) -> ExtReal {
        self.pullback(x, |y| self.rn(y).powf(alpha))
    }

    /// `w_α(x) = w(x)·(h(x)/h(φ(x)))^{α/2}`, zero wherever `w(x) = 0` or `h(x) = 0`.
    pub fn aluthge_weight(&self, x: &S::Pt, alpha: f64) -> Result<Complex64, CalculusError> {
        let w = self.sys.weight(x);
        let (hx, hphi) = (self.rn(x), self.rn(&self.sys.phi(x)));
        for (v, p) in [(hx, x.clone()), (hphi, self.sys.phi(x))] {
            if v.is_infinite() {
                return Err(CalculusError::NotDenselyDefined { point: self.sys.label(&p) });
            }
        }
        if w == Complex64::new(0.0, 0.0) {
            return Ok(w);
        }
        // w(x) ≠ 0 forces h(φ(x)) ≥ |w(x)|² μ(x)/μ(φ(x)) > 0
        let ratio = hx / hphi;
        Ok(w * ratio.powf(alpha / 2.0).get())
    }

    /// `h_{φ,w_α}(x) = (E(h^α)∘φ⁻¹)(x)·h(x)^{1−α}`; at `α = 1` the factor
    /// `h^0` is the indicator of `{h > 0}`.
    pub fn aluthge_rn(&self, x: &S::Pt, alpha: f64) -> ExtReal {
        let hx = self.rn(x);
        let factor = if alpha == 1.0 { hx.powf_on_support(0.0) } else { hx.powf(1.0 - alpha) };
        self.rn_pow_pullback(x, alpha) * factor
    }

    /// `w̃(x) = w(x)/h(φ(x))^{1/2}`, zero where `w(x) = 0`.
    pub fn tilde_weight(&self, x: &S::Pt) -> Result<Complex64, CalculusError> {
        let w = self.sys.weight(x);
        let hphi = self.rn(&self.sys.phi(x));
        if hphi.is_infinite() {
            return Err(CalculusError::NotDenselyDefined { point: self.sys.label(&self.sys.phi(x)) });
        }
        if w == Complex64::new(0.0, 0.0) {
            return Ok(w);
        }
        Ok(w / hphi.sqrt().get())
    }

    /// `E(h^p∘φ / h^p)(z)`, the quantity bounded by one in the p-hyponormality
    /// criterion. Points of the fiber where `h = 0` but `w ≠ 0` contribute `∞`.
    pub fn hyponormality_ratio(&self, z: &S::Pt, p: f64) -> ExtReal {
        self.cond_exp(z, |y| self.rn(&self.sys.phi(y)).powf(p) / self.rn(y).powf(p))
    }
}

fn fields_from(space: &PointSpace, f: impl Fn(usize) -> ExtReal) -> ScalarField {
    ScalarField(space.points().map(f).collect())
}

fn ensure_len(space: &PointSpace, n: usize) -> Result<(), CalculusError> {
    if n == space.len() {
        Ok(())
    } else {
        Err(CalculusError::LengthMismatch { expected: space.len(), got: n })
    }
}

fn ensure_dense(space: &PointSpace, h: &ScalarField) -> Result<(), CalculusError> {
    match h.iter().position(|v| v.is_infinite()) {
        Some(x) => Err(CalculusError::NotDenselyDefined { point: space.labels()[x].clone() }),
        None => Ok(()),
    }
}

/// `h_{φ,w}` on every point.
pub fn radon_nikodym(space: &PointSpace) -> ScalarField {
    let calc = Calculus::new(space);
    fields_from(space, |x| calc.rn(&x))
}

/// `E_{φ,w}(f)` on every point.
pub fn cond_exp(space: &PointSpace, f: &ScalarField) -> ScalarField {
    let calc = Calculus::new(space);
    fields_from(space, |z| calc.cond_exp(&z, |y| f[*y]))
}

/// `E_{φ,w}(f)∘φ⁻¹` on every point (zero where `h = 0`).
pub fn cond_exp_pullback(space: &PointSpace, f: &ScalarField) -> ScalarField {
    let calc = Calculus::new(space);
    fields_from(space, |x| calc.pullback(&x, |y| f[*y]))
}

/// The Aluthge weight `w_α`.
pub fn aluthge_weight(space: &PointSpace, alpha: f64) -> Result<WeightFunction, CalculusError> {
    check_alpha(alpha)?;
    let calc = Calculus::new(space);
    space.points().map(|x| calc.aluthge_weight(&x, alpha)).collect::<Result<Vec<_>, _>>().map(WeightFunction)
}

/// `h_{φ,w_α} = E(h^α)∘φ⁻¹·h^{1−α}`; may contain `∞`.
pub fn aluthge_rn(space: &PointSpace, alpha: f64) -> Result<ScalarField, CalculusError> {
    check_alpha(alpha)?;
    let calc = Calculus::new(space);
    ensure_dense(space, &radon_nikodym(space))?;
    Ok(fields_from(space, |x| calc.aluthge_rn(&x, alpha)))
}

/// The weight `w̃` of the partial isometry `U = C_{φ,w̃}`.
pub fn partial_isometry_weight(space: &PointSpace) -> Result<WeightFunction, CalculusError> {
    let calc = Calculus::new(space);
    space.points().map(|x| calc.tilde_weight(&x)).collect::<Result<Vec<_>, _>>().map(WeightFunction)
}

/// `f_w = χ_{w≠0}·f/w`.
pub fn divide_by_weight(space: &PointSpace, f: &[Complex64]) -> Vec<Complex64> {
    f.iter()
        .zip(space.weights().iter())
        .map(|(&v, w)| if w == Complex64::new(0.0, 0.0) { Complex64::new(0.0, 0.0) } else { v / w })
        .collect()
}

/// Complex `E(f)∘φ⁻¹`: the same fiber average applied to real and imaginary parts.
pub fn cond_exp_pullback_complex(space: &PointSpace, f: &[Complex64]) -> Vec<Complex64> {
    let fibers = space.fiber_index();
    space
        .points()
        .map(|x| {
            let den: f64 = fibers.preimages(x).iter().map(|&y| space.weights()[y].norm_sqr() * space.masses()[y]).sum();
            if den == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let num: Complex64 = fibers
                .preimages(x)
                .iter()
                .map(|&y| f[y] * (space.weights()[y].norm_sqr() * space.masses()[y]))
                .sum();
            num / den
        })
        .collect()
}

/// Complex `E(f)`.
pub fn cond_exp_complex(space: &PointSpace, f: &[Complex64]) -> Vec<Complex64> {
    let g = cond_exp_pullback_complex(space, f);
    space.phi_map().iter().map(|&x| g[x]).collect()
}

/// `(C_{φ,w} f)(x) = w(x)·f(φ(x))`.
pub fn apply_operator(space: &PointSpace, f: &[Complex64]) -> Result<Vec<Complex64>, CalculusError> {
    ensure_len(space, f.len())?;
    Ok(space.points().map(|x| space.weights()[x] * f[space.phi_map()[x]]).collect())
}

/// `C*_{φ,w} f = h·E(f_w)∘φ⁻¹`.
pub fn apply_adjoint(space: &PointSpace, f: &[Complex64]) -> Result<Vec<Complex64>, CalculusError> {
    ensure_len(space, f.len())?;
    let h = radon_nikodym(space);
    ensure_dense(space, &h)?;
    let g = cond_exp_pullback_complex(space, &divide_by_weight(space, f));
    Ok(space.points().map(|x| g[x] * h[x].get()).collect())
}

/// `|C|^p f = h^{p/2}·f`.
pub fn apply_modulus_power(space: &PointSpace, p: f64, f: &[Complex64]) -> Result<Vec<Complex64>, CalculusError> {
    ensure_len(space, f.len())?;
    if p <= 0.0 {
        return Err(CalculusError::NonPositiveExponent(p));
    }
    let h = radon_nikodym(space);
    ensure_dense(space, &h)?;
    Ok(space.points().map(|x| f[x] * h[x].powf(p / 2.0).get()).collect())
}

/// `|C*|^p f = w·(h∘φ)^{p/2}·E(f_w)`.
pub fn apply_adjoint_modulus_power(
    space: &PointSpace,
    p: f64,
    f: &[Complex64],
) -> Result<Vec<Complex64>, CalculusError> {
    ensure_len(space, f.len())?;
    if p <= 0.0 {
        return Err(CalculusError::NonPositiveExponent(p));
    }
    let h = radon_nikodym(space);
    ensure_dense(space, &h)?;
    let e = cond_exp_complex(space, &divide_by_weight(space, f));
    Ok(space
        .points()
        .map(|x| space.weights()[x] * h[space.phi_map()[x]].powf(p / 2.0).get() * e[x])
        .collect())
}

/// The orthogonal projection `P f = w·E(f_w)` onto the closure of the range of `C_{φ,w}`.
pub fn projection(space: &PointSpace, f: &[Complex64]) -> Result<Vec<Complex64>, CalculusError> {
    ensure_len(space, f.len())?;
    let e = cond_exp_complex(space, &divide_by_weight(space, f));
    Ok(space.points().map(|x| space.weights()[x] * e[x]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_space;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn s2() -> PointSpace {
        build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap()
    }

    fn c3() -> PointSpace {
        build_space(vec!["0", "1", "2"], vec![1.0; 3], vec!["1", "2", "0"], vec![c(1.0), c(2.0), c(4.0)]).unwrap()
    }

    fn identity(ws: &[f64]) -> PointSpace {
        let labels: Vec<String> = (0..ws.len()).map(|i| i.to_string()).collect();
        build_space(labels.clone(), vec![1.0; ws.len()], labels, ws.iter().map(|&w| c(w)).collect()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rn_of_s2_and_c3() {
        assert_eq!(radon_nikodym(&s2()).as_f64(), vec![2.0, 0.0]);
        assert_eq!(radon_nikodym(&c3()).as_f64(), vec![16.0, 1.0, 4.0]);
    }

    #[test]
    fn rn_respects_masses() {
        // h(0) = (|w(0)|²·1 + |w(1)|²·4)/1
        let s = build_space(vec!["0", "1"], vec![1.0, 4.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(radon_nikodym(&s).as_f64(), vec![5.0, 0.0]);
    }

    #[test]
    fn cond_exp_on_s2_averages_the_fiber() {
        let f = ScalarField::from_f64(&[3.0, 5.0]);
        assert_eq!(cond_exp(&s2(), &f).as_f64(), vec![4.0, 4.0]);
    }

    #[test]
    fn cond_exp_of_constant_and_of_permutation() {
        let f = ScalarField::from_f64(&[7.0, 7.0, 7.0]);
        assert_eq!(cond_exp(&c3(), &f).as_f64(), vec![7.0; 3]);
        let g = ScalarField::from_f64(&[1.0, 2.0, 3.0]);
        assert_eq!(cond_exp(&c3(), &g).as_f64(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn cond_exp_ignores_infinite_values_on_null_points() {
        let s = build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["0", "0"], vec![c(1.0), c(0.0)]).unwrap();
        let f = ScalarField(vec![ExtReal::new(2.0), ExtReal::INFINITY]);
        assert_eq!(cond_exp(&s, &f).as_f64(), vec![2.0, 2.0]);
    }

    #[test]
    fn pullback_examples() {
        let h = radon_nikodym(&s2());
        assert_eq!(cond_exp_pullback(&s2(), &h).as_f64(), vec![1.0, 0.0]);
        let f = ScalarField::from_f64(&[1.0, 2.0, 3.0]);
        assert_eq!(cond_exp_pullback(&c3(), &f).as_f64(), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn aluthge_weight_examples() {
        let w = aluthge_weight(&s2(), 0.5).unwrap();
        assert_eq!(w.0, vec![c(1.0), c(0.0)]);
        let w1 = aluthge_weight(&c3(), 1.0).unwrap();
        for (a, b) in w1.iter().zip([4.0, 1.0, 2.0]) {
            assert!(close(a.re, b) && a.im == 0.0);
        }
        let id = identity(&[2.0, 3.0]);
        assert_eq!(aluthge_weight(&id, 0.3).unwrap(), *id.weights());
    }

    #[test]
    fn aluthge_weight_rejects_bad_alpha() {
        assert_eq!(aluthge_weight(&s2(), 0.0), Err(CalculusError::AlphaOutOfRange(0.0)));
        assert_eq!(aluthge_weight(&s2(), 1.5), Err(CalculusError::AlphaOutOfRange(1.5)));
    }

    #[test]
    fn aluthge_rn_examples() {
        let r = aluthge_rn(&s2(), 0.5).unwrap();
        assert!(close(r[0].get(), 1.0) && r[1].is_zero());
        let r = aluthge_rn(&c3(), 1.0).unwrap();
        for (a, b) in r.iter().zip([4.0, 16.0, 1.0]) {
            assert!(close(a.get(), b));
        }
        let id = identity(&[2.0, 3.0]);
        assert_eq!(aluthge_rn(&id, 0.5).unwrap().as_f64(), vec![4.0, 9.0]);
    }

    #[test]
    fn aluthge_rn_matches_rn_of_reweighted_space() {
        for space in [s2(), c3()] {
            for alpha in [0.25, 0.5, 1.0] {
                let direct = aluthge_rn(&space, alpha).unwrap();
                let reweighted = space.with_weights(aluthge_weight(&space, alpha).unwrap());
                for (a, b) in direct.iter().zip(radon_nikodym(&reweighted).iter()) {
                    assert!(close(a.get(), b.get()), "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn tilde_weight_examples() {
        let t = partial_isometry_weight(&s2()).unwrap();
        let r = 0.5f64.sqrt();
        assert!(close(t[0].re, r) && close(t[1].re, r));
        let t = partial_isometry_weight(&c3()).unwrap();
        for v in t.iter() {
            assert!(close(v.re, 1.0));
        }
        let t = partial_isometry_weight(&identity(&[2.0, 3.0])).unwrap();
        assert_eq!(t.0, vec![c(1.0), c(1.0)]);
    }

    #[test]
    fn operator_actions_on_zero_vector() {
        let z = vec![Complex64::new(0.0, 0.0); 3];
        let s = c3();
        assert_eq!(apply_operator(&s, &z).unwrap(), z);
        assert_eq!(apply_adjoint(&s, &z).unwrap(), z);
    }

    #[test]
    fn adjoint_modulus_on_s2() {
        let f = vec![c(1.0), c(0.0)];
        let g = apply_adjoint_modulus_power(&s2(), 1.0, &f).unwrap();
        let r = 0.5f64.sqrt();
        assert!(close(g[0].re, r) && close(g[1].re, r));
    }

    #[test]
    fn modulus_squared_is_adjoint_times_operator() {
        let s = build_space(vec!["a", "b", "c"], vec![1.0, 2.0, 0.5], vec!["b", "b", "a"], vec![
            Complex64::new(1.0, 1.0),
            Complex64::new(-0.5, 2.0),
            c(3.0),
        ])
        .unwrap();
        let f = vec![Complex64::new(0.3, -1.0), c(2.0), Complex64::new(0.0, 1.5)];
        let lhs = apply_modulus_power(&s, 2.0, &f).unwrap();
        let rhs = apply_adjoint(&s, &apply_operator(&s, &f).unwrap()).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_on_s2_and_c3() {
        let p = projection(&s2(), &[c(1.0), c(0.0)]).unwrap();
        assert_eq!(p, vec![c(0.5), c(0.5)]);
        let f = vec![c(1.0), Complex64::new(2.0, -1.0), c(3.0)];
        assert_eq!(projection(&c3(), &f).unwrap(), f);
    }

    #[test]
    fn length_mismatch_is_reported() {
        assert_eq!(apply_operator(&s2(), &[c(1.0)]), Err(CalculusError::LengthMismatch { expected: 2, got: 1 }));
        assert_eq!(apply_modulus_power(&s2(), 0.0, &[c(1.0), c(1.0)]), Err(CalculusError::NonPositiveExponent(0.0)));
    }
}
