//! Exact rational evaluation on finite spaces.
//!
//! Masses and weights are rationals (f64 inputs convert exactly), so `h`,
//! `E(f)∘φ⁻¹` and the quasinormality test are exact. `w_α` needs
//! `(h/h∘φ)^{α/2}`, which is computed exactly when that power is rational and
//! reported as `None` otherwise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::space::{FiberIndex, PointSpace};
use crate::verdict::{Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("value at point {point} is not a finite number")]
    NonFinite { point: String },
    #[error("mass at point {point} is not positive")]
    NonpositiveMass { point: String },
    #[error("{what} has length {len}, expected {expected}")]
    LengthMismatch { what: &'static str, len: usize, expected: usize },
    #[error("phi target {target} out of range at point {point}")]
    PhiOutOfRange { point: String, target: usize },
}

/// Exact complex number `re + i·im`.
pub type ExactComplex = (BigRational, BigRational);

fn from_f64(v: f64, label: &str) -> Result<BigRational, ExactError> {
    BigRational::from_float(v).ok_or_else(|| ExactError::NonFinite { point: label.to_string() })
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact `b`-th root of a nonnegative integer, if it exists.
fn exact_root(v: &BigInt, b: u32) -> Option<BigInt> {
    let r = v.nth_root(b);
    (num_traits::pow::pow(r.clone(), b as usize) == *v).then_some(r)
}

/// `r^e` for `r ≥ 0` and rational `e > 0`, when the result is rational.
pub fn rational_pow(r: &BigRational, e: &BigRational) -> Option<BigRational> {
    if r.is_zero() {
        return Some(BigRational::zero());
    }
    let a = e.numer().to_u32()?;
    let b = e.denom().to_u32()?;
    if a > 256 || b > 256 {
        return None;
    }
    let ra = num_traits::pow::pow(r.clone(), a as usize);
    Some(BigRational::new(exact_root(ra.numer(), b)?, exact_root(ra.denom(), b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSpace {
    labels: Vec<String>,
    mass: Vec<BigRational>,
    phi: Vec<usize>,
    weight: Vec<ExactComplex>,
    fibers: FiberIndex,
}

impl ExactSpace {
    pub fn new(labels: Vec<String>, mass: Vec<BigRational>, phi: Vec<usize>, weight: Vec<ExactComplex>) -> Result<Self, ExactError> {
        let n = labels.len();
        for (len, what) in [(mass.len(), "mass"), (phi.len(), "phi"), (weight.len(), "weight")] {
            if len != n {
                return Err(ExactError::LengthMismatch { what, len, expected: n });
            }
        }
        if let Some(i) = mass.iter().position(|m| !m.is_positive()) {
            return Err(ExactError::NonpositiveMass { point: labels[i].clone() });
        }
        if let Some(i) = phi.iter().position(|&t| t >= n) {
            return Err(ExactError::PhiOutOfRange { point: labels[i].clone(), target: phi[i] });
        }
        let fibers = FiberIndex::from_phi(&phi);
        Ok(ExactSpace { labels, mass, phi, weight, fibers })
    }

    /// Exact image of a floating-point space (every finite double is a rational).
    pub fn from_point_space(space: &PointSpace) -> Result<Self, ExactError> {
        let labels = space.labels().to_vec();
        let mass = space.masses().iter().zip(&labels).map(|(&m, l)| from_f64(m, l)).collect::<Result<_, _>>()?;
        let weight = space
            .weights()
            .iter()
            .zip(&labels)
            .map(|(w, l)| Ok((from_f64(w.re, l)?, from_f64(w.im, l)?)))
            .collect::<Result<_, _>>()?;
        Self::new(labels, mass, space.phi_map().to_vec(), weight)
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
        self.labels.iter().position(|l| l == label)
    }

    pub fn weights(&self) -> &[ExactComplex] {
        &self.weight
    }

    fn weight_sq(&self, y: usize) -> BigRational {
        let (re, im) = &self.weight[y];
        re * re + im * im
    }

    fn mu_w(&self, y: usize) -> BigRational {
        self.weight_sq(y) * &self.mass[y]
    }

    fn is_supported(&self, y: usize) -> bool {
        let (re, im) = &self.weight[y];
        !(re.is_zero() && im.is_zero())
    }

    /// `h(x) = Σ_{y∈φ⁻¹(x)} |w(y)|² μ(y) / μ(x)`.
    pub fn rn(&self) -> Vec<BigRational> {
        (0..self.len())
            .map(|x| self.fibers.preimages(x).iter().map(|&y| self.mu_w(y)).sum::<BigRational>() / &self.mass[x])
            .collect()
    }

    /// `E(f)∘φ⁻¹`, zero on `μ_w`-null fibers.
    pub fn pullback(&self, f: &[BigRational]) -> Vec<BigRational> {
        (0..self.len())
            .map(|x| {
                let fiber = self.fibers.preimages(x);
                let den: BigRational = fiber.iter().map(|&y| self.mu_w(y)).sum();
                if den.is_zero() {
                    return BigRational::zero();
                }
                fiber.iter().map(|&y| &f[y] * self.mu_w(y)).sum::<BigRational>() / den
            })
            .collect()
    }

    /// `E(f) = (E(f)∘φ⁻¹)∘φ`.
    pub fn cond_exp(&self, f: &[BigRational]) -> Vec<BigRational> {
        let g = self.pullback(f);
        self.phi.iter().map(|&x| g[x].clone()).collect()
    }

    /// `h∘φ = h` exactly at every point with `w ≠ 0`.
    pub fn is_quasinormal(&self) -> Verdict {
        let h = self.rn();
        for z in (0..self.len()).filter(|&z| self.is_supported(z)) {
            if h[self.phi[z]] != h[z] {
                let w = Witness::at(self.labels[z].clone())
                    .with("h o phi", h[self.phi[z]].to_f64().unwrap_or(f64::NAN))
                    .with("h", h[z].to_f64().unwrap_or(f64::NAN));
                return Verdict::fails(w, "h o phi differs from h (exact)");
            }
        }
        Verdict::holds("h o phi = h on supp w (exact)")
    }

    /// `w_α(x) = w(x)·(h(x)/h(φ(x)))^{α/2}`; `None` where the power is irrational.
    pub fn aluthge_weight(&self, alpha: &BigRational) -> Vec<Option<ExactComplex>> {
        let h = self.rn();
        let half = alpha / BigRational::from_integer(BigInt::from(2));
        (0..self.len())
            .map(|x| {
                if !self.is_supported(x) || h[x].is_zero() {
                    return Some((BigRational::zero(), BigRational::zero()));
                }
                let factor = rational_pow(&(&h[x] / &h[self.phi[x]]), &half)?;
                let (re, im) = &self.weight[x];
                Some((re * &factor, im * &factor))
            })
            .collect()
    }

    /// `w_α = w` exactly at every point. An irrational factor is never 1, so it counts as a difference.
    pub fn aluthge_fixed_point(&self, alpha: &BigRational) -> Verdict {
        for (x, wa) in self.aluthge_weight(alpha).into_iter().enumerate() {
            if wa.as_ref() != Some(&self.weight[x]) {
                let w = Witness::at(self.labels[x].clone()).with("|w|^2", self.weight_sq(x).to_f64().unwrap_or(f64::NAN));
                return Verdict::fails(w, "w_a differs from w (exact)");
            }
        }
        Verdict::holds("w_a = w (exact)")
    }
}

/// Exact conversion of a double; fails on NaN and infinities.
pub fn exact(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_space;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn c3(w: [f64; 3]) -> ExactSpace {
        let s = build_space(vec!["0", "1", "2"], vec![1.0; 3], vec!["1", "2", "0"], w.iter().map(|&v| c(v)).collect()).unwrap();
        ExactSpace::from_point_space(&s).unwrap()
    }

    fn int(v: i64) -> BigRational {
        rational(v, 1)
    }

    #[test]
    fn rn_and_pullback_are_exact() {
        let s = c3([1.0, 2.0, 4.0]);
        assert_eq!(s.rn(), vec![int(16), int(1), int(4)]);
        let s2 = ExactSpace::from_point_space(
            &build_space(vec!["0", "1"], vec![1.0, 3.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(s2.rn(), vec![int(4), int(0)]);
        // fiber of 0 carries μ_w masses 1 and 3
        assert_eq!(s2.pullback(&[int(2), int(6)]), vec![int(5), int(0)]);
        assert_eq!(s2.cond_exp(&[int(2), int(6)]), vec![int(5), int(5)]);
    }

    #[test]
    fn rational_powers() {
        assert_eq!(rational_pow(&rational(16, 9), &rational(1, 2)), Some(rational(4, 3)));
        assert_eq!(rational_pow(&rational(4, 1), &rational(3, 8)), None);
        assert_eq!(rational_pow(&rational(1, 1), &rational(3, 8)), Some(int(1)));
        assert_eq!(rational_pow(&rational(1, 16), &rational(3, 4)), Some(rational(1, 8)));
    }

    #[test]
    fn exact_aluthge_weight_of_c3() {
        let s = c3([1.0, 2.0, 4.0]);
        let w1: Vec<_> = s.aluthge_weight(&int(1)).into_iter().map(|w| w.unwrap().0).collect();
        assert_eq!(w1, vec![int(4), int(1), int(2)]);
        assert!(s.aluthge_weight(&rational(1, 4))[0].is_none());
        assert!(s.aluthge_fixed_point(&rational(1, 4)).fails_p());
        assert!(s.is_quasinormal().fails_p());
    }

    #[test]
    fn quasinormal_cycle_is_an_exact_fixed_point() {
        let s = c3([0.3, 0.3, 0.3]);
        assert!(s.is_quasinormal().holds_p());
        for a in [rational(1, 4), rational(1, 2), rational(3, 4), int(1)] {
            assert!(s.aluthge_fixed_point(&a).holds_p());
            let wa: Vec<_> = s.aluthge_weight(&a).into_iter().map(Option::unwrap).collect();
            assert_eq!(wa, s.weights().to_vec());
        }
    }
}
