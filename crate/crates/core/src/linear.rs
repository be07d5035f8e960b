//! Composition operators induced by invertible linear maps of `ℝⁿ`.
//!
//! The measure is `ρ(‖x‖²)·dx` with `ρ` entire with nonnegative Taylor
//! coefficients, and `h_φ(x) = ρ(‖φ⁻¹x‖²) / (|det φ|·ρ(‖x‖²))`. Nothing is
//! discretized; everything is evaluated in closed form.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

use crate::verdict::{Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("point has dimension {got}, map has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial density needs a positive coefficient of degree at least one")]
    DegenerateDensity,
    #[error("negative coefficient in the density")]
    NegativeCoefficient,
    #[error("theta must lie in (0, inf) and differ from 1, got {0}")]
    ThetaOutOfRange(f64),
    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
}

/// The density profile `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Rho {
    Exp,
    /// Coefficients `a_0, a_1, …` of a polynomial.
    Polynomial(Vec<f64>),
}

impl Rho {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self, LinearError> {
        if coeffs.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(LinearError::NegativeCoefficient);
        }
        if !coeffs.iter().skip(1).any(|&c| c > 0.0) {
            return Err(LinearError::DegenerateDensity);
        }
        Ok(Rho::Polynomial(coeffs))
    }

    /// `ln ρ(t)` for `t ≥ 0`.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match self {
            Rho::Exp => t,
            Rho::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &a| acc * t + a).ln(),
        }
    }
}

/// An invertible linear map together with the density profile.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    phi: DMatrix<f64>,
    inverse: DMatrix<f64>,
    abs_det: f64,
    rho: Rho,
}

impl LinearSystem {
    pub fn new(phi: DMatrix<f64>, rho: Rho) -> Result<Self, LinearError> {
        if !phi.is_square() {
            return Err(LinearError::NotSquare(phi.nrows(), phi.ncols()));
        }
        let abs_det = phi.determinant().abs();
        let inverse = phi.clone().try_inverse().ok_or(LinearError::Singular)?;
        if abs_det == 0.0 {
            return Err(LinearError::Singular);
        }
        Ok(LinearSystem { phi, inverse, abs_det, rho })
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    fn vector(&self, x: &[f64]) -> Result<DVector<f64>, LinearError> {
        if x.len() != self.dim() {
            return Err(LinearError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(DVector::from_column_slice(x))
    }

    /// `ln h_φ(x)`.
    pub fn ln_rn(&self, x: &[f64]) -> Result<f64, LinearError> {
        let v = self.vector(x)?;
        let pre = &self.inverse * &v;
        Ok(self.rho.ln_eval(pre.norm_squared()) - self.rho.ln_eval(v.norm_squared()) - self.abs_det.ln())
    }

    /// `h_φ(x)`.
    pub fn rn(&self, x: &[f64]) -> Result<f64, LinearError> {
        Ok(self.ln_rn(x)?.exp())
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, LinearError> {
        Ok((&self.phi * self.vector(x)?).iter().copied().collect())
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Result<Vec<f64>, LinearError> {
        Ok((&self.inverse * self.vector(x)?).iter().copied().collect())
    }

    /// `ln h_{φ,1_α}(x) = α·ln h(φ⁻¹x) + (1−α)·ln h(x)` (`E` is the identity since `φ` is invertible).
    pub fn ln_aluthge_rn(&self, x: &[f64], alpha: f64) -> Result<f64, LinearError> {
        let pre = self.apply_inverse(x)?;
        Ok(alpha * self.ln_rn(&pre)? + (1.0 - alpha) * self.ln_rn(x)?)
    }

    /// Boundedness: always for polynomial `ρ`, otherwise iff `‖φ⁻¹‖ ≤ 1`.
    pub fn bounded(&self) -> Verdict {
        match self.rho {
            Rho::Polynomial(_) => Verdict::holds("polynomial density: always bounded"),
            Rho::Exp => {
                let norm = self.inverse.clone().svd(false, false).singular_values.max();
                if norm <= 1.0 + 1e-12 {
                    Verdict::holds(format!("||phi^-1|| = {norm} <= 1"))
                } else {
                    Verdict::fails(Witness::at("phi^-1").with("norm", norm), "||phi^-1|| > 1")
                }
            }
        }
    }

    /// Sample points `r·(cos t, sin t, …)` on `directions` rays at radii `2^k`, `k < radii`.
    fn samples(&self, directions: usize, radii: u32) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut out = Vec::new();
        for d in 0..directions {
            let t = std::f64::consts::PI * d as f64 / directions as f64;
            let mut u = vec![0.0; n];
            u[0] = t.cos();
            if n > 1 {
                u[1] = t.sin();
            }
            for k in 0..radii {
                let r = 2f64.powi(k as i32 - 2);
                out.push(u.iter().map(|c| c * r).collect());
            }
        }
        out
    }

    /// Sup of `h^{1−α}/(1 + E(h^α)∘φ⁻¹·h^{1−α})` over sample rays; fails once it passes `1e12`.
    pub fn closed_criterion(&self, alpha: f64) -> Result<Verdict, LinearError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(LinearError::AlphaOutOfRange(alpha));
        }
        let mut sup = 0.0_f64;
        for x in self.samples(64, 24) {
            let ln_top = (1.0 - alpha) * self.ln_rn(&x)?;
            let ln_prod = self.ln_aluthge_rn(&x, alpha)?;
            // top / (1 + e^{ln_prod}) computed in log space
            let ln_ratio = ln_top - ln_prod.max(0.0) - (1.0 + (-ln_prod.abs()).exp()).ln();
            let ratio = ln_ratio.exp();
            if ratio > 1e12 {
                let w = Witness::at(format!("{x:?}")).with("ratio", ratio);
                return Ok(Verdict::fails(w, "ratio grows without bound along a ray"));
            }
            sup = sup.max(ratio);
        }
        Ok(Verdict::holds_with(sup, "sup over sampled rays"))
    }
}

/// `φ(x₁, x₂) = (θx₂, x₁)` with `ρ = exp`.
pub fn swap_scale_system(theta: f64) -> Result<LinearSystem, LinearError> {
    if !(theta > 0.0 && theta.is_finite() && theta != 1.0) {
        return Err(LinearError::ThetaOutOfRange(theta));
    }
    LinearSystem::new(DMatrix::from_row_slice(2, 2, &[0.0, theta, 1.0, 0.0]), Rho::Exp)
}

/// `h_φ(x)` for an invertible `φ` given as a row-major `n×n` matrix.
pub fn rn_linear_gaussian(phi_matrix: &[f64], rho: Rho, x: &[f64]) -> Result<f64, LinearError> {
    let n = x.len();
    if phi_matrix.len() != n * n {
        return Err(LinearError::DimensionMismatch { expected: n * n, got: phi_matrix.len() });
    }
    LinearSystem::new(DMatrix::from_row_slice(n, n, phi_matrix), rho)?.rn(x)
}

/// The two inequalities deciding hyponormality of `C_{φ,1_α}` for the swap-scale map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stages {
    /// `(1−2α)θ² + 2α − 1 ≤ 0`.
    pub first: bool,
    /// `θ⁴(α−1) + θ² − α ≤ 0`.
    pub second: bool,
}

impl Stages {
    pub fn feasible(self) -> bool {
        self.first && self.second
    }
}

/// Exact evaluation of both inequalities.
pub fn stages_feasible_exact(alpha: &BigRational, theta: &BigRational) -> Stages {
    let one = BigRational::from_integer(BigInt::from(1));
    let two = BigRational::from_integer(BigInt::from(2));
    let t2 = theta * theta;
    let first = (&one - &two * alpha) * &t2 + &two * alpha - &one;
    let second = &t2 * &t2 * (alpha - &one) + &t2 - alpha;
    Stages { first: !first.is_positive(), second: !second.is_positive() }
}

/// Double-precision evaluation, with relative slack `1e−12`.
pub fn stages_feasible(alpha: f64, theta: f64) -> Stages {
    let t2 = theta * theta;
    let first = (1.0 - 2.0 * alpha) * t2 + 2.0 * alpha - 1.0;
    let second = t2 * t2 * (alpha - 1.0) + t2 - alpha;
    let slack = 1e-12 * (1.0 + t2 * t2);
    Stages { first: first <= slack, second: second <= slack }
}

/// Exponent whose sign decides `h'(φx) ≤ h'(x)` for `h' = h_{φ,1_α}`:
/// `(α−1)‖φx‖² + (2−3α)‖x‖² + (3α−1)‖φ⁻¹x‖² − α‖φ⁻²x‖²`.
pub fn dunkierka_exponent(sys: &LinearSystem, alpha: f64, x: &[f64]) -> Result<f64, LinearError> {
    let sq = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
    let fx = sys.apply(x)?;
    let ix = sys.apply_inverse(x)?;
    let iix = sys.apply_inverse(&ix)?;
    Ok((alpha - 1.0) * sq(&fx) + (2.0 - 3.0 * alpha) * sq(x) + (3.0 * alpha - 1.0) * sq(&ix) - alpha * sq(&iix))
}

/// Hyponormality of `C_{φ,1_α}` tested pointwise as `h'(φx) ≤ h'(x)` on a sample grid.
/// Returns the first violating sample, if any.
pub fn hyponormal_on_samples(sys: &LinearSystem, alpha: f64, samples: &[Vec<f64>]) -> Result<Option<Vec<f64>>, LinearError> {
    for x in samples {
        let here = sys.ln_aluthge_rn(x, alpha)?;
        let there = sys.ln_aluthge_rn(&sys.apply(x)?, alpha)?;
        let scale = 1.0 + x.iter().map(|c| c * c).sum::<f64>();
        if there - here > 1e-12 * scale {
            return Ok(Some(x.clone()));
        }
    }
    Ok(None)
}

/// Grid `{−2, −1.5, …, 2}²` minus the origin.
pub fn sample_grid() -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.5).collect();
    let mut out = Vec::new();
    for &a in &ticks {
        for &b in &ticks {
            if a != 0.0 || b != 0.0 {
                out.push(vec![a, b]);
            }
        }
    }
    out
}

/// `α ∈ {k/100 : k = lo..=hi}` at which the system is feasible, as exact rationals.
pub fn feasible_alpha_grid(theta: &BigRational, lo: i64, hi: i64) -> Vec<BigRational> {
    (lo..=hi)
        .map(|k| BigRational::new(BigInt::from(k), BigInt::from(100)))
        .filter(|a| stages_feasible_exact(a, theta).feasible())
        .collect()
}

/// True when `set` is a run of consecutive grid steps of size `1/100`.
pub fn is_grid_interval(set: &[BigRational]) -> bool {
    let step = BigRational::new(BigInt::from(1), BigInt::from(100));
    set.windows(2).all(|w| &w[1] - &w[0] == step) && !set.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;

    #[test]
    fn identity_map_has_unit_derivative() {
        for rho in [Rho::Exp, Rho::polynomial(vec![1.0, 2.0, 0.5]).unwrap()] {
            let h = rn_linear_gaussian(&[1.0, 0.0, 0.0, 1.0], rho, &[0.3, -1.2]).unwrap();
            assert!((h - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_scale_closed_form() {
        let theta = 0.5;
        let sys = swap_scale_system(theta).unwrap();
        for x in [[1.0, 0.0], [0.7, -2.0], [-1.5, 0.25]] {
            let expect = (1.0 / theta) * (x[0] * x[0] * (1.0 / (theta * theta) - 1.0)).exp();
            let got = sys.rn(&x).unwrap();
            assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
        }
    }

    #[test]
    fn errors() {
        assert_eq!(rn_linear_gaussian(&[1.0, 2.0, 2.0, 4.0], Rho::Exp, &[1.0, 1.0]).unwrap_err(), LinearError::Singular);
        assert!(swap_scale_system(1.0).is_err());
        assert!(swap_scale_system(-0.5).is_err());
        assert!(Rho::polynomial(vec![1.0]).is_err());
        assert!(Rho::polynomial(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn boundedness_follows_the_inverse_norm() {
        assert!(swap_scale_system(0.5).unwrap().bounded().fails_p());
        assert!(swap_scale_system(2.0).unwrap().bounded().holds_p());
        let poly = LinearSystem::new(DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 1.0, 0.0]), Rho::polynomial(vec![1.0, 1.0]).unwrap());
        assert!(poly.unwrap().bounded().holds_p());
    }

    #[test]
    fn involution_closed_criterion_fails_when_unbounded() {
        // φ(x₁,x₂) = (2x₂, x₁/2) is an involution with ‖φ‖ = 2
        let sys = LinearSystem::new(DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]), Rho::Exp).unwrap();
        for x in [[1.0, 2.0], [0.3, -0.4]] {
            // E(h^{1/2})∘φ⁻¹·h^{1/2} ≡ 1/|det φ| = 1
            assert!(sys.ln_aluthge_rn(&x, 0.5).unwrap().abs() < 1e-12);
        }
        assert!(sys.closed_criterion(0.5).unwrap().fails_p());
        let bounded = swap_scale_system(2.0).unwrap();
        assert!(bounded.closed_criterion(0.5).unwrap().holds_p());
    }

    #[test]
    fn stages_examples() {
        let half = rational(1, 2);
        for k in 1..=9 {
            assert!(stages_feasible_exact(&half, &rational(k, 10)).feasible());
        }
        let s = stages_feasible_exact(&rational(3, 5), &half);
        assert!(!s.first && !s.feasible());
        assert!(!stages_feasible(0.6, 0.5).feasible());
        assert!(stages_feasible(0.5, 0.5).feasible());
    }

    #[test]
    fn feasible_set_is_an_interval_ending_at_one_half() {
        for k in 1..=9 {
            let theta = rational(k, 10);
            let set = feasible_alpha_grid(&theta, 1, 50);
            assert!(is_grid_interval(&set));
            assert_eq!(set.last(), Some(&rational(1, 2)));
            // lower end is the first grid point above θ²/(1+θ²)
            let r = &theta * &theta / (rational(1, 1) + &theta * &theta);
            assert!(set[0] >= r && &set[0] - rational(1, 100) < r);
        }
    }

    #[test]
    fn dunkierka_agrees_with_stages_and_with_direct_evaluation() {
        for k in [1, 3, 5, 7, 9] {
            let theta = k as f64 / 10.0;
            let sys = swap_scale_system(theta).unwrap();
            for a in [0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.6, 0.8, 1.0] {
                let feasible = stages_feasible(a, theta).feasible();
                let violation = hyponormal_on_samples(&sys, a, &sample_grid()).unwrap();
                assert_eq!(feasible, violation.is_none(), "theta {theta} alpha {a}");
                for x in sample_grid() {
                    let e = dunkierka_exponent(&sys, a, &x).unwrap();
                    let direct = sys.ln_aluthge_rn(&sys.apply(&x).unwrap(), a).unwrap() - sys.ln_aluthge_rn(&x, a).unwrap();
                    assert!((e - direct).abs() < 1e-9 * (1.0 + e.abs()), "{e} vs {direct}");
                }
            }
        }
    }
}
