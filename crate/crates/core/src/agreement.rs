//! Pointwise formulas against the dense-matrix oracle on one finite space.
//!
//! Functions on `L²(μ)` are compared with matrix actions in the orthonormal
//! basis `δ_x/√μ(x)`, i.e. after multiplying by `√μ`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::calculus::{self, CalculusError};
use crate::oracle::{self, DenseMatrix, OracleError};
use crate::properties::{self, PropertyError};
use crate::random::{random_vector, seeded_rng};
use crate::space::PointSpace;

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// Largest deviations (scaled by the size of `A`) and verdict disagreements.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Agreement {
    pub spaces: usize,
    /// `‖Δ_α(A) − A_{w_α}‖_F / (1 + ‖A‖_F)`.
    pub aluthge: f64,
    /// Partial isometry of the polar decomposition against the `w̃` matrix.
    pub polar_u: f64,
    /// `|A| f` against `h^{1/2} f`.
    pub modulus: f64,
    /// `A* f` against the closed-form adjoint.
    pub adjoint: f64,
    /// `|A*|^p f` against its closed form.
    pub adjoint_modulus: f64,
    /// `‖P² − P‖` and `‖P* − P‖` for the range projection.
    pub projection: f64,
    pub p_hyponormal_disagreements: usize,
    pub fixed_point_disagreements: usize,
}

/// Acceptance tolerances for [`Agreement::violations`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub aluthge: f64,
    pub polar: f64,
    pub adjoint: f64,
    pub modulus: f64,
    pub projection: f64,
    /// PSD floor of the hyponormality oracle, relative to `‖A‖^{2p}`.
    pub psd_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { aluthge: 1e-8, polar: 1e-9, adjoint: 1e-12, modulus: 1e-9, projection: 1e-10, psd_floor: 1e-9 }
    }
}

impl Agreement {
    pub fn merge(mut self, other: &Agreement) -> Agreement {
        self.spaces += other.spaces;
        self.aluthge = self.aluthge.max(other.aluthge);
        self.polar_u = self.polar_u.max(other.polar_u);
        self.modulus = self.modulus.max(other.modulus);
        self.adjoint = self.adjoint.max(other.adjoint);
        self.adjoint_modulus = self.adjoint_modulus.max(other.adjoint_modulus);
        self.projection = self.projection.max(other.projection);
        self.p_hyponormal_disagreements += other.p_hyponormal_disagreements;
        self.fixed_point_disagreements += other.fixed_point_disagreements;
        self
    }

    /// Names of the comparisons that exceed their tolerance.
    pub fn violations(&self, tol: &Tolerances) -> Vec<&'static str> {
        let mut out = Vec::new();
        let checks = [
            ("aluthge", self.aluthge, tol.aluthge),
            ("polar_u", self.polar_u, tol.polar),
            ("modulus", self.modulus, tol.polar),
            ("adjoint", self.adjoint, tol.adjoint),
            ("adjoint_modulus", self.adjoint_modulus, tol.modulus),
            ("projection", self.projection, tol.projection),
        ];
        for (name, value, limit) in checks {
            if !(value <= limit) {
                out.push(name);
            }
        }
        if self.p_hyponormal_disagreements > 0 {
            out.push("p_hyponormal_disagreements");
        }
        if self.fixed_point_disagreements > 0 {
            out.push("fixed_point_disagreements");
        }
        out
    }
}

fn coords(s: &PointSpace, f: &[Complex64]) -> Vec<Complex64> {
    f.iter().zip(s.masses()).map(|(v, m)| v * m.sqrt()).collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Runs every comparison on `space`, with test vectors drawn from `seed`.
pub fn compare(space: &PointSpace, alphas: &[f64], ps: &[f64], seed: u64, tol: &Tolerances) -> Result<Agreement, AgreementError> {
    let a = matrix_of_checked(space)?;
    let scale = a.max_abs().max(1.0);
    let mut out = Agreement { spaces: 1, ..Agreement::default() };

    for &alpha in alphas {
        let oracle = oracle::aluthge_matrix(&a, alpha)?;
        let direct = oracle::matrix_of(&space.with_weights(calculus::aluthge_weight(space, alpha)?));
        out.aluthge = out.aluthge.max((&oracle - &direct).frobenius_norm() / (1.0 + a.frobenius_norm()));
        let fixed = properties::aluthge_fixed_point(space, alpha)?.holds_p();
        out.fixed_point_disagreements += usize::from(fixed != properties::is_quasinormal(space).holds_p());
    }

    let polar = oracle::polar(&a)?;
    let u = oracle::matrix_of(&space.with_weights(calculus::partial_isometry_weight(space)?));
    out.polar_u = (&polar.u - &u).max_abs();

    let ad = a.adjoint();
    let aat = &a * &ad;
    let mut rng = seeded_rng(seed);
    for _ in 0..10 {
        let f = random_vector(&mut rng, space.len());
        let fc = coords(space, &f);
        let nf = norm(&f).max(1.0);
        let m = polar.modulus.apply(&fc);
        out.modulus = out.modulus.max(max_diff(&m, &coords(space, &calculus::apply_modulus_power(space, 1.0, &f)?)) / (scale * nf));
        let adj = coords(space, &calculus::apply_adjoint(space, &f)?);
        out.adjoint = out.adjoint.max(max_diff(&ad.apply(&fc), &adj) / (scale * nf));
        for p in [0.5, 1.0, 2.0] {
            let power = oracle::matrix_power_psd(&aat, p / 2.0)?;
            let direct = coords(space, &calculus::apply_adjoint_modulus_power(space, p, &f)?);
            out.adjoint_modulus = out.adjoint_modulus.max(max_diff(&power.apply(&fc), &direct) / (scale.powf(p) * nf));
        }
    }

    for &p in ps {
        let crit = properties::is_p_hyponormal(space, p)?.holds_p();
        let orac = oracle::hyponormality_oracle(&a, p, tol.psd_floor)?.holds_p();
        out.p_hyponormal_disagreements += usize::from(crit != orac);
    }

    out.projection = projection_error(space)?;
    Ok(out)
}

fn matrix_of_checked(space: &PointSpace) -> Result<DenseMatrix, AgreementError> {
    properties::require_dense(&calculus::Calculus::new(space), &space.points().collect::<Vec<_>>())?;
    Ok(oracle::matrix_of(space))
}

/// `max(‖P² − P‖_max, ‖P* − P‖_max)` for the matrix of the range projection.
pub fn projection_error(space: &PointSpace) -> Result<f64, CalculusError> {
    let n = space.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        f[j] = Complex64::new(1.0 / space.masses()[j].sqrt(), 0.0);
        cols.push(coords(space, &calculus::projection(space, &f)?));
    }
    let p = DenseMatrix::from_fn(n, |i, j| cols[j][i]);
    Ok((&(&p * &p) - &p).max_abs().max((&p.adjoint() - &p).max_abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_corpus, RandomSpaceConfig};
    use crate::space::build_space;

    #[test]
    fn s2_agrees_exactly() {
        let c = |v: f64| Complex64::new(v, 0.0);
        let s2 = build_space(vec!["0", "1"], vec![1.0, 1.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap();
        let r = compare(&s2, &[0.25, 0.5, 0.75, 1.0], &[1.0], 1, &Tolerances::default()).unwrap();
        assert!(r.aluthge <= 1e-12, "{r:?}");
        assert!(r.violations(&Tolerances::default()).is_empty());
    }

    #[test]
    fn small_corpus_has_no_violations() {
        let tol = Tolerances::default();
        let total = random_corpus(9, 30, &RandomSpaceConfig::default())
            .iter()
            .enumerate()
            .map(|(i, s)| compare(s, &[0.5, 1.0], &[0.5, 1.0], i as u64, &tol).unwrap())
            .fold(Agreement::default(), |acc, r| acc.merge(&r));
        assert_eq!(total.spaces, 30);
        assert!(total.violations(&tol).is_empty(), "{total:?}");
    }
}
