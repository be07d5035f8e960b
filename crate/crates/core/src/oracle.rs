//! Dense-matrix oracle.
//!
//! A finite space is turned into the matrix of `C_{φ,w}` in the orthonormal
//! basis `e_x = χ_{x}/√μ(x)`, and the polar decomposition, fractional powers and
//! the Aluthge transform `Δ_α(A) = |A|^α U |A|^{1−α}` are computed from a
//! cyclic Jacobi eigendecomposition. Nothing here uses the fiber formulas of
//! [`crate::calculus`], so agreement between the two is a genuine check.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde_json::Value;
use thiserror::Error;

use crate::space::PointSpace;
use crate::verdict::{Verdict, Witness};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance for the Hermitian precondition.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below `−PSD_FLOOR·λ_max` make a matrix non-PSD.
pub const PSD_FLOOR: f64 = 1e-10;
/// Eigenvalues below `RANK_TOL·λ_max` are treated as exact zeros by fractional powers.
pub const RANK_TOL: f64 = 1e-12;
/// Relative cutoff for the pseudo-inverse of `|A|` in the polar decomposition.
pub const POLAR_CUTOFF: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },
    #[error("Jacobi iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(d: &[Complex64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        DenseMatrix { dim: self.dim, entries: self.entries.iter().map(|v| v * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |S_ij − conj(S_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermitian_deviation() <= rel_tol * self.frobenius_norm().max(1.0)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length must match the matrix dimension");
        (0..self.dim).map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    /// Nested `[[[re, im], …], …]` rows.
    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.dim)
                .map(|i| Value::Array((0..self.dim).map(|j| serde_json::json!([self[(i, j)].re, self[(i, j)].im])).collect()))
                .collect(),
        )
    }

    /// Parses the nested `[re, im]` format; rejects ragged or non-square input.
    pub fn from_json(v: &Value) -> Option<Self> {
        let rows = v.as_array()?;
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array()?;
            if row.len() != dim {
                return None;
            }
            for (j, e) in row.iter().enumerate() {
                let pair = e.as_array()?;
                if pair.len() != 2 {
                    return None;
                }
                m[(i, j)] = Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?);
            }
        }
        Some(m)
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({})", self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|j| format!("{:.6}", self[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in sum");
        DenseMatrix { dim: self.dim, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in difference");
        DenseMatrix { dim: self.dim, entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect() }
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl EigenDecomposition {
    /// `V·diag(g(λ))·V*`.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.vectors.dim();
        let d: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        DenseMatrix::from_fn(n, |i, j| (0..n).map(|k| self.vectors[(i, k)] * d[k] * self.vectors[(j, k)].conj()).sum())
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.map(|l| l)
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        (0..self.vectors.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Largest eigenvalue modulus.
    pub fn scale(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }
}

/// The matrix of `C_{φ,w}`: `A[x, φ(x)] = w(x)·√(μ(x)/μ(φ(x)))`.
pub fn matrix_of(space: &PointSpace) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(space.len());
    for x in space.points() {
        let y = space.phi_map()[x];
        a[(x, y)] = space.weights()[x] * (space.masses()[x] / space.masses()[y]).sqrt();
    }
    a
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix with complex rotations.
pub fn sym_eig(s: &DenseMatrix) -> Result<EigenDecomposition, OracleError> {
    let n = s.dim();
    let dev = s.hermitian_deviation();
    if dev > HERMITIAN_TOL * s.frobenius_norm().max(1.0) {
        return Err(OracleError::NonHermitian { deviation: dev });
    }
    let mut a = DenseMatrix::from_fn(n, |i, j| (s[(i, j)] + s[(j, i)].conj()) * 0.5);
    let mut v = DenseMatrix::identity(n);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                if mag <= f64::EPSILON * 1e-2 * (app.abs() * aqq.abs()).sqrt() {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                let pc = phase.conj();
                // A ← A·J, V ← V·J with J = diag(1, conj(phase))·[[c, s], [−s, c]]
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * c - akq * pc * sn;
                    a[(k, q)] = akp * sn + akq * pc * c;
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * c - vkq * pc * sn;
                    v[(k, q)] = vkp * sn + vkq * pc * c;
                }
                // A ← J*·A
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = apk * c - aqk * phase * sn;
                    a[(q, k)] = apk * sn + aqk * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(OracleError::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DenseMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition { eigenvalues, vectors })
}

fn psd_power_from(eig: &EigenDecomposition, t: f64) -> Result<DenseMatrix, OracleError> {
    let scale = eig.scale();
    if let Some(&l) = eig.eigenvalues.iter().find(|&&l| l < -PSD_FLOOR * scale) {
        return Err(OracleError::NotPsd { eigenvalue: l });
    }
    let cutoff = RANK_TOL * scale;
    Ok(eig.map(|l| if l <= cutoff { 0.0 } else { l.powf(t) }))
}

/// `S^t` for a PSD matrix `S` and `t > 0`.
pub fn matrix_power_psd(s: &DenseMatrix, t: f64) -> Result<DenseMatrix, OracleError> {
    if t <= 0.0 {
        return Err(OracleError::NonPositiveExponent(t));
    }
    psd_power_from(&sym_eig(s)?, t)
}

/// `A = U·M` with `M = (A*A)^{1/2}` and `U` a partial isometry, `ker U = ker A`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub u: DenseMatrix,
    pub modulus: DenseMatrix,
}

pub fn polar(a: &DenseMatrix) -> Result<Polar, OracleError> {
    let eig = sym_eig(&(&a.adjoint() * a))?;
    let modulus = psd_power_from(&eig, 0.5)?;
    let s_max = eig.scale().sqrt();
    let pinv = eig.map(|l| {
        let s = l.max(0.0).sqrt();
        if s > POLAR_CUTOFF * s_max {
            1.0 / s
        } else {
            0.0
        }
    });
    Ok(Polar { u: a * &pinv, modulus })
}

/// `Δ_α(A) = |A|^α·U·|A|^{1−α}`.
pub fn aluthge_matrix(a: &DenseMatrix, alpha: f64) -> Result<DenseMatrix, OracleError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(OracleError::AlphaOutOfRange(alpha));
    }
    let p = polar(a)?;
    let eig = sym_eig(&(&a.adjoint() * a))?;
    let left = psd_power_from(&eig, alpha / 2.0)?;
    let lu = &left * &p.u;
    if alpha == 1.0 {
        return Ok(lu);
    }
    let right = psd_power_from(&eig, (1.0 - alpha) / 2.0)?;
    Ok(&lu * &right)
}

/// Decides `T − S ⪰ 0` up to `tol`: holds iff the least eigenvalue of `T − S` is `≥ −tol`.
pub fn psd_order_test(s: &DenseMatrix, t: &DenseMatrix, tol: f64) -> Result<Verdict, OracleError> {
    if s.dim() != t.dim() {
        return Err(OracleError::DimensionMismatch(s.dim(), t.dim()));
    }
    for m in [s, t] {
        let dev = m.hermitian_deviation();
        if dev > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
            return Err(OracleError::NonHermitian { deviation: dev });
        }
    }
    let eig = sym_eig(&(t - s))?;
    let least = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if least >= -tol {
        Ok(Verdict::holds(format!("least eigenvalue of T - S is {least:e}")))
    } else {
        let w = Witness::at(format!("eigenvector {}", 0)).with("least_eigenvalue", least).with("tolerance", tol);
        Ok(Verdict::fails(w, "T - S has a negative eigenvalue"))
    }
}

/// Oracle form of p-hyponormality: `(A*A)^p ⪰ (AA*)^p`, i.e. `|A|^{2p} ⪰ |A*|^{2p}`,
/// with floor `floor·‖A‖^{2p}` on the least eigenvalue.
pub fn hyponormality_oracle(a: &DenseMatrix, p: f64, floor: f64) -> Result<Verdict, OracleError> {
    let ata = sym_eig(&(&a.adjoint() * a))?;
    let aat = sym_eig(&(a * &a.adjoint()))?;
    let norm_2p = ata.scale().powf(p);
    psd_order_test(&psd_power_from(&aat, p)?, &psd_power_from(&ata, p)?, floor * norm_2p)
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

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        (a - b).max_abs()
    }

    fn real_matrix(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_fn(rows.len(), |i, j| c(rows[i][j]))
    }

    #[test]
    fn matrix_of_examples() {
        assert_eq!(matrix_of(&s2()), real_matrix(&[&[1.0, 0.0], &[1.0, 0.0]]));
        let c3 = build_space(vec!["0", "1", "2"], vec![1.0; 3], vec!["1", "2", "0"], vec![c(1.0), c(2.0), c(4.0)]).unwrap();
        let a = matrix_of(&c3);
        assert_eq!((a[(0, 1)], a[(1, 2)], a[(2, 0)]), (c(1.0), c(2.0), c(4.0)));
        let m = build_space(vec!["0", "1"], vec![1.0, 4.0], vec!["0", "0"], vec![c(1.0), c(1.0)]).unwrap();
        assert_eq!(matrix_of(&m)[(1, 0)], c(2.0));
    }

    #[test]
    fn eig_of_small_matrices() {
        let e = sym_eig(&real_matrix(&[&[2.0, 0.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0, 2.0]);
        assert_eq!(e.column(0), vec![c(0.0), c(1.0)]);
        let e = sym_eig(&real_matrix(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-15 && (e.eigenvalues[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eig_of_complex_hermitian() {
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3
        let m = DenseMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            (1, 0) => Complex64::new(0.0, -1.0),
            _ => c(2.0),
        });
        let e = sym_eig(&m).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!(max_diff(&e.reconstruct(), &m) < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = real_matrix(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(sym_eig(&m), Err(OracleError::NonHermitian { .. })));
    }

    #[test]
    fn psd_powers() {
        let d = real_matrix(&[&[4.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(matrix_power_psd(&d, 0.5).unwrap(), real_matrix(&[&[2.0, 0.0], &[0.0, 0.0]]));
        let a = matrix_of(&s2());
        let m = matrix_power_psd(&(&a.adjoint() * &a), 0.5).unwrap();
        assert!(max_diff(&m, &real_matrix(&[&[2f64.sqrt(), 0.0], &[0.0, 0.0]])) < 1e-15);
        let p = real_matrix(&[&[0.5, 0.5], &[0.5, 0.5]]);
        for t in [0.25, 1.0, 3.0] {
            assert!(max_diff(&matrix_power_psd(&p, t).unwrap(), &p) < 1e-14);
        }
        assert!(matches!(matrix_power_psd(&real_matrix(&[&[-1.0]]), 0.5), Err(OracleError::NotPsd { .. })));
        assert!(matches!(matrix_power_psd(&p, 0.0), Err(OracleError::NonPositiveExponent(_))));
    }

    #[test]
    fn polar_of_s2() {
        let p = polar(&matrix_of(&s2())).unwrap();
        let r = 0.5f64.sqrt();
        assert!(max_diff(&p.modulus, &real_matrix(&[&[2f64.sqrt(), 0.0], &[0.0, 0.0]])) < 1e-15);
        assert!(max_diff(&p.u, &real_matrix(&[&[r, 0.0], &[r, 0.0]])) < 1e-15);
    }

    #[test]
    fn polar_of_unitary() {
        let a = DenseMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            (1, 0) => c(1.0),
            _ => c(0.0),
        });
        let p = polar(&a).unwrap();
        assert!(max_diff(&p.modulus, &DenseMatrix::identity(2)) < 1e-15);
        assert!(max_diff(&p.u, &a) < 1e-15);
    }

    #[test]
    fn aluthge_of_s2_and_of_normal_matrices() {
        let d = aluthge_matrix(&matrix_of(&s2()), 0.5).unwrap();
        assert!(max_diff(&d, &real_matrix(&[&[1.0, 0.0], &[0.0, 0.0]])) < 1e-15);
        let diag = DenseMatrix::from_diagonal(&[Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, -2.0)]);
        for alpha in [0.25, 0.5, 1.0] {
            assert!(max_diff(&aluthge_matrix(&diag, alpha).unwrap(), &diag) < 1e-15);
        }
    }

    #[test]
    fn psd_order_examples() {
        let a = matrix_of(&s2());
        let t = &a.adjoint() * &a;
        let s = &a * &a.adjoint();
        assert!(psd_order_test(&t, &t, 0.0).unwrap().holds_p());
        let v = psd_order_test(&s, &t, 1e-9).unwrap();
        assert!(v.fails_p());
        let least = v.witness.unwrap().values["least_eigenvalue"].as_f64().unwrap();
        assert!((least + 2f64.sqrt()).abs() < 1e-14);
        let bad = real_matrix(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(psd_order_test(&bad, &t, 0.0), Err(OracleError::NonHermitian { .. })));
    }

    #[test]
    fn json_layout() {
        let a = matrix_of(&s2());
        let j = a.to_json();
        assert_eq!(j, serde_json::json!([[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]));
        assert_eq!(DenseMatrix::from_json(&j).unwrap(), a);
        assert!(DenseMatrix::from_json(&serde_json::json!([[[1.0, 0.0]], []])).is_none());
    }
}
