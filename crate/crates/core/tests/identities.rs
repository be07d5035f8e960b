//! Measure-theoretic identities on random finite spaces.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use wco::calculus::{
    aluthge_rn, aluthge_weight, apply_operator, cond_exp, cond_exp_pullback, partial_isometry_weight, radon_nikodym,
};
use wco::oracle::{matrix_of, sym_eig, DenseMatrix};
use wco::random::{random_corpus, random_hermitian, random_vector, seeded_rng, RandomSpaceConfig};
use wco::{ExtReal, PointSpace, ScalarField};

fn space(seed: u64) -> PointSpace {
    random_corpus(seed, 1, &RandomSpaceConfig::default()).remove(0)
}

fn nonneg(seed: u64, n: usize) -> ScalarField {
    let mut rng = seeded_rng(seed);
    ScalarField((0..n).map(|_| ExtReal::new(rng.gen_range(0.0..5.0))).collect())
}

fn mu_w(s: &PointSpace, z: usize) -> f64 {
    s.weights()[z].norm_sqr() * s.masses()[z]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn change_of_variables(seed in any::<u64>()) {
        let s = space(seed);
        let f = nonneg(seed ^ 1, s.len());
        let h = radon_nikodym(&s);
        let lhs: f64 = s.points().map(|x| f[s.phi_map()[x]].get() * mu_w(&s, x)).sum();
        let rhs: f64 = s.points().map(|x| f[x].get() * h[x].get() * s.masses()[x]).sum();
        prop_assert!(close(lhs, rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn conditional_expectation_identities(seed in any::<u64>()) {
        let s = space(seed);
        let f = nonneg(seed ^ 2, s.len());
        let g = nonneg(seed ^ 3, s.len());
        let e = cond_exp(&s, &f);
        let gphi = |z: usize| g[s.phi_map()[z]].get();
        let lhs: f64 = s.points().map(|z| gphi(z) * f[z].get() * mu_w(&s, z)).sum();
        let rhs: f64 = s.points().map(|z| gphi(z) * e[z].get() * mu_w(&s, z)).sum();
        prop_assert!(close(lhs, rhs));

        let gf = ScalarField(s.points().map(|z| ExtReal::new(gphi(z) * f[z].get())).collect());
        let egf = cond_exp(&s, &gf);
        let pull = cond_exp_pullback(&s, &f);
        for z in s.points().filter(|&z| mu_w(&s, z) > 0.0) {
            prop_assert!(close(egf[z].get(), gphi(z) * e[z].get()));
            prop_assert!(close(pull[s.phi_map()[z]].get(), e[z].get()));
        }
    }

    #[test]
    fn reweighted_expectation(seed in any::<u64>(), k in 1u32..=4) {
        let alpha = f64::from(k) / 4.0;
        let s = space(seed);
        let f = nonneg(seed ^ 4, s.len());
        let h = radon_nikodym(&s);
        let ha = h.map(|v| v.powf(alpha));
        let t = s.with_weights(aluthge_weight(&s, alpha).unwrap());
        let lhs_e = cond_exp(&t, &f);
        let e_ha = cond_exp(&s, &ha);
        let fha = ScalarField(s.points().map(|x| ExtReal::new(f[x].get() * ha[x].get())).collect());
        let rhs = cond_exp(&s, &fha);
        for z in s.points().filter(|&z| mu_w(&s, z) > 0.0) {
            prop_assert!(close(lhs_e[z].get() * e_ha[z].get(), rhs[z].get()), "at {z}");
        }
        let direct = radon_nikodym(&t);
        for (a, b) in aluthge_rn(&s, alpha).unwrap().iter().zip(direct.iter()) {
            prop_assert!(close(a.get(), b.get()));
        }
    }

    #[test]
    fn partial_isometry_weight_is_consistent(seed in any::<u64>()) {
        let s = space(seed);
        let h = radon_nikodym(&s);
        let tilde = partial_isometry_weight(&s).unwrap();
        for x in s.points() {
            let back = tilde.0[x] * h[s.phi_map()[x]].get().sqrt();
            prop_assert!((back - s.weights()[x]).norm() <= 1e-12 * (1.0 + s.weights()[x].norm()));
        }
        // U*U is the projection onto the closure of the range of |C|
        let u = matrix_of(&s.with_weights(tilde));
        let utu = &u.adjoint() * &u;
        prop_assert!((&(&utu * &utu) - &utu).max_abs() <= 1e-12);
    }

    #[test]
    fn documents_rebuild_the_same_fibers(seed in any::<u64>()) {
        let s = space(seed);
        let again = PointSpace::from_json(&serde_json::to_string(&s.to_document()).unwrap()).unwrap();
        prop_assert_eq!(again.to_document(), s.to_document());
        for x in s.points() {
            for &y in s.fiber_index().preimages(x) {
                prop_assert_eq!(s.phi_map()[y], x);
            }
        }
        let total: usize = s.points().map(|x| s.fiber_index().preimages(x).len()).sum();
        prop_assert_eq!(total, s.len());
    }

    #[test]
    fn operator_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let s = space(seed);
        let mut rng = seeded_rng(seed ^ 5);
        let f = random_vector(&mut rng, s.len());
        let g = random_vector(&mut rng, s.len());
        let (a, b) = (Complex64::new(a, 0.5), Complex64::new(0.25, b));
        let combo: Vec<_> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = apply_operator(&s, &combo).unwrap();
        let (cf, cg) = (apply_operator(&s, &f).unwrap(), apply_operator(&s, &g).unwrap());
        for i in 0..s.len() {
            prop_assert!((lhs[i] - (a * cf[i] + b * cg[i])).norm() <= 1e-12 * (1.0 + lhs[i].norm()));
        }
    }

    #[test]
    fn jacobi_diagonalizes_hermitian_matrices(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let m = random_hermitian(&mut rng, 8);
        let eig = sym_eig(&m).unwrap();
        prop_assert!((&eig.reconstruct() - &m).frobenius_norm() <= 1e-12 * m.frobenius_norm().max(1.0));
        let v = &eig.vectors;
        prop_assert!((&(&v.adjoint() * v) - &DenseMatrix::identity(8)).max_abs() <= 1e-12);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn h_is_zero_exactly_off_the_image_of_supp_w() {
    for s in random_corpus(3, 100, &RandomSpaceConfig::default()) {
        let h = radon_nikodym(&s);
        for x in s.points() {
            let fed = s.fiber_index().preimages(x).iter().any(|&y| mu_w(&s, y) > 0.0);
            assert_eq!(h[x].get() > 0.0, fed);
        }
    }
}
