mod common;

use common::{kron_by_index, rng, taylor_expm};
use proptest::prelude::*;
use qtime_core::linalg::{
    c, dagger, eig_hermitian, matexp_hermitian, null_space, partial_project, tensor, Operator,
    ProductSpace, StateVector,
};
use qtime_core::random;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut r = rng(seed);
        let a = random::hermitian(&mut r, da, 1.0);
        let b = random::unitary(&mut r, db);
        let cc = random::hermitian(&mut r, dc, 2.0);
        let left = tensor(&tensor(&a, &b), &cc);
        let right = tensor(&a, &tensor(&b, &cc));
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn tensor_matches_index_formula(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = random::unitary(&mut r, da);
        let b = random::hermitian(&mut r, db, 1.0);
        prop_assert!(a.tensor(&b).max_abs_diff(&kron_by_index(&a, &b)) < 1e-15);
    }

    #[test]
    fn matexp_group_law(seed in any::<u64>(), dim in 1usize..6, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, dim, 1.0);
        let us = matexp_hermitian(&h, s).unwrap();
        let ut = matexp_hermitian(&h, t).unwrap();
        let ust = matexp_hermitian(&h, s + t).unwrap();
        prop_assert!((&us * &ut).max_abs_diff(&ust) < 1e-10);
    }

    #[test]
    fn matexp_dagger_reverses_time(seed in any::<u64>(), dim in 1usize..6, t in -3.0f64..3.0) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, dim, 1.0);
        let forward = matexp_hermitian(&h, t).unwrap();
        let backward = matexp_hermitian(&h, -t).unwrap();
        prop_assert!(dagger(&forward).max_abs_diff(&backward) < 1e-12);
    }

    #[test]
    fn matexp_agrees_with_taylor_oracle(seed in any::<u64>(), dim in 1usize..6, t in -2.0f64..2.0) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, dim, 1.0);
        let u = matexp_hermitian(&h, t).unwrap();
        prop_assert!(u.max_abs_diff(&taylor_expm(&h, t)) < 1e-10);
        prop_assert!(u.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs(seed in any::<u64>(), dim in 1usize..7) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, dim, 1.0);
        let e = eig_hermitian(&h).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for (j, &lambda) in e.values.iter().enumerate() {
            let v = e.vector(j);
            let residual = (&h.apply(&v) - &v.scale(c(lambda, 0.0))).norm();
            prop_assert!(residual < 1e-10);
        }
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated(seed in any::<u64>(), dim in 2usize..6, rank in 1usize..5) {
        let rank = rank.min(dim - 1);
        let mut r = rng(seed);
        let basis = random::basis(&mut r, dim);
        let weights: Vec<f64> = (0..dim).map(|i| if i < rank { 1.0 + i as f64 } else { 0.0 }).collect();
        let a = basis
            .iter()
            .zip(&weights)
            .fold(Operator::zeros(dim, dim), |acc, (v, &w)| &acc + &v.projector().scale(c(w, 0.0)));
        let tol = 1e-10;
        let kernel = null_space(&a, tol).unwrap();
        prop_assert_eq!(kernel.len(), dim - rank);
        let bound = tol * rank as f64;
        for (i, u) in kernel.iter().enumerate() {
            prop_assert!(a.apply(u).norm() <= bound);
            for (j, v) in kernel.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((u.inner(v) - c(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_project_antilinear_in_bra_linear_in_psi(
        seed in any::<u64>(),
        da in 1usize..4,
        db in 1usize..4,
        alpha in (-1.0f64..1.0, -1.0f64..1.0),
        beta in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let mut r = rng(seed);
        let space = ProductSpace::new([("A", da), ("B", db)]).unwrap();
        let (a, b) = (c(alpha.0, alpha.1), c(beta.0, beta.1));
        let bra1 = random::state(&mut r, da);
        let bra2 = random::state(&mut r, da);
        let psi1 = random::state(&mut r, da * db);
        let psi2 = random::state(&mut r, da * db);
        let proj = |bra: &StateVector, psi: &StateVector| partial_project(bra, &space, "A", psi).unwrap();

        let bra_mix = &bra1.scale(a) + &bra2.scale(b);
        let lhs = proj(&bra_mix, &psi1);
        let rhs = &proj(&bra1, &psi1).scale(a.conj()) + &proj(&bra2, &psi1).scale(b.conj());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);

        let psi_mix = &psi1.scale(a) + &psi2.scale(b);
        let lhs = proj(&bra1, &psi_mix);
        let rhs = &proj(&bra1, &psi1).scale(a) + &proj(&bra1, &psi2).scale(b);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn partial_project_on_products(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let space = ProductSpace::new([("A", da), ("B", db)]).unwrap();
        let a = random::state(&mut r, da);
        let b = random::state(&mut r, db);
        let bra = random::state(&mut r, db);
        let out = partial_project(&bra, &space, "B", &a.tensor(&b)).unwrap();
        prop_assert!(out.max_abs_diff(&a.scale(bra.inner(&b))) < 1e-14);
    }
}
