use proptest::prelude::*;
use randmat::elimination;
use randmat::linalg::{self, Matrix, Norm};
use randmat::precond;
use randmat::rng::{self, Rng};
use randmat::solvers;
use randmat::structured::Circulant;
use randmat::xprec;
use randmat::Seed;

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn svd_reconstructs_with_orthogonal_factors(m in 1usize..12, n in 1usize..12, seed in 0u64..10_000) {
        let a = rng::gaussian(m, n, Seed(seed));
        let f = linalg::svd(&a).unwrap();
        prop_assert!((&f.reconstruct() - &a).fro() <= 1e-12 * a.fro().max(1.0));
        prop_assert!((&f.s.tr_matmul(&f.s) - &Matrix::identity(m)).max_abs() < 1e-12);
        prop_assert!((&f.t.tr_matmul(&f.t) - &Matrix::identity(n)).max_abs() < 1e-12);
        prop_assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let st = linalg::singular_values(&a.transpose());
        prop_assert!(max_gap(&f.sigma, &st) <= 1e-12 * f.sigma[0].max(1e-300));
    }

    #[test]
    fn deleting_a_column_interlaces(m in 2usize..14, n in 2usize..10, seed in 0u64..10_000) {
        let a = rng::gaussian(m, n, Seed(seed));
        let a0 = a.cols_range(0, n - 1);
        let s = linalg::singular_values(&a);
        let s0 = linalg::singular_values(&a0);
        for (j, &v) in s0.iter().enumerate() {
            prop_assert!(s[j] >= v * (1.0 - 1e-12));
            if let Some(&next) = s.get(j + 1) {
                if m >= n {
                    prop_assert!(v >= next * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn singular_values_move_at_most_norm_of_perturbation(n in 1usize..12, exp in 0i32..12, seed in 0u64..10_000) {
        let a = rng::gaussian(n + 2, n, Seed(seed));
        let e = rng::gaussian(n + 2, n, Seed(seed).stream(1)).scale(10f64.powi(-exp));
        let gap = max_gap(&linalg::singular_values(&a), &linalg::singular_values(&(&a + &e)));
        prop_assert!(gap <= e.norm(Norm::Two) * (1.0 + 1e-10) + 1e-15);
    }

    #[test]
    fn norm_sandwich(m in 1usize..12, n in 1usize..12, seed in 0u64..10_000) {
        let a = rng::gaussian(m, n, Seed(seed));
        let two = a.norm(Norm::Two);
        let (one, inf, fro) = (a.norm(Norm::One), a.norm(Norm::Inf), a.fro());
        let slack = 1.0 + 1e-12;
        prop_assert!(two <= fro * slack);
        prop_assert!(fro <= (m.min(n) as f64).sqrt() * two * slack);
        prop_assert!(two <= (one * inf).sqrt() * slack);
        prop_assert!(one <= (m as f64).sqrt() * two * slack);
        prop_assert!(two <= (n as f64).sqrt() * one * slack);
    }

    #[test]
    fn genp_matches_lu_on_dominant_matrices(n in 1usize..24, seed in 0u64..10_000) {
        let a = rng::gaussian(n, n, Seed(seed)).shift_diag(2.0 * n as f64);
        let b = Rng::new(Seed(seed).stream(1)).gaussian_vec(n);
        let y = elimination::genp_solve(&a, &b).unwrap();
        let want = linalg::solve(&a, &b).unwrap();
        let d = linalg::vec_norm(&linalg::vec_sub(&y, &want));
        prop_assert!(d <= 1e-12 * linalg::vec_norm(&want));
        let f = elimination::genp(&a).unwrap();
        prop_assert!((&f.l().matmul(&f.u()) - &a).max_abs() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn circulant_spectrum_matches_dense(n in 1usize..40, seed in 0u64..10_000) {
        let c: Circulant = rng::gaussian_circulant(n, 1.0, 0.0, 1.0, Seed(seed));
        let mut fast = c.singular_values();
        fast.sort_by(|a, b| b.total_cmp(a));
        let dense = linalg::singular_values(&c.to_dense());
        prop_assert!(max_gap(&fast, &dense) <= 1e-10 * dense[0]);
    }

    #[test]
    fn newton_residuals_square_once_below_one(n in 2usize..16, seed in 0u64..10_000) {
        let c = rng::gaussian(n, n, Seed(seed)).scale(1.0 / (n as f64).sqrt()).shift_diag(3.0);
        let res = solvers::newton_inverse(&c, 1e-13, 200).unwrap().residuals;
        let start = res.iter().position(|&r| r < 1.0).unwrap();
        for w in res[start..].windows(2) {
            prop_assert!(w[1] <= w[0] * w[0] * (1.0 + 1e-6) + 1e-14);
        }
    }

    #[test]
    fn smw_solve_matches_dense(n in 4usize..20, r in 1usize..4, seed in 0u64..10_000) {
        let s = Seed(seed);
        let a = rng::gaussian(n, n, s).scale(1.0 / (n as f64).sqrt()).shift_diag(4.0);
        let u = rng::gaussian(n, r, s.stream(1));
        let v = rng::gaussian(n, r, s.stream(2));
        let b = Rng::new(s.stream(3)).gaussian_vec(n);
        let prep = precond::additive_preprocess(&a, &u, &v, true).unwrap();
        let lu = linalg::Lu::factor(&prep.c).unwrap();
        let y = xprec::round_vec(&precond::smw_solve(&prep, |x| lu.solve(x), &b).unwrap());
        let want = linalg::solve(&a, &b).unwrap();
        prop_assert!(linalg::vec_norm(&linalg::vec_sub(&y, &want)) <= 1e-10 * linalg::vec_norm(&want));
    }
}
