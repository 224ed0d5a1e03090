//! Randomized low-rank approximation by sampling covers `A^T G` or `A H`.

use crate::linalg::{self, Matrix, Norm};
use crate::rng::{self, Seed};
use crate::Result;

/// Which side the random multiplier sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverSide {
    /// `A^T G`, an `n x rho` cover of the row space.
    Right,
    /// `A H`, an `m x rho` cover of the column space.
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Gaussian,
    GaussianToeplitz,
}

impl Family {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian" => Some(Family::Gaussian),
            "toeplitz" | "gaussian_toeplitz" => Some(Family::GaussianToeplitz),
            _ => None,
        }
    }

    /// Random `rows x cols` multiplier of this family.
    pub fn sample(self, rows: usize, cols: usize, seed: Seed) -> Matrix {
        match self {
            Family::Gaussian => rng::gaussian(rows, cols, seed),
            Family::GaussianToeplitz => rng::gaussian_toeplitz(rows, cols, 0.0, 1.0, seed).to_dense(),
        }
    }
}

/// A failed randomized attempt, returned as a value.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub stage: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub enum Outcome<T> {
    Success(T),
    Failure(Failure),
}

impl<T> Outcome<T> {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }

    pub fn success(self) -> Option<T> {
        match self {
            Outcome::Success(t) => Some(t),
            Outcome::Failure(_) => None,
        }
    }

    pub fn failure(stage: &'static str, detail: impl Into<String>) -> Self {
        Outcome::Failure(Failure { stage, detail: detail.into() })
    }
}

pub fn sample_cover(a: &Matrix, rho_plus: usize, side: CoverSide, family: Family, seed: Seed) -> Matrix {
    let (m, n) = a.shape();
    match side {
        CoverSide::Right => a.tr_matmul(&family.sample(m, rho_plus, seed)),
        CoverSide::Left => a.matmul(&family.sample(n, rho_plus, seed)),
    }
}

/// Truncated SVD of `tprime`: keeps the directions with singular value above
/// `tau_abs` and returns their count with `T = S_s diag(sigma_s)`.
pub fn rank_reveal_truncate(tprime: &Matrix, tau_abs: f64) -> Result<(usize, Matrix)> {
    let f = linalg::svd_thin(tprime)?;
    let s = f.sigma.iter().take_while(|&&x| x > tau_abs).count();
    let mut t = f.s.cols_range(0, s);
    for i in 0..t.rows() {
        for (j, sg) in f.sigma[..s].iter().enumerate() {
            t[(i, j)] *= sg;
        }
    }
    Ok((s, t))
}

#[derive(Clone, Debug)]
pub struct LowRank {
    pub rho: usize,
    /// `n x rho` basis of the approximate leading row space.
    pub t: Matrix,
    pub a_rho: Matrix,
}

/// `A T (T^T T)^{-1} T^T` via the normal equations.
pub fn project_rows_normal(a: &Matrix, t: &Matrix) -> Result<Matrix> {
    if t.cols() == 0 {
        return Ok(Matrix::zeros(a.rows(), a.cols()));
    }
    let gram = t.tr_matmul(t);
    let coef = linalg::inverse(&gram)?.matmul(&t.transpose());
    Ok(a.matmul(t).matmul(&coef))
}

/// `A Q Q^T` for `Q` with orthonormal columns.
pub fn project_rows_orth(a: &Matrix, q: &Matrix) -> Matrix {
    a.matmul(q).matmul(&q.transpose())
}

/// Rank-`rho` approximation from a right cover of width `rho_plus`.
/// `tau` is the truncation threshold and `tau_prime` the acceptance bound,
/// both relative to `||A||`.
pub fn low_rank_approx(a: &Matrix, rho_plus: usize, tau: f64, tau_prime: f64, seed: Seed) -> Result<Outcome<LowRank>> {
    let anorm = a.norm(Norm::Two);
    if anorm == 0.0 {
        let n = a.cols();
        return Ok(Outcome::Success(LowRank { rho: 0, t: Matrix::zeros(n, 0), a_rho: a.clone() }));
    }
    let cover = sample_cover(a, rho_plus, CoverSide::Right, Family::Gaussian, seed);
    let cnorm = cover.norm(Norm::Two);
    let (rho, t) = rank_reveal_truncate(&cover, tau * cnorm)?;
    let q = linalg::qr_q(&t)?;
    let a_rho = project_rows_orth(a, &q);
    let err = (a - &a_rho).norm(Norm::Two);
    if err > tau_prime * anorm {
        return Ok(Outcome::failure(
            "residual",
            format!("||A - A_rho|| = {err:e} exceeds {:e} at rank {rho}", tau_prime * anorm),
        ));
    }
    Ok(Outcome::Success(LowRank { rho, t: q, a_rho }))
}

/// `(A A^T)^h A`.
pub fn power_transform(a: &Matrix, h: usize) -> Matrix {
    let mut out = a.clone();
    for _ in 0..h {
        out = a.matmul(&a.tr_matmul(&out));
    }
    out
}

/// Accepts when `||K^T (A - A_rho) L|| <= tau ||K|| ||A|| ||L||` for Gaussian
/// probes `K` (`m x widths.0`) and `L` (`n x widths.1`).
pub fn randomized_residual_check(a: &Matrix, a_rho: &Matrix, tau: f64, widths: (usize, usize), seed: Seed) -> bool {
    let (m, n) = a.shape();
    let k = rng::gaussian(m, widths.0.max(1), seed.stream(71));
    let l = rng::gaussian(n, widths.1.max(1), seed.stream(72));
    let diff = a - a_rho;
    let probe = k.tr_matmul(&diff).matmul(&l);
    let lhs = probe.norm(Norm::Two);
    lhs <= tau * k.norm(Norm::Two) * a.norm(Norm::Two) * l.norm(Norm::Two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::planted_svd;

    fn planted_rank3(n: usize, seed: Seed) -> Matrix {
        let mut sigma = vec![1e-10; n];
        sigma[..3].copy_from_slice(&[1.0, 0.5, 0.2]);
        planted_svd(&sigma, false, seed)
    }

    #[test]
    fn cover_shapes_and_zero() {
        let a = rng::gaussian(7, 5, Seed(1));
        assert_eq!(sample_cover(&a, 3, CoverSide::Right, Family::Gaussian, Seed(2)).shape(), (5, 3));
        assert_eq!(sample_cover(&a, 3, CoverSide::Left, Family::GaussianToeplitz, Seed(2)).shape(), (7, 3));
        let z = sample_cover(&Matrix::zeros(4, 4), 2, CoverSide::Right, Family::Gaussian, Seed(3));
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn full_width_cover_spans_row_space() {
        let a = rng::gaussian(6, 6, Seed(4));
        let b = sample_cover(&a, 6, CoverSide::Right, Family::Gaussian, Seed(5));
        let q = linalg::qr_q(&b).unwrap();
        let rows = a.transpose();
        let resid = &rows - &q.matmul(&q.tr_matmul(&rows));
        assert!(resid.fro() < 1e-10 * rows.fro());
    }

    #[test]
    fn planted_cover_rank() {
        let mut hits = 0;
        for t in 0..100 {
            let a = planted_rank3(16, Seed(100 + t));
            let b = sample_cover(&a, 3, CoverSide::Right, Family::Gaussian, Seed(900 + t));
            if linalg::numerical_rank(&b, 1e-6) == 3 {
                hits += 1;
            }
        }
        assert!(hits >= 95, "{hits}");
    }

    #[test]
    fn truncate_counts() {
        let x = rng::gaussian(8, 2, Seed(6));
        let y = rng::gaussian(2, 5, Seed(7));
        let t = x.matmul(&y);
        let (s, f) = rank_reveal_truncate(&t, 1e-12 * t.fro()).unwrap();
        assert_eq!(s, 2);
        assert_eq!(f.shape(), (8, 2));
        let (s0, _) = rank_reveal_truncate(&t, t.norm(Norm::Two) * 1.0001).unwrap();
        assert_eq!(s0, 0);
        let a = planted_rank3(16, Seed(8));
        let (s3, _) = rank_reveal_truncate(&a, 1e-8 * a.norm(Norm::Two)).unwrap();
        assert_eq!(s3, 3);
    }

    #[test]
    fn exact_rank_two() {
        let a = rng::gaussian(10, 2, Seed(9)).matmul(&rng::gaussian(2, 8, Seed(10)));
        let out = low_rank_approx(&a, 2, 1e-12, 1e-10, Seed(11)).unwrap().success().unwrap();
        assert_eq!(out.rho, 2);
        assert!((&out.a_rho - &a).norm(Norm::Two) <= 1e-10 * a.norm(Norm::Two));
    }

    #[test]
    fn normal_and_orthogonal_forms_agree() {
        let a = rng::gaussian(9, 7, Seed(12));
        let t = rng::gaussian(7, 3, Seed(13));
        let q = linalg::qr_q(&t).unwrap();
        let p1 = project_rows_normal(&a, &t).unwrap();
        let p2 = project_rows_orth(&a, &q);
        assert!((&p1 - &p2).max_abs() < 1e-12 * a.max_abs());
    }

    #[test]
    fn exact_basis_error_is_next_singular_value() {
        let n = 12;
        let sigma: Vec<f64> = (0..n).map(|j| 2f64.powi(-(j as i32))).collect();
        let s = rng::random_orthogonal(n, Seed(14));
        let t = rng::random_orthogonal(n, Seed(15));
        let a = rng::compose_svd(&s, &sigma, &t);
        for q in [1, 4, 7] {
            let err = (&a - &project_rows_orth(&a, &t.cols_range(0, q))).norm(Norm::Two);
            assert!((err - sigma[q]).abs() < 1e-10, "{q}: {err} vs {}", sigma[q]);
        }
    }

    #[test]
    fn power_transform_laws() {
        let a = rng::gaussian(5, 3, Seed(16));
        assert_eq!(power_transform(&a, 0), a);
        let d = Matrix::diag(&[2.0, 1.0]);
        let p = power_transform(&d, 1);
        assert!((&p - &Matrix::diag(&[8.0, 1.0])).max_abs() < 1e-14);
        let b = rng::gaussian(6, 4, Seed(17));
        let s = linalg::singular_values(&b);
        let s5 = linalg::singular_values(&power_transform(&b, 2));
        for (x, y) in s.iter().zip(&s5) {
            assert!((x.powi(5) - y).abs() <= 1e-8 * y);
        }
    }

    #[test]
    fn residual_check_behaviour() {
        let a = rng::gaussian(10, 10, Seed(18));
        assert!(randomized_residual_check(&a, &a, 1e-6, (2, 2), Seed(19)));
        let zero = Matrix::zeros(10, 10);
        let rejected = (0..100).filter(|&t| !randomized_residual_check(&a, &zero, 1e-6, (2, 2), Seed(200 + t))).count();
        assert!(rejected >= 99);
    }

    #[test]
    fn accepted_checks_pass_dense_bound() {
        let tau = 1e-6;
        let mut accepted = 0;
        let mut good = 0;
        for t in 0..100 {
            let a = planted_rank3(12, Seed(300 + t));
            let scale = if t % 2 == 0 { 1e-9 } else { 1e-4 };
            let noise = rng::gaussian(12, 12, Seed(400 + t)).scale(scale / 12.0);
            let a_rho = &a + &noise;
            if randomized_residual_check(&a, &a_rho, tau, (3, 3), Seed(500 + t)) {
                accepted += 1;
                if (&a - &a_rho).norm(Norm::Two) <= 10.0 * tau * a.norm(Norm::Two) {
                    good += 1;
                }
            }
        }
        assert!(accepted > 0);
        assert!(good * 100 >= 95 * accepted, "{good}/{accepted}");
    }

    #[test]
    fn head_profile_family() {
        let mut ok = 0;
        for t in 0..100 {
            let sigma = rng::head_profile(64, 8, 1e-10);
            let a = planted_svd(&sigma, false, Seed(600 + t));
            if let Outcome::Success(r) = low_rank_approx(&a, 8, 1e-8, 1e-6, Seed(700 + t)).unwrap() {
                ok += usize::from(r.rho == 8);
            }
        }
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn oversampling_never_fails() {
        for t in 0..100 {
            let sigma = rng::head_profile(64, 8, 1e-10);
            let a = planted_svd(&sigma, false, Seed(800 + t));
            assert!(low_rank_approx(&a, 12, 1e-8, 1e-6, Seed(850 + t)).unwrap().is_success());
        }
    }

    #[test]
    fn error_non_increasing_in_width() {
        let sigma: Vec<f64> = (0..24).map(|j| 0.6f64.powi(j)).collect();
        let mut medians = vec![];
        for rho_plus in [2, 4, 6, 8] {
            let mut errs: Vec<f64> = (0..20)
                .map(|t| {
                    let a = planted_svd(&sigma, false, Seed(1000 + t));
                    let cover = sample_cover(&a, rho_plus, CoverSide::Right, Family::Gaussian, Seed(1100 + t));
                    let q = linalg::qr_q(&cover).unwrap();
                    (&a - &project_rows_orth(&a, &q)).norm(Norm::Two)
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            medians.push(errs[10]);
        }
        assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
    }
}
