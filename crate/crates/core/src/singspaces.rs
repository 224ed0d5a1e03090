//! Trailing and leading singular spaces, null matrix bases and numerical
//! rank, all without pivoting on the input matrix.

use crate::linalg::{self, vec_norm, Lu, Matrix, Norm};
use crate::lowrank::{sample_cover, CoverSide, Family, Outcome};
use crate::precond::{balance, dual_additive};
use crate::rng::{self, Rng, Seed};
use crate::xprec::{self, ExtMatrix};
use crate::{Error, Result};

pub const KAPPA_MAX: f64 = 1e8;
pub const POWER_STEPS: usize = 200;
pub const POWER_RTOL: f64 = 1e-4;
/// `sigma_+ = SIGMA_PLUS_MARGIN * (Rayleigh estimate of sigma_1)`.
pub const SIGMA_PLUS_MARGIN: f64 = 1.1;
const MAX_SQUARINGS: usize = 64;
const NMB_TOL: f64 = 1e-10;

/// Crude extreme singular value estimates from power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondEstimate {
    pub sigma_max: f64,
    /// Upper bound on `sigma_max` used for the shift.
    pub sigma_plus: f64,
    pub sigma_min: f64,
    pub steps: usize,
}

impl CondEstimate {
    pub fn kappa(&self) -> f64 {
        if self.sigma_min > 0.0 {
            self.sigma_max / self.sigma_min
        } else if self.sigma_max > 0.0 {
            f64::INFINITY
        } else {
            f64::NAN
        }
    }

    pub fn well_conditioned(&self, kappa_max: f64) -> bool {
        self.kappa() <= kappa_max
    }
}

fn unit_gaussian(n: usize, rng: &mut Rng) -> Vec<f64> {
    let v = rng.gaussian_vec(n);
    let s = vec_norm(&v);
    v.iter().map(|x| x / s).collect()
}

/// Power iteration on `B^T B` for `sigma_1`, then on the shifted Gram
/// `sigma_+^2 I - B^T B` for the trailing direction `z`, with
/// `sigma_min ~ ||B z||`. The second phase raises the shifted operator to
/// powers `2^j` by repeated squaring.
pub fn cond_estimate(b: &Matrix, seed: Seed) -> CondEstimate {
    let k = b.cols();
    if k == 0 {
        return CondEstimate { sigma_max: 0.0, sigma_plus: 0.0, sigma_min: 0.0, steps: 0 };
    }
    let gram = b.tr_matmul(b);
    let mut rng = Rng::new(seed.stream(81));
    let mut v = unit_gaussian(k, &mut rng);
    let mut lam = 0.0;
    let mut steps = 0;
    while steps < POWER_STEPS {
        steps += 1;
        let w = gram.matvec(&v);
        let next = linalg::dot(&v, &w);
        let nw = vec_norm(&w);
        if nw == 0.0 {
            lam = 0.0;
            break;
        }
        v = w.iter().map(|x| x / nw).collect();
        let done = (next - lam).abs() <= POWER_RTOL * next;
        lam = next;
        if done {
            break;
        }
    }
    let sigma_max = lam.max(0.0).sqrt();
    if sigma_max == 0.0 {
        return CondEstimate { sigma_max: 0.0, sigma_plus: 0.0, sigma_min: 0.0, steps };
    }
    let sigma_plus = SIGMA_PLUS_MARGIN * sigma_max;
    let shift = sigma_plus * sigma_plus;
    let mut p = gram.scale(-1.0 / shift).shift_diag(1.0);
    let z0 = unit_gaussian(k, &mut rng);
    let mut sigma_min = sigma_max;
    for _ in 0..MAX_SQUARINGS {
        steps += 1;
        let w = p.matvec(&z0);
        let nw = vec_norm(&w);
        if nw == 0.0 || !nw.is_finite() {
            break;
        }
        let z: Vec<f64> = w.iter().map(|x| x / nw).collect();
        sigma_min = vec_norm(&b.matvec(&z));
        let mut next = p.matmul(&p);
        let s = next.max_abs();
        if s == 0.0 || !s.is_finite() {
            break;
        }
        next = next.scale(1.0 / s);
        let pn = p.max_abs();
        let change = (&next - &p.scale(1.0 / pn)).max_abs();
        p = next;
        if change <= 1e-12 {
            break;
        }
    }
    CondEstimate { sigma_max, sigma_plus, sigma_min, steps }
}

fn is_well_conditioned(b: &Matrix, seed: Seed) -> bool {
    cond_estimate(b, seed).well_conditioned(KAPPA_MAX)
}

/// `C^+ U` for a well conditioned `C` with at least as many rows as columns.
fn pinv_apply(c: &Matrix, u: &Matrix) -> Result<Matrix> {
    if c.is_square() {
        return Ok(Lu::factor(c)?.solve_matrix(u));
    }
    let (q, r) = linalg::qr(c)?;
    let rhs = q.tr_matmul(u);
    Ok(linalg::inverse(&r)?.matmul(&rhs))
}

/// Gaussian `U`, `V` of width `w` with `||U V^T|| = ||A||`.
fn balanced_pair(a: &Matrix, w: usize, seed: Seed) -> (Matrix, Matrix) {
    let u = rng::gaussian(a.rows(), w, seed.stream(1));
    let v = rng::gaussian(a.cols(), w, seed.stream(2));
    balance(a, &u, &v)
}

/// Orthonormal basis of the null space of `a`, via additive preprocessing
/// `C = A + U V^T` of growing width until `C` is well conditioned, then
/// `B = C^{-1} U`, aggregated with `nmb(A B)` when needed.
pub fn nmb(a: &Matrix) -> Result<Matrix> {
    nmb_with_tol(a, NMB_TOL, Seed(0x6e6d62))
}

pub fn nmb_with_tol(a: &Matrix, tol: f64, seed: Seed) -> Result<Matrix> {
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let sq = if m < n {
        a.vcat(&Matrix::zeros(n - m, n))
    } else if m > n {
        rng::gaussian(n, m, seed.stream(3)).matmul(a)
    } else {
        a.clone()
    };
    let anorm = sq.norm(Norm::Two);
    if anorm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    nmb_square(&sq, tol, anorm, seed, 0).or_else(|_| linalg::null_space(a, KAPPA_MAX.recip()))
}

fn nmb_square(a: &Matrix, tol: f64, anorm: f64, seed: Seed, depth: usize) -> Result<Matrix> {
    let n = a.cols();
    if is_well_conditioned(a, seed.stream(4)) {
        return Ok(Matrix::zeros(n, 0));
    }
    for w in 1..=n {
        let s = seed.derive(w as u64);
        let (u, v) = balanced_pair(a, w, s);
        let c = a + &u.matmul(&v.transpose());
        if !is_well_conditioned(&c, s.stream(5)) {
            continue;
        }
        let b = pinv_apply(&c, &u)?;
        let q = linalg::qr_q(&b)?;
        let ab = a.matmul(&q);
        if ab.norm(Norm::Two) <= tol * anorm {
            return Ok(q);
        }
        if depth > 4 || w == n {
            return Err(Error::Stagnation(depth));
        }
        let inner = nmb_with_tol_inner(&ab, tol, anorm, s.stream(6), depth + 1)?;
        if inner.cols() >= w {
            return Err(Error::Stagnation(depth));
        }
        let agg = q.matmul(&inner);
        return if agg.cols() == 0 { Ok(agg) } else { linalg::qr_q(&agg) };
    }
    Err(Error::Stagnation(depth))
}

/// Null space of a tall `ab` measured against the outer norm.
fn nmb_with_tol_inner(ab: &Matrix, tol: f64, anorm: f64, seed: Seed, depth: usize) -> Result<Matrix> {
    let (m, k) = ab.shape();
    let sq = if m > k { rng::gaussian(k, m, seed.stream(3)).matmul(ab) } else { ab.clone() };
    let scale = sq.norm(Norm::Two);
    if scale == 0.0 {
        return Ok(Matrix::identity(k));
    }
    let out = nmb_square(&sq, tol * anorm / scale, scale, seed, depth)?;
    Ok(out)
}

/// A basis `B` of an approximate trailing right singular space.
#[derive(Clone, Debug)]
pub struct Trailing {
    pub r: usize,
    pub b: Matrix,
    pub kappa: f64,
}

/// `C = A + U V^T` with Gaussian `U`, `V` of width `r_plus`, `Y = C^+ U`.
pub fn trailing_basis_additive(a: &Matrix, r_plus: usize, tau: f64, seed: Seed) -> Result<Outcome<Trailing>> {
    let (u, v) = balanced_pair(a, r_plus, seed);
    trailing_basis_additive_with(a, &u, &v, tau, seed)
}

pub fn trailing_basis_additive_with(a: &Matrix, u: &Matrix, v: &Matrix, tau: f64, seed: Seed) -> Result<Outcome<Trailing>> {
    if a.rows() < a.cols() {
        return Err(Error::Shape(format!("need rows >= cols, got {:?}", a.shape())));
    }
    let uv = xprec::xmatmul_mixed(u, &ExtMatrix::from_matrix(&v.transpose()));
    let c = ExtMatrix::from_matrix(a).add(&uv).round();
    let est = cond_estimate(&c, seed.stream(7));
    if !est.well_conditioned(KAPPA_MAX) {
        return Ok(Outcome::failure("conditioning", format!("kappa(C) ~ {:e}", est.kappa())));
    }
    let y = pinv_apply(&c, u)?;
    finish_trailing(a, y, tau, est.kappa(), seed)
}

/// `K = (W, V^T; -U, A)` and `Y` the bottom rows of `K^{-1} (I; 0)`.
pub fn trailing_basis_augment(a: &Matrix, r_plus: usize, tau: f64, seed: Seed) -> Result<Outcome<Trailing>> {
    let (u, v) = balanced_pair(a, r_plus, seed);
    let mut w = rng::gaussian(r_plus, r_plus, seed.stream(8));
    let wn = w.norm(Norm::Two);
    if wn > 0.0 {
        w = w.scale(1.0 / wn);
    }
    trailing_basis_augment_with(a, &u, &v, &w, tau, seed)
}

pub fn trailing_basis_augment_with(a: &Matrix, u: &Matrix, v: &Matrix, w: &Matrix, tau: f64, seed: Seed) -> Result<Outcome<Trailing>> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("need rows >= cols, got {:?}", a.shape())));
    }
    let aug = crate::precond::augment(a, u, v, w)?;
    let est = cond_estimate(&aug.k, seed.stream(7));
    if !est.well_conditioned(KAPPA_MAX) {
        return Ok(Outcome::failure("conditioning", format!("kappa(K) ~ {:e}", est.kappa())));
    }
    let q = w.rows();
    let rhs = Matrix::identity(q).vcat(&Matrix::zeros(m, q));
    let full = pinv_apply(&aug.k, &rhs)?;
    let y = full.rows_range(q, n);
    finish_trailing(a, y, tau, est.kappa(), seed)
}

fn finish_trailing(a: &Matrix, y: Matrix, tau: f64, kappa: f64, seed: Seed) -> Result<Outcome<Trailing>> {
    let anorm = a.norm(Norm::Two);
    let ay = a.matmul(&y);
    if ay.norm(Norm::Two) <= tau * anorm * y.norm(Norm::Two) {
        return Ok(Outcome::Success(Trailing { r: y.cols(), b: y, kappa }));
    }
    let yq = match linalg::qr_q(&y) {
        Ok(q) => q,
        Err(e) => return Ok(Outcome::failure("basis", e.to_string())),
    };
    let ayq = a.matmul(&yq);
    let z = match nmb_with_tol_inner(&ayq, tau, anorm, seed.stream(9), 0) {
        Ok(z) => z,
        Err(e) => return Ok(Outcome::failure("recursion", e.to_string())),
    };
    let b = yq.matmul(&z);
    if b.cols() == 0 {
        return Ok(Outcome::failure("recursion", "no null vectors left in A Y"));
    }
    if a.matmul(&b).norm(Norm::Two) > tau * anorm * b.norm(Norm::Two) {
        return Ok(Outcome::failure("residual", "||A B|| above tolerance after recursion"));
    }
    Ok(Outcome::Success(Trailing { r: b.cols(), b, kappa }))
}

fn rescale_to(u: &Matrix, v: &Matrix, target: f64) -> (Matrix, Matrix) {
    let uv = u.matmul(&v.transpose()).norm(Norm::Two);
    let s = (target / uv).sqrt();
    (u.scale(s), v.scale(s))
}

/// `C_^T V_` with `C_ = A - A U_ H^{-1} V_^T A`, `H = I + V_^T A U_` and
/// `||U_ V_^T|| = ||A^{-1}||`.
pub fn leading_basis_dual(a: &Matrix, q: usize, seed: Seed) -> Result<Matrix> {
    let inv_norm = inverse_norm(a)?;
    let attempt = |s: Seed| -> Result<Matrix> {
        let n = a.rows();
        let (u, v) = rescale_to(&rng::gaussian(n, q, s.stream(1)), &rng::gaussian(n, q, s.stream(2)), inv_norm);
        let prep = dual_additive(a, &u, &v, true)?;
        Ok(prep.c.tr_matmul(&v))
    };
    attempt(seed).or_else(|_| attempt(seed.derive(1)))
}

fn inverse_norm(a: &Matrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Shape(format!("square input required, got {:?}", a.shape())));
    }
    match linalg::singular_values(a).last() {
        Some(&s) if s > 0.0 => Ok(1.0 / s),
        _ => Err(Error::Singular("A")),
    }
}

/// Gaussian `U`, `V` and `W` for the dual augmentation.
pub fn dual_aug_multipliers(a: &Matrix, q: usize, seed: Seed) -> Result<(Matrix, Matrix, Matrix)> {
    let n = a.rows();
    let inv_norm = inverse_norm(a)?;
    let (u, v) = rescale_to(&rng::gaussian(n, q, seed.stream(1)), &rng::gaussian(n, q, seed.stream(2)), inv_norm);
    let w = rng::gaussian(q, q, seed.stream(3));
    let wn = w.norm(Norm::Two);
    Ok((u, v, w.scale(1.0 / wn)))
}

/// `T_+ = B - B S^{-1} V^T B` with `B = A^T U` and `S = W + V^T A^T U`.
pub fn dual_aug_basis(a: &Matrix, u: &Matrix, v: &Matrix, w: &Matrix) -> Result<Matrix> {
    let b = xprec::xmatmul_mixed(&a.transpose(), &ExtMatrix::from_matrix(u));
    let vb = xprec::xmatmul_mixed(&v.transpose(), &b);
    let s = ExtMatrix::from_matrix(w).add(&vb);
    let lu = xprec::ExtLu::factor(&s).map_err(|_| Error::Singular("S = W + V^T A^T U"))?;
    if lu.pivot_ratio() < crate::precond::SINGULAR_RATIO {
        return Err(Error::Singular("S = W + V^T A^T U"));
    }
    let corr = b.matmul(&lu.solve_matrix(&vb));
    Ok(b.sub(&corr).round())
}

pub fn leading_basis_dual_aug(a: &Matrix, q: usize, seed: Seed) -> Result<Matrix> {
    let attempt = |s: Seed| -> Result<Matrix> {
        let (u, v, w) = dual_aug_multipliers(a, q, s)?;
        dual_aug_basis(a, &u, &v, &w)
    };
    attempt(seed).or_else(|_| attempt(seed.derive(1)))
}

/// `A^T U` for a random `U` of the given family.
pub fn leading_basis_sampling(a: &Matrix, q: usize, family: Family, seed: Seed) -> Matrix {
    sample_cover(a, q, CoverSide::Right, family, seed)
}

/// `||B Y - T||` for the least-squares `Y`, i.e. the distance of the columns
/// of `target` from the range of `b`.
pub fn alignment_error(b: &Matrix, target: &Matrix) -> Result<f64> {
    let f = linalg::svd_thin(b)?;
    let k = f.sigma.iter().take_while(|&&s| s > f.sigma[0] * 1e-14).count();
    let q = f.s.cols_range(0, k);
    let resid = target - &q.matmul(&q.tr_matmul(target));
    Ok(resid.norm(Norm::Two))
}

/// Largest principal angle between the ranges of two full-rank matrices of
/// equal width.
pub fn max_principal_angle(a: &Matrix, b: &Matrix) -> Result<f64> {
    let qa = linalg::qr_q(a)?;
    let qb = linalg::qr_q(b)?;
    let resid = &qb - &qa.matmul(&qa.tr_matmul(&qb));
    Ok(resid.norm(Norm::Two).min(1.0).asin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchPolicy {
    Bisect,
    /// Test widths `rho_minus + 1, rho_minus + 2, ...` until the first failure.
    Ascending,
}

#[derive(Clone, Debug)]
pub struct RankEstimate {
    pub rho: usize,
    pub cover: Matrix,
}

/// Largest `rho` in `[lo, hi]` passing `ok`, assuming `ok` holds on a prefix.
fn search(lo: usize, hi: usize, policy: SearchPolicy, mut ok: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (lo, hi);
    match policy {
        SearchPolicy::Bisect => {
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if ok(mid) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            lo
        }
        SearchPolicy::Ascending => {
            while lo < hi && ok(lo + 1) {
                lo += 1;
            }
            lo
        }
    }
}

/// Numerical rank as the widest Gaussian cover `A^T G_rho` that is well
/// conditioned.
pub fn numerical_rank_sampling(a: &Matrix, rho_minus: usize, rho_plus: usize, policy: SearchPolicy, seed: Seed) -> Result<RankEstimate> {
    let (m, n) = a.shape();
    if rho_minus > rho_plus || rho_plus > n.min(m) {
        return Err(Error::Invalid(format!("rank range [{rho_minus}, {rho_plus}] for {m}x{n}")));
    }
    let g = rng::gaussian(m, rho_plus, seed.stream(1));
    let cover = |rho: usize| a.tr_matmul(&g.cols_range(0, rho));
    let rho = search(rho_minus, rho_plus, policy, |rho| is_well_conditioned(&cover(rho), seed.derive(rho as u64)));
    Ok(RankEstimate { rho, cover: cover(rho) })
}

/// Numerical rank via `C = A + U_s V_s^T`, `s = n - rho`.
pub fn numerical_rank_additive(a: &Matrix, range: (usize, usize), seed: Seed) -> Result<usize> {
    let n = check_square_range(a, range)?;
    let width = n - range.0;
    let (u, v) = balanced_pair(a, width, seed);
    Ok(search(range.0, range.1, SearchPolicy::Bisect, |rho| {
        let s = n - rho;
        let c = a + &u.cols_range(0, s).matmul(&v.cols_range(0, s).transpose());
        is_well_conditioned(&c, seed.derive(rho as u64))
    }))
}

/// Numerical rank via `K = (W_s, V_s^T; -U_s, A)`, `s = n - rho`.
pub fn numerical_rank_augment(a: &Matrix, range: (usize, usize), seed: Seed) -> Result<usize> {
    let n = check_square_range(a, range)?;
    let width = n - range.0;
    let scale = a.norm(Norm::Two) / (n as f64).sqrt();
    let u = rng::gaussian_matrix(n, width, 0.0, scale, seed.stream(1));
    let v = rng::gaussian_matrix(n, width, 0.0, scale, seed.stream(2));
    let w = rng::gaussian_matrix(width, width, 0.0, scale, seed.stream(3));
    Ok(search(range.0, range.1, SearchPolicy::Bisect, |rho| {
        let s = n - rho;
        let top = w.submatrix(0, 0, s, s).hcat(&v.cols_range(0, s).transpose());
        let k = top.vcat(&u.cols_range(0, s).scale(-1.0).hcat(a));
        is_well_conditioned(&k, seed.derive(rho as u64))
    }))
}

fn check_square_range(a: &Matrix, range: (usize, usize)) -> Result<usize> {
    let n = a.cols();
    if !a.is_square() || range.0 > range.1 || range.1 > n {
        return Err(Error::Invalid(format!("rank range {range:?} for {:?}", a.shape())));
    }
    Ok(n)
}
