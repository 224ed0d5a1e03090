//! Gaussian elimination without pivoting, its block form, randomized
//! multipliers that make it safe, and iterative refinement.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Norm};
use crate::rng::{self, Seed};
use crate::structured::Circulant;
use crate::xprec::{self, ext_norm, ext_vec, round_vec, ExtScalar};

/// Pivots below this magnitude abort the factorization.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// Pivot statistics collected during elimination.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PivotMonitor {
    pub max_pivot: f64,
    pub min_pivot: f64,
    /// `max 1/|pivot|`
    pub max_inv_pivot: f64,
    /// `(||B||, ||B^{-1}||)` for each block pivot `B` of the block variant.
    pub blocks: Vec<(f64, f64)>,
}

impl PivotMonitor {
    fn record(&mut self, p: f64) {
        let a = p.abs();
        if self.max_pivot == 0.0 && self.min_pivot == 0.0 {
            self.min_pivot = a;
        }
        self.max_pivot = self.max_pivot.max(a);
        self.min_pivot = self.min_pivot.min(a);
        self.max_inv_pivot = self.max_inv_pivot.max(1.0 / a);
    }
}

/// Packed unit-lower / upper factors of `A = L U`.
#[derive(Clone, Debug)]
pub struct GenpFactors {
    lu: Matrix,
    pub monitor: PivotMonitor,
}

impl GenpFactors {
    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn l(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn u(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| if i <= j { self.lu[(i, j)] } else { 0.0 })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..b.cols()).map(|j| self.solve(&b.col(j))).collect();
        Matrix::from_cols(self.dim(), &cols)
    }
}

/// LU factorization without row exchanges.
pub fn genp(a: &Matrix) -> Result<GenpFactors> {
    if !a.is_square() {
        return Err(Error::Shape(format!("genp needs a square matrix, got {:?}", a.shape())));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut monitor = PivotMonitor::default();
    for k in 0..n {
        let p = lu[(k, k)];
        if p.is_nan() || p.abs() < PIVOT_FLOOR {
            return Err(Error::ZeroPivot { step: k, value: p });
        }
        monitor.record(p);
        let (top, rest) = lu.data_mut().split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..(k + 1) * n];
        for row in rest.chunks_mut(n) {
            let l = row[k] / p;
            row[k] = l;
            if l != 0.0 {
                for (x, y) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * y;
                }
            }
        }
    }
    Ok(GenpFactors { lu, monitor })
}

/// Block LU without pivoting: `A = L U` with identity diagonal blocks in `L`
/// and the block pivots (successive Schur complements) on the diagonal of `U`.
#[derive(Clone, Debug)]
pub struct BlockGenp {
    pub l: Matrix,
    pub u: Matrix,
    starts: Vec<usize>,
    pivots: Vec<GenpFactors>,
    pub monitor: PivotMonitor,
}

pub fn block_genp(a: &Matrix, block: usize) -> Result<BlockGenp> {
    if !a.is_square() {
        return Err(Error::Shape(format!("block genp needs a square matrix, got {:?}", a.shape())));
    }
    if block == 0 {
        return Err(Error::Invalid("block size must be positive".into()));
    }
    let n = a.rows();
    let mut s = a.clone();
    let mut l = Matrix::identity(n);
    let mut u = Matrix::zeros(n, n);
    let mut monitor = PivotMonitor::default();
    let mut starts = vec![];
    let mut pivots = vec![];
    let mut k = 0;
    while k < n {
        let b = block.min(n - k);
        let rest = n - k - b;
        let piv_block = s.submatrix(k, k, b, b);
        let f = genp(&piv_block).map_err(|e| match e {
            Error::ZeroPivot { step, value } => Error::ZeroPivot { step: k + step, value },
            e => e,
        })?;
        for i in 0..f.dim() {
            monitor.record(f.lu[(i, i)]);
        }
        let binv = f.solve_matrix(&Matrix::identity(b));
        monitor.blocks.push((piv_block.norm(Norm::Two), binv.norm(Norm::Two)));
        u.set_block(k, k, &piv_block);
        if rest > 0 {
            let a01 = s.submatrix(k, k + b, b, rest);
            let a10 = s.submatrix(k + b, k, rest, b);
            let lblk = a10.matmul(&binv);
            u.set_block(k, k + b, &a01);
            l.set_block(k + b, k, &lblk);
            let a11 = s.submatrix(k + b, k + b, rest, rest);
            let schur = &a11 - &lblk.matmul(&a01);
            s.set_block(k + b, k + b, &schur);
        }
        starts.push(k);
        pivots.push(f);
        k += b;
    }
    Ok(BlockGenp { l, u, starts, pivots, monitor })
}

impl BlockGenp {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut y = b.to_vec();
        for i in 0..n {
            let s: f64 = self.l.row(i)[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
            y[i] -= s;
        }
        for (idx, &k) in self.starts.iter().enumerate().rev() {
            let f = &self.pivots[idx];
            let bsz = f.dim();
            let mut rhs: Vec<f64> = y[k..k + bsz].to_vec();
            for (i, r) in rhs.iter_mut().enumerate() {
                let row = &self.u.row(k + i)[k + bsz..];
                *r -= row.iter().zip(&y[k + bsz..]).map(|(a, b)| a * b).sum::<f64>();
            }
            y[k..k + bsz].copy_from_slice(&f.solve(&rhs));
        }
        y
    }
}

/// Random multiplier used to precondition elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplier {
    /// Right multiplication by a circulant with `+-1` first column.
    SignCirculant,
    /// Right multiplication by the reflector `I - 2 v u^T / (u^T v)` with sign vectors.
    HouseholderPm1,
    /// Two-sided Gaussian `G A H`.
    Gaussian,
}

impl Multiplier {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sign_circulant" | "sign-circulant" | "circulant" => Some(Self::SignCirculant),
            "householder_pm1" | "householder" => Some(Self::HouseholderPm1),
            "gaussian" => Some(Self::Gaussian),
            _ => None,
        }
    }
}

/// Output of a randomized elimination solve.
#[derive(Clone, Debug)]
pub struct GenpSolve {
    pub y: Vec<f64>,
    /// `||b - A y|| / ||b||` after each pass, the unrefined solve first.
    pub residuals: Vec<f64>,
    pub monitor: PivotMonitor,
}

impl GenpSolve {
    pub fn residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&f64::NAN)
    }
}

/// Relative residual `||b - A y|| / ||b||` with the residual formed in extended precision.
pub fn relative_residual(a: &Matrix, y: &[f64], b: &[f64]) -> f64 {
    let r = xprec::xresidual(a, y, b);
    let nb = linalg::vec_norm(b);
    linalg::vec_norm(&r) / if nb > 0.0 { nb } else { 1.0 }
}

/// Plain elimination solve, no multiplier.
pub fn genp_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(genp(a)?.solve(b))
}

/// Condition bound for an accepted sign circulant. The DFT of a `+-1` vector
/// vanishes at frequency `0` or `n/2` with probability about `sqrt(2/(pi n))`
/// each, so singular draws are common.
pub const SIGN_CIRCULANT_KAPPA_MAX: f64 = 1e4;
const SIGN_CIRCULANT_DRAWS: u64 = 64;

fn well_conditioned_sign_circulant(n: usize, seed: Seed) -> Result<Circulant> {
    for k in 0..SIGN_CIRCULANT_DRAWS {
        let c = rng::sign_circulant(n, seed.derive(k));
        if c.cond2() <= SIGN_CIRCULANT_KAPPA_MAX {
            return Ok(c);
        }
    }
    Err(Error::Singular("sign circulant multiplier"))
}

struct Preconditioned {
    factors: GenpFactors,
    left: Option<Matrix>,
    right: Matrix,
}

impl Preconditioned {
    fn build(a: &Matrix, mult: Multiplier, seed: Seed) -> Result<Self> {
        let n = a.rows();
        let (left, right) = match mult {
            Multiplier::SignCirculant => (None, well_conditioned_sign_circulant(n, seed.stream(61))?.to_dense()),
            Multiplier::HouseholderPm1 => (None, rng::householder_reflector_pm1(n, seed.stream(62))),
            Multiplier::Gaussian => {
                let s = 1.0 / (n as f64).sqrt();
                (Some(rng::gaussian(n, n, seed.stream(63)).scale(s)), rng::gaussian(n, n, seed.stream(64)).scale(s))
            }
        };
        let mut m = a.matmul(&right);
        if let Some(g) = &left {
            m = g.matmul(&m);
        }
        Ok(Self { factors: genp(&m)?, left, right })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = match &self.left {
            Some(g) => g.matvec(b),
            None => b.to_vec(),
        };
        self.right.matvec(&self.factors.solve(&rhs))
    }
}

/// Solve `A y = b` by elimination without pivoting applied to a randomly
/// multiplied matrix, followed by `refine_steps` refinement passes. A pivot
/// failure triggers one redraw of the multiplier.
pub fn randomized_genp_solve(a: &Matrix, b: &[f64], mult: Multiplier, refine_steps: usize, seed: Seed) -> Result<GenpSolve> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::Shape("square system expected".into()));
    }
    let pre = match Preconditioned::build(a, mult, seed) {
        Ok(p) => p,
        Err(_) => Preconditioned::build(a, mult, seed.derive(1))?,
    };
    let mut y = pre.solve(b);
    let mut residuals = vec![relative_residual(a, &y, b)];
    for _ in 0..refine_steps {
        let r = xprec::xresidual(a, &y, b);
        let d = pre.solve(&r);
        y.iter_mut().zip(&d).for_each(|(v, dv)| *v += dv);
        residuals.push(relative_residual(a, &y, b));
    }
    Ok(GenpSolve { y, residuals, monitor: pre.factors.monitor.clone() })
}

/// `y += approx_solve(r)` with `r = b - A y` supplied by `residual`, which
/// is expected to form it in extended precision. `steps = 0` returns
/// `approx_solve(b)`. Fails if the residual grows two steps in a row;
/// otherwise returns the iterate with the smallest residual.
pub fn iterative_refinement(
    residual: impl Fn(&[f64]) -> Vec<f64>,
    approx_solve: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let mut y = approx_solve(b);
    let mut r = residual(&y);
    let mut rn = linalg::vec_norm(&r);
    let mut best = (rn, y.clone());
    let mut growth = 0;
    for step in 0..steps {
        if rn == 0.0 {
            break;
        }
        let d = approx_solve(&r);
        y.iter_mut().zip(&d).for_each(|(v, dv)| *v += dv);
        r = residual(&y);
        let next = linalg::vec_norm(&r);
        if !next.is_finite() {
            return Err(Error::Diverged(step + 1));
        }
        growth = if next > rn { growth + 1 } else { 0 };
        if growth >= 2 {
            return Err(Error::Diverged(step + 1));
        }
        rn = next;
        if rn < best.0 {
            best = (rn, y.clone());
        }
    }
    Ok(best.1)
}

/// Relative correction size at which extended refinement stops.
pub const EXT_REFINE_TOL: f64 = 1e-31;

/// Refinement with the iterate accumulated in double-double: corrections
/// come from the standard-precision `approx_solve`, residuals from
/// `residual` in extended precision. Runs until the residual stops
/// shrinking, falls below [`EXT_REFINE_TOL`] relative to `b`, or `max_steps`
/// is reached, and returns the best iterate with its residual norm.
pub fn refine_ext(
    residual: impl Fn(&[ExtScalar]) -> Vec<ExtScalar>,
    approx_solve: impl Fn(&[f64]) -> Vec<f64>,
    b: &[ExtScalar],
    max_steps: usize,
) -> (Vec<ExtScalar>, f64) {
    let bn = ext_norm(b).max(f64::MIN_POSITIVE);
    let mut x = ext_vec(&approx_solve(&round_vec(b)));
    let mut r = residual(&x);
    let mut rn = ext_norm(&r);
    let mut best = (x.clone(), rn);
    let mut worse = 0;
    for _ in 0..max_steps {
        if rn <= EXT_REFINE_TOL * bn || !rn.is_finite() {
            break;
        }
        let d = approx_solve(&round_vec(&r));
        x.iter_mut().zip(&d).for_each(|(v, dv)| *v += *dv);
        r = residual(&x);
        let next = ext_norm(&r);
        if next < best.1 {
            best = (x.clone(), next);
            worse = 0;
        } else {
            worse += 1;
            if worse >= 2 {
                break;
            }
        }
        rn = next;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, Rng};

    fn dominant(n: usize, seed: u64) -> Matrix {
        gaussian(n, n, Seed(seed)).shift_diag(3.0 * n as f64)
    }

    #[test]
    fn reconstructs_dominant() {
        let a = dominant(40, 1);
        let f = genp(&a).unwrap();
        let r = &f.l().matmul(&f.u()) - &a;
        assert!(r.norm(Norm::Two) <= 1e-12 * a.norm(Norm::Two));
    }

    #[test]
    fn zero_leading_entry_fails() {
        let a = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(matches!(genp(&a), Err(Error::ZeroPivot { step: 0, .. })));
    }

    #[test]
    fn monitor_within_bound() {
        let n = 12;
        let a = rng::random_orthogonal(n, Seed(3)).shift_diag(2.0);
        let f = genp(&a).unwrap();
        let big = a.norm(Norm::Two);
        let mut small: f64 = 0.0;
        for k in 1..=n {
            small = small.max(linalg::inverse(&a.submatrix(0, 0, k, k)).unwrap().norm(Norm::Two));
        }
        let bound = big + small * big * big;
        assert!(f.monitor.max_pivot <= bound && f.monitor.max_inv_pivot <= bound);
    }

    #[test]
    fn block_one_matches_scalar() {
        let a = dominant(10, 4);
        let f = genp(&a).unwrap();
        let g = block_genp(&a, 1).unwrap();
        assert!((&f.l() - &g.l).max_abs() < 1e-14);
        assert!((&f.u() - &g.u).max_abs() < 1e-12);
    }

    #[test]
    fn block_sizes_solve() {
        let n = 13;
        let x = gaussian(n, n, Seed(5));
        let spd = x.tr_matmul(&x).shift_diag(1.0);
        let b: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let want = linalg::solve(&spd, &b).unwrap();
        for bs in [1, 4, n] {
            let g = block_genp(&spd, bs).unwrap();
            let y = g.solve(&b);
            assert!(y.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-9), "{bs}");
            assert!((&g.l.matmul(&g.u) - &spd).max_abs() < 1e-10);
            assert!(g.monitor.blocks.iter().all(|&(bn, bi)| bn.is_finite() && bi.is_finite()));
        }
    }

    #[test]
    fn identity_multiplier_free_case() {
        let a = dominant(16, 6);
        let b: Vec<f64> = (0..16).map(|i| (i as f64).sin()).collect();
        let plain = genp_solve(&a, &b).unwrap();
        assert!(relative_residual(&a, &plain, &b) < 1e-14);
        for m in [Multiplier::SignCirculant, Multiplier::HouseholderPm1, Multiplier::Gaussian] {
            let s = randomized_genp_solve(&a, &b, m, 1, Seed(7)).unwrap();
            assert!(s.residual() < 1e-13, "{m:?}: {}", s.residual());
        }
    }

    #[test]
    fn refinement_contracts() {
        let n = 8;
        let a = dominant(n, 8);
        let inv = linalg::inverse(&a).unwrap().scale(0.9);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let exact = linalg::solve(&a, &b).unwrap();
        let err = |y: &[f64]| linalg::vec_norm(&linalg::vec_sub(y, &exact));
        let mut prev = f64::INFINITY;
        for steps in 0..4 {
            let y = iterative_refinement(|y| xprec::xresidual(&a, y, &b), |r| inv.matvec(r), &b, steps).unwrap();
            let e = err(&y);
            assert!(e * 5.0 <= prev || e < 1e-14, "{steps}: {e} vs {prev}");
            prev = e;
        }
        let y0 = iterative_refinement(|y| xprec::xresidual(&a, y, &b), |r| inv.matvec(r), &b, 0).unwrap();
        assert_eq!(y0, inv.matvec(&b));
    }

    #[test]
    fn refinement_detects_divergence() {
        let a = Matrix::identity(3);
        let b = [1.0, 1.0, 1.0];
        let bad = |r: &[f64]| r.iter().map(|v| -3.0 * v).collect::<Vec<_>>();
        assert!(matches!(iterative_refinement(|y| xprec::xresidual(&a, y, &b), bad, &b, 5), Err(Error::Diverged(_))));
    }

    #[test]
    fn exact_solver_is_fixed_point() {
        let a = Matrix::diag(&[2.0, 4.0, 8.0]);
        let b = [2.0, 4.0, 8.0];
        let inv = |r: &[f64]| vec![r[0] / 2.0, r[1] / 4.0, r[2] / 8.0];
        assert_eq!(iterative_refinement(|y| xprec::xresidual(&a, y, &b), inv, &b, 3).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn ext_refinement_beats_double() {
        // Hilbert-like system where plain f64 solves stall
        let n = 8;
        let a = Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let lu = linalg::Lu::factor(&a).unwrap();
        let mut rng = Rng::new(Seed(1));
        let b = ext_vec(&rng.gaussian_vec(n));
        let (x, rn) = refine_ext(|x| xprec::xresidual_ext(&a, x, &b), |r| lu.solve(r), &b, 20);
        assert!(rn <= 1e-29 * a.norm(Norm::Two) * ext_norm(&x), "{rn}");
    }
}
