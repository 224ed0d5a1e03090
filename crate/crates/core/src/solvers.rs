//! Solvers for ill conditioned systems: SMW recovery from additive
//! preprocessing, the dual variant, block triangulation, augmented Toeplitz
//! solves and Newton inversion.

use crate::elimination::{genp, refine_ext};
use crate::linalg::{self, Lu, Matrix, Norm};
use crate::lowrank::Outcome;
use crate::precond::{additive_preprocess, balance, dual_additive, AdditivePrep, Smw, REFINE_CAP, SINGULAR_RATIO};
use crate::rng::{self, Rng, Seed};
use crate::singspaces::{nmb, KAPPA_MAX};
use crate::structured::{levinson_symmetric, DisplacementGenerator, GsInverse, Toeplitz};
use crate::xprec::{self, ext_norm, ext_vec, round_vec, xmatmul_mixed, ExtLu, ExtMatrix, ExtScalar};
use crate::{Error, Result};

/// Relative residual `||b - A y|| / ||b||` for an extended-precision `y`.
pub fn relative_residual_ext(a: &Matrix, y: &[ExtScalar], b: &[f64]) -> f64 {
    let r = xprec::xresidual_ext(a, y, &ext_vec(b));
    let nb = linalg::vec_norm(b);
    ext_norm(&r) / if nb > 0.0 { nb } else { 1.0 }
}

/// Approximate solver for a well conditioned matrix: elimination without
/// pivoting, falling back to partial pivoting on a vanishing pivot.
enum Approx {
    Genp(crate::elimination::GenpFactors),
    Lu(Lu),
}

impl Approx {
    fn new(c: &Matrix) -> Result<Self> {
        match genp(c) {
            Ok(f) => Ok(Approx::Genp(f)),
            Err(_) => Ok(Approx::Lu(Lu::factor(c)?)),
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Approx::Genp(f) => f.solve(b),
            Approx::Lu(f) => f.solve(b),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SmwSolution {
    pub y: Vec<ExtScalar>,
    pub kappa_c: f64,
    pub residual: f64,
}

impl SmwSolution {
    pub fn y_f64(&self) -> Vec<f64> {
        round_vec(&self.y)
    }
}

/// Solve `A y = b` through `C = A + U V^T` with Gaussian `U`, `V` of width
/// `r` and the recovery `y = x_b + X_U G^{-1} V^T x_b`.
pub fn solve_smw_refined(a: &Matrix, b: &[f64], r: usize, seed: Seed) -> Result<SmwSolution> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Shape(format!("A {:?}, b {}", a.shape(), b.len())));
    }
    let mut last = Error::IllConditioned(f64::INFINITY);
    for attempt in 0..2 {
        let s = seed.derive(attempt);
        let u = rng::gaussian(n, r, s.stream(1));
        let v = rng::gaussian(n, r, s.stream(2));
        let (u, v) = balance(a, &u, &v);
        let prep = additive_preprocess(a, &u, &v, true)?;
        let kappa_c = linalg::cond2(&prep.c);
        if kappa_c > KAPPA_MAX {
            last = Error::IllConditioned(kappa_c);
            continue;
        }
        let approx = Approx::new(&prep.c)?;
        let smw = match Smw::new(&prep, |x: &[f64]| approx.solve(x)) {
            Ok(s) => s,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let y = smw.solve_ext(&ext_vec(b));
        let residual = relative_residual_ext(a, &y, b);
        return Ok(SmwSolution { y, kappa_c, residual });
    }
    Err(last)
}

/// Solve `A y = b` through the dual preprocessing
/// `C_^{-1} = A^{-1} + U_ V_^T`, i.e. `y = (C_^{-1} - U_ V_^T) b`, followed
/// by extended refinement against `A`.
pub fn solve_dual(a: &Matrix, b: &[f64], q: usize, seed: Seed) -> Result<Vec<ExtScalar>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Shape(format!("A {:?}, b {}", a.shape(), b.len())));
    }
    let inv_norm = inverse_norm(a)?;
    let attempt = |s: Seed| -> Result<Vec<ExtScalar>> {
        let (u, v) = scaled_pair(n, q, inv_norm, s);
        let prep = dual_additive(a, &u, &v, true)?;
        let approx = Approx::new(&prep.c)?;
        let solve = |r: &[f64]| {
            let z = approx.solve(r);
            let w = u.matvec(&v.tr_matvec(r));
            linalg::vec_sub(&z, &w)
        };
        let be = ext_vec(b);
        Ok(refine_ext(|y| xprec::xresidual_ext(a, y, &be), solve, &be, REFINE_CAP).0)
    };
    attempt(seed).or_else(|_| attempt(seed.derive(1)))
}

fn inverse_norm(a: &Matrix) -> Result<f64> {
    match linalg::singular_values(a).last() {
        Some(&s) if s > 0.0 => Ok(1.0 / s),
        _ => Err(Error::Singular("A")),
    }
}

/// Gaussian `n x q` pair with `||U V^T|| = target`.
fn scaled_pair(n: usize, q: usize, target: f64, seed: Seed) -> (Matrix, Matrix) {
    let u = rng::gaussian(n, q, seed.stream(1));
    let v = rng::gaussian(n, q, seed.stream(2));
    let uv = u.matmul(&v.transpose()).norm(Norm::Two);
    let s = (target / uv).sqrt();
    (u.scale(s), v.scale(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockVariant {
    /// Orthonormal `K_1 = Q(C^{-T} V)`, `L_1 = Q(C^{-1} U)` and their complements.
    Orthogonal,
    /// Gaussian `K_0`, `L_0` with unorthogonalized `K_1`, `L_1`.
    Simplified,
    /// Leading bases from the dual preprocessing, trailing ones by `nmb`.
    Dual,
    /// Leading bases `Q(A U)`, `Q(A^T V)` from Gaussian samples, trailing ones by `nmb`.
    Sampling,
}

impl BlockVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "orthogonal" => Some(Self::Orthogonal),
            "simplified" => Some(Self::Simplified),
            "dual" => Some(Self::Dual),
            "sampling" => Some(Self::Sampling),
            _ => None,
        }
    }
}

/// `W = (K_0|K_1)^T A (L_0|L_1)` with its blocks kept in extended precision.
#[derive(Clone, Debug)]
pub struct BlockTriangulation {
    pub k0: Matrix,
    pub k1: Matrix,
    pub l0: Matrix,
    pub l1: Matrix,
    pub w00: ExtMatrix,
    pub w01: ExtMatrix,
    pub w10: ExtMatrix,
    pub w11: ExtMatrix,
    pub variant: BlockVariant,
    pub orthogonal: bool,
}

impl BlockTriangulation {
    fn assemble(a: &Matrix, k0: Matrix, k1: Matrix, l0: Matrix, l1: Matrix, variant: BlockVariant) -> Self {
        let al0 = xmatmul_mixed(a, &ExtMatrix::from_matrix(&l0));
        let al1 = xmatmul_mixed(a, &ExtMatrix::from_matrix(&l1));
        let (k0t, k1t) = (k0.transpose(), k1.transpose());
        let w00 = xmatmul_mixed(&k0t, &al0);
        let w01 = xmatmul_mixed(&k0t, &al1);
        let w10 = xmatmul_mixed(&k1t, &al0);
        let w11 = xmatmul_mixed(&k1t, &al1);
        let orthogonal = variant == BlockVariant::Orthogonal;
        Self { k0, k1, l0, l1, w00, w01, w10, w11, variant, orthogonal }
    }

    pub fn leading(&self) -> usize {
        self.k0.cols()
    }

    pub fn trailing(&self) -> usize {
        self.k1.cols()
    }

    /// The full `W`, rounded.
    pub fn w(&self) -> Matrix {
        let top = self.w00.round().hcat(&self.w01.round());
        top.vcat(&self.w10.round().hcat(&self.w11.round()))
    }

    /// Largest norm among `W_01`, `W_10`, `W_11`.
    pub fn off_norm(&self) -> f64 {
        [&self.w01, &self.w10, &self.w11]
            .iter()
            .map(|m| if m.rows() * m.cols() == 0 { 0.0 } else { m.round().norm(Norm::Two) })
            .fold(0.0, f64::max)
    }

    /// `sigma_q(W_00) / off_norm`.
    pub fn dominance(&self) -> f64 {
        let s = linalg::singular_values(&self.w00.round());
        s.last().copied().unwrap_or(0.0) / self.off_norm()
    }
}

/// Block triangulation of a matrix of numerical rank `q`.
pub fn block_triangulate(a: &Matrix, q: usize, variant: BlockVariant, seed: Seed) -> Result<Outcome<BlockTriangulation>> {
    let n = a.rows();
    if !a.is_square() || q > n {
        return Err(Error::Invalid(format!("rank {q} for {:?}", a.shape())));
    }
    let mut last = String::new();
    for attempt in 0..2 {
        let s = seed.derive(attempt);
        let got = match variant {
            BlockVariant::Orthogonal | BlockVariant::Simplified => additive_bases(a, n - q, variant, s),
            BlockVariant::Dual => dual_bases(a, q, s),
            BlockVariant::Sampling => sampling_bases(a, q, s),
        };
        match got {
            Ok(Outcome::Success((k0, k1, l0, l1))) => {
                return Ok(Outcome::Success(BlockTriangulation::assemble(a, k0, k1, l0, l1, variant)));
            }
            Ok(Outcome::Failure(f)) => last = f.detail,
            Err(e) => last = e.to_string(),
        }
    }
    Ok(Outcome::failure("preprocessing", last))
}

type Bases = (Matrix, Matrix, Matrix, Matrix);

fn refined_cols(prep: &AdditivePrep, approx: &Approx, rhs: &Matrix) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..rhs.cols()).map(|j| round_vec(&prep.solve_c_ext(&|x: &[f64]| approx.solve(x), &ext_vec(&rhs.col(j))))).collect();
    Matrix::from_cols(rhs.rows(), &cols)
}

fn additive_bases(a: &Matrix, r: usize, variant: BlockVariant, seed: Seed) -> Result<Outcome<Bases>> {
    let n = a.rows();
    let q = n - r;
    if r == 0 {
        let i = Matrix::identity(n);
        let (k0, l0) = match variant {
            BlockVariant::Simplified => (rng::gaussian(n, n, seed.stream(3)), rng::gaussian(n, n, seed.stream(4))),
            _ => (i.clone(), i),
        };
        return Ok(Outcome::Success((k0, Matrix::zeros(n, 0), l0, Matrix::zeros(n, 0))));
    }
    let (u, v) = balance(a, &rng::gaussian(n, r, seed.stream(1)), &rng::gaussian(n, r, seed.stream(2)));
    let prep = additive_preprocess(a, &u, &v, true)?;
    let kappa = linalg::cond2(&prep.c);
    if kappa > KAPPA_MAX {
        return Ok(Outcome::failure("conditioning", format!("kappa(C) = {kappa:e}")));
    }
    let prep_t = AdditivePrep { a: a.transpose(), u: v.clone(), v: u.clone(), c: prep.c.transpose() };
    let xu = refined_cols(&prep, &Approx::new(&prep.c)?, &u);
    let yv = refined_cols(&prep_t, &Approx::new(&prep_t.c)?, &v);
    Ok(Outcome::Success(match variant {
        BlockVariant::Simplified => {
            let s = 1.0 / (n as f64).sqrt();
            let k0 = rng::gaussian(n, q, seed.stream(3)).scale(s);
            let l0 = rng::gaussian(n, q, seed.stream(4)).scale(s);
            (k0, yv, l0, xu)
        }
        _ => {
            let l1 = linalg::qr_q(&xu)?;
            let k1 = linalg::qr_q(&yv)?;
            (linalg::orthonormal_complement(&k1), k1, linalg::orthonormal_complement(&l1), l1)
        }
    }))
}

fn dual_bases(a: &Matrix, q: usize, seed: Seed) -> Result<Outcome<Bases>> {
    let n = a.rows();
    let (u, v) = scaled_pair(n, q, inverse_norm(a)?, seed);
    let prep = dual_additive(a, &u, &v, true)?;
    let cu = prep.c.matmul(&u);
    let ctv = prep.c.tr_matmul(&v);
    let k0 = cu.scale(1.0 / cu.norm(Norm::Two));
    let l0 = ctv.scale(1.0 / ctv.norm(Norm::Two));
    complete_bases(k0, l0)
}

fn sampling_bases(a: &Matrix, q: usize, seed: Seed) -> Result<Outcome<Bases>> {
    let n = a.rows();
    let k0 = linalg::qr_q(&a.matmul(&rng::gaussian(n, q, seed.stream(1))))?;
    let l0 = linalg::qr_q(&a.tr_matmul(&rng::gaussian(n, q, seed.stream(2))))?;
    complete_bases(k0, l0)
}

fn complete_bases(k0: Matrix, l0: Matrix) -> Result<Outcome<Bases>> {
    let (n, q) = k0.shape();
    let k1 = nmb(&k0.transpose())?;
    let l1 = nmb(&l0.transpose())?;
    if k1.cols() != n - q || l1.cols() != n - q {
        return Ok(Outcome::failure("nmb", format!("trailing widths {} and {}, expected {}", k1.cols(), l1.cols(), n - q)));
    }
    Ok(Outcome::Success((k0, k1, l0, l1)))
}

/// Solve `A y = b` from a block triangulation, eliminating with the Schur
/// complement `G = W_11 - W_10 W_00^{-1} W_01` in extended precision.
pub fn solve_blocktri(bt: &BlockTriangulation, a: &Matrix, b: &[f64]) -> Result<Vec<ExtScalar>> {
    if a.rows() != b.len() || bt.k0.rows() != b.len() {
        return Err(Error::Shape("right-hand side length".into()));
    }
    let be = ext_vec(b);
    let c0 = xprec::xtr_matvec(&bt.k0, &be);
    let c1 = xprec::xtr_matvec(&bt.k1, &be);
    let lu00 = factor_checked(&bt.w00, "W_00")?;
    let t = lu00.solve(&c0);
    if bt.trailing() == 0 {
        return Ok(xprec::xmatvec(&bt.l0, &t));
    }
    let z = lu00.solve_matrix(&bt.w01);
    let g = bt.w11.sub(&bt.w10.matmul(&z));
    let glu = factor_checked(&g, "Schur complement G")?;
    let rhs = xprec::ext_sub(&c1, &bt.w10.matvec(&t));
    let x1 = glu.solve(&rhs);
    let x0 = xprec::ext_sub(&t, &z.matvec(&x1));
    Ok(xprec::ext_add(&xprec::xmatvec(&bt.l0, &x0), &xprec::xmatvec(&bt.l1, &x1)))
}

fn factor_checked(m: &ExtMatrix, what: &'static str) -> Result<ExtLu> {
    let lu = ExtLu::factor(m).map_err(|_| Error::Singular(what))?;
    if lu.pivot_ratio() < SINGULAR_RATIO {
        return Err(Error::Singular(what));
    }
    Ok(lu)
}

/// Result of the augmented Toeplitz solve.
#[derive(Clone, Debug)]
pub struct ToeplitzAugSolve {
    pub y: Vec<ExtScalar>,
    pub residual: f64,
    /// The corner entry of the embedding.
    pub corner: f64,
    /// The `(n+1) x (n+1)` symmetric Toeplitz embedding.
    pub k: Toeplitz,
}

/// Embed symmetric `T` into `K` of order `n + 1` with a random corner,
/// compute `v = K^{-1} e_1` with extended refinement, recover `T^{-1}` from
/// `v` and `J v` and apply it to `b`.
pub fn toeplitz_solve_aug(t: &Toeplitz, b: &[f64], seed: Seed) -> Result<ToeplitzAugSolve> {
    let n = t.rows();
    if t.cols() != n || !t.is_symmetric() || b.len() != n || n < 3 {
        return Err(Error::Invalid("symmetric Toeplitz of order >= 3 and matching rhs expected".into()));
    }
    let col = t.first_col();
    let scale = t.norm_estimate().max(col[0].abs());
    let mut rng = Rng::new(seed.stream(91));
    let lead = LeadingSolver::new(&col)?;
    let mut last = Error::Singular("e_1^T K^{-1} e_1");
    for _ in 0..2 {
        let corner = rng.sign() * rng.uniform_in(0.5, 1.5) * scale;
        let mut kcol = col.clone();
        kcol.push(corner);
        let k = Toeplitz::symmetric(&kcol);
        let v = match solve_first_column(&k, &lead) {
            Ok(v) => v,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let w: Vec<ExtScalar> = v.iter().rev().copied().collect();
        let tinv = match GsInverse::leading_from_border(&v, &w) {
            Ok(g) => g,
            Err(e) => {
                last = e;
                continue;
            }
        };
        let top = t.operator().with_ext();
        let be = ext_vec(b);
        let (y, _) = refine_ext(|y| xprec::ext_sub(&be, &top.apply_ext(y)), |r| tinv.apply(r), &be, REFINE_CAP);
        let r = xprec::ext_sub(&be, &top.apply_ext(&y));
        let residual = ext_norm(&r) / linalg::vec_norm(b).max(f64::MIN_POSITIVE);
        return Ok(ToeplitzAugSolve { y, residual, corner, k });
    }
    Err(last)
}

/// Implicit inverse of the leading `(n-1) x (n-1)` block of `T`.
struct LeadingSolver {
    inv: GsInverse,
}

impl LeadingSolver {
    fn new(col: &[f64]) -> Result<Self> {
        let m = col.len() - 1;
        let mut e1 = vec![0.0; m];
        e1[0] = 1.0;
        let p = levinson_symmetric(&col[..m], &e1)?;
        let q: Vec<f64> = p.iter().rev().copied().collect();
        Ok(Self { inv: GsInverse::from_end_columns(&p, &q)? })
    }
}

/// `K^{-1} e_1` by bordering the leading block solve with the trailing
/// `2 x 2` Schur complement, refined in extended precision.
fn solve_first_column(k: &Toeplitz, lead: &LeadingSolver) -> Result<Vec<ExtScalar>> {
    let np1 = k.rows();
    let m = np1 - 2;
    let kcol = k.first_col();
    let bcol0: Vec<f64> = (0..m).map(|i| kcol[m - i]).collect();
    let bcol1: Vec<f64> = (0..m).map(|i| kcol[m + 1 - i]).collect();
    let p0 = lead.inv.apply(&bcol0);
    let p1 = lead.inv.apply(&bcol1);
    let s = [
        [kcol[0] - linalg::dot(&bcol0, &p0), kcol[1] - linalg::dot(&bcol0, &p1)],
        [kcol[1] - linalg::dot(&bcol1, &p0), kcol[0] - linalg::dot(&bcol1, &p1)],
    ];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    let snorm = s.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if det.abs() <= 1e-14 * snorm * snorm {
        return Err(Error::Singular("bordering Schur complement"));
    }
    let approx = |r: &[f64]| -> Vec<f64> {
        let z = lead.inv.apply(&r[..m]);
        let g0 = r[m] - linalg::dot(&bcol0, &z);
        let g1 = r[m + 1] - linalg::dot(&bcol1, &z);
        let x0 = (s[1][1] * g0 - s[0][1] * g1) / det;
        let x1 = (s[0][0] * g1 - s[1][0] * g0) / det;
        let mut x: Vec<f64> = z.iter().zip(p0.iter().zip(&p1)).map(|(zi, (a, b))| zi - a * x0 - b * x1).collect();
        x.push(x0);
        x.push(x1);
        x
    };
    let op = k.operator().with_ext();
    let mut e1 = vec![ExtScalar::ZERO; np1];
    e1[0] = ExtScalar::ONE;
    let (v, rn) = refine_ext(|x| xprec::ext_sub(&e1, &op.apply_ext(x)), approx, &e1, REFINE_CAP);
    if !rn.is_finite() || rn > 1e-20 {
        return Err(Error::Diverged(REFINE_CAP));
    }
    Ok(v)
}

/// Newton iterate history.
#[derive(Clone, Debug)]
pub struct NewtonResult<T> {
    pub x: T,
    /// `||I - C X_i||_2` for every iterate, the initial one first.
    pub residuals: Vec<f64>,
}

/// `X_0 = 2n C^T / ((1+n) ||C||_1 ||C||_inf)`.
pub fn newton_start(c: &Matrix) -> Matrix {
    let n = c.rows() as f64;
    let s = 2.0 * n / ((1.0 + n) * c.norm(Norm::One) * c.norm(Norm::Inf));
    c.transpose().scale(s)
}

/// Newton iteration `X_{i+1} = X_i (2I - C X_i)`.
pub fn newton_inverse(c: &Matrix, tol: f64, max_iter: usize) -> Result<NewtonResult<Matrix>> {
    if !c.is_square() {
        return Err(Error::Shape("square matrix expected".into()));
    }
    let n = c.rows();
    let mut x = newton_start(c);
    let mut residuals = vec![];
    for _ in 0..=max_iter {
        let r = &Matrix::identity(n) - &c.matmul(&x);
        let rn = r.norm(Norm::Two);
        residuals.push(rn);
        if rn <= tol {
            return Ok(NewtonResult { x, residuals });
        }
        if !rn.is_finite() {
            return Err(Error::Diverged(residuals.len()));
        }
        x = &x + &x.matmul(&r);
    }
    Err(Error::MaxIter(max_iter))
}

fn apply_t_matrix(g: &DisplacementGenerator, m: &Matrix) -> Matrix {
    let cols: Vec<Vec<f64>> = (0..m.cols()).map(|j| g.apply_transpose(&m.col(j))).collect();
    Matrix::from_cols(g.dim(), &cols)
}

/// Generator of `X C X` for `X` with operators `(R, L)` and `C` with `(L, R)`.
fn chain_xcx(x: &DisplacementGenerator, c: &DisplacementGenerator) -> Result<DisplacementGenerator> {
    let xg_c = x.apply_matrix(&c.g);
    let xcg_x = x.apply_matrix(&c.apply_matrix(&x.g));
    let h1 = apply_t_matrix(x, &apply_t_matrix(c, &x.h));
    let h2 = apply_t_matrix(x, &c.h);
    let g = x.g.hcat(&xg_c).hcat(&xcg_x);
    let h = h1.hcat(&h2).hcat(&x.h);
    DisplacementGenerator::new(x.left, x.right, g, h)
}

const STAGNATION_WINDOW: usize = 5;

/// Newton iteration on displacement generators: every iterate
/// `2X - X C X` is recompressed to at most `d_target` terms.
pub fn newton_toeplitz(c: &DisplacementGenerator, d_target: usize, tol: f64, max_iter: usize) -> Result<NewtonResult<DisplacementGenerator>> {
    let n = c.dim();
    let cd = c.to_dense();
    let x0 = newton_start(&cd);
    let mut x = DisplacementGenerator::from_dense(&x0, c.right, c.left, 1e-15)?.compress(d_target, 1e-15)?;
    let mut residuals = vec![];
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for _ in 0..=max_iter {
        let rn = (&Matrix::identity(n) - &cd.matmul(&x.to_dense())).norm(Norm::Two);
        residuals.push(rn);
        if rn <= tol {
            return Ok(NewtonResult { x, residuals });
        }
        if !rn.is_finite() {
            return Err(Error::Diverged(residuals.len()));
        }
        if rn < best {
            best = rn;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STAGNATION_WINDOW {
                return Err(Error::Stagnation(residuals.len()));
            }
        }
        let xcx = chain_xcx(&x, c)?;
        x = x.scale(2.0).add(&xcx.scale(-1.0))?.compress(d_target, 1e-15)?;
    }
    Err(Error::MaxIter(max_iter))
}
