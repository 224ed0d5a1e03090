//! Counter-based random streams and the seeded test-matrix families.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::structured::{Circulant, Toeplitz};
use crate::xprec::{self, ExtMatrix, ExtScalar};
use std::f64::consts::PI;

/// Experiment seed; trial `k` of a run uses `seed + k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn derive(self, k: u64) -> Seed {
        Seed(self.0.wrapping_add(k))
    }

    /// Independent sub-stream for a named stage of one trial.
    pub fn stream(self, tag: u64) -> Seed {
        Seed(mix(self.0 ^ mix(tag.wrapping_add(0x5851_F42D_4C95_7F2D))))
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 evaluated at `seed + counter * golden`, so draw `k` is a pure
/// function of `(seed, k)`.
#[derive(Clone, Debug)]
pub struct Rng {
    key: u64,
    counter: u64,
    spare: Option<f64>,
}

impl Rng {
    pub fn new(seed: Seed) -> Self {
        Self { key: seed.0, counter: 0, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    pub fn uniform(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Standard normal via Box-Muller; both outputs of a pair are used in order.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.gaussian()).collect()
    }

    pub fn uniform_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }

    pub fn sign_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sign()).collect()
    }
}

/// `m x n` matrix of independent `N(mu, sigma^2)` draws in row-major order.
pub fn gaussian_matrix(m: usize, n: usize, mu: f64, sigma: f64, seed: Seed) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::from_fn(m, n, |_, _| mu + sigma * rng.gaussian())
}

/// Standard Gaussian matrix.
pub fn gaussian(m: usize, n: usize, seed: Seed) -> Matrix {
    gaussian_matrix(m, n, 0.0, 1.0, seed)
}

/// Entries uniform on `[-1, 1)`.
pub fn uniform_matrix(m: usize, n: usize, seed: Seed) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::from_fn(m, n, |_, _| rng.uniform())
}

/// Toeplitz matrix from `m + n - 1` Gaussian draws.
pub fn gaussian_toeplitz(m: usize, n: usize, mu: f64, sigma: f64, seed: Seed) -> Toeplitz {
    let mut rng = Rng::new(seed);
    let diag = (0..m + n - 1).map(|_| mu + sigma * rng.gaussian()).collect();
    Toeplitz::from_diagonals(m, n, diag)
}

/// `f`-circulant matrix whose first column holds `n` Gaussian draws.
pub fn gaussian_circulant(n: usize, f: f64, mu: f64, sigma: f64, seed: Seed) -> Circulant {
    let mut rng = Rng::new(seed);
    Circulant::new(f, (0..n).map(|_| mu + sigma * rng.gaussian()).collect())
}

/// Circulant matrix with a random `+-1` first column.
pub fn sign_circulant(n: usize, seed: Seed) -> Circulant {
    Circulant::new(1.0, Rng::new(seed).sign_vec(n))
}

/// Random sign vectors `u`, `v` with `|u^T v| >= 1`.
pub fn sign_pair(n: usize, seed: Seed) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Rng::new(seed);
    loop {
        let u = rng.sign_vec(n);
        let v = rng.sign_vec(n);
        if linalg::dot(&u, &v).abs() >= 1.0 {
            return (u, v);
        }
    }
}

/// `I - v u^T / (u^T v)` for the sign pair of [`sign_pair`]; note that it
/// annihilates `v`.
pub fn householder_pm1(n: usize, seed: Seed) -> Matrix {
    householder_scaled(n, 1.0, seed)
}

/// `I - 2 v u^T / (u^T v)`, the nonsingular (involutory) member of the family.
pub fn householder_reflector_pm1(n: usize, seed: Seed) -> Matrix {
    householder_scaled(n, 2.0, seed)
}

fn householder_scaled(n: usize, c: f64, seed: Seed) -> Matrix {
    let (u, v) = sign_pair(n, seed);
    let uv = linalg::dot(&u, &v);
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - c * v[i] * u[j] / uv)
}

/// `n x r` stack of `r x r` blocks: randomly signed identities alternating
/// with zero blocks, the last complete block always a signed identity and any
/// remaining rows zero; scaled to unit spectral norm.
pub fn block_sign(n: usize, r: usize, seed: Seed) -> Matrix {
    assert!(r >= 1 && r <= n, "block width must lie in 1..=n");
    let mut rng = Rng::new(seed);
    let full = n / r;
    let mut u = Matrix::zeros(n, r);
    let mut count = 0usize;
    for b in 0..full {
        if b % 2 == 0 || b + 1 == full {
            let s = rng.sign();
            for i in 0..r {
                u[(b * r + i, i)] = s;
            }
            count += 1;
        }
    }
    u.scale(1.0 / (count as f64).sqrt())
}

/// Same layout as [`block_sign`] with all signs fixed to `+1`.
pub fn block_sign_plus(n: usize, r: usize) -> Matrix {
    let m = block_sign(n, r, Seed(0));
    Matrix::from_fn(n, r, |i, j| m[(i, j)].abs())
}

/// Random orthogonal matrix: the `Q` factor of a Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: Seed) -> Matrix {
    random_orthonormal(n, n, seed)
}

/// `m x k` matrix with orthonormal columns.
pub fn random_orthonormal(m: usize, k: usize, seed: Seed) -> Matrix {
    let mut s = seed;
    loop {
        if let Ok(q) = linalg::qr_q(&gaussian(m, k, s)) {
            return q;
        }
        s = s.stream(1);
    }
}

/// `S diag(sigma) T^T` for random orthogonal `S`, `T` (or `T = S`), summed
/// in extended precision and rounded once.
pub fn planted_svd(sigma: &[f64], symmetric: bool, seed: Seed) -> Matrix {
    let n = sigma.len();
    let s = random_orthogonal(n, seed.stream(11));
    let t = if symmetric { s.clone() } else { random_orthogonal(n, seed.stream(12)) };
    compose_svd(&s, sigma, &t)
}

/// `S diag(sigma) T^T` with extended accumulation.
pub fn compose_svd(s: &Matrix, sigma: &[f64], t: &Matrix) -> Matrix {
    let k = sigma.len();
    let ss = ExtMatrix::from_fn(s.rows(), k, |i, j| {
        let (h, l) = xprec::two_prod(s[(i, j)], sigma[j]);
        ExtScalar::from_pair(h, l)
    });
    let tt = t.cols_range(0, k).transpose();
    xprec::xmatmul_ext_std(&ss, &tt).round()
}

/// Singular value profile `1/j` for `j <= q`, then `floor` for the rest.
pub fn head_profile(n: usize, q: usize, floor: f64) -> Vec<f64> {
    (1..=n).map(|j| if j <= q { 1.0 / j as f64 } else { floor }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixClass {
    Gauss,
    GaussToeplitz,
    GaussCirculant { f: f64 },
    SignCirculant,
    HouseholderPm1,
    /// `n x r` block-sign preprocessor.
    BlockSign { r: usize },
    Orthogonal,
    Class1n { r: usize },
    Class1s { r: usize },
    Class2n { r: usize },
    Class2s { r: usize },
    Class3n { r: usize },
    Class3s { r: usize },
    Class4n,
    Class4s,
    SvdPlanted(Vec<f64>),
    /// Well conditioned overall with a numerically singular leading
    /// `n/2 x n/2` block.
    IllLeadingBlock,
    /// `S + shift I` for a singular symmetric Toeplitz `S` of nullity one.
    ShiftedSingularToeplitz { shift: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixClassSpec {
    pub class: MatrixClass,
    pub rows: usize,
    pub cols: usize,
}

impl MatrixClassSpec {
    pub fn square(class: MatrixClass, n: usize) -> Self {
        Self { class, rows: n, cols: n }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Invalid("dimensions must be positive".into()));
        }
        let n = self.rows;
        let need_square = !matches!(self.class, MatrixClass::Gauss | MatrixClass::GaussToeplitz | MatrixClass::BlockSign { .. });
        if need_square && self.rows != self.cols {
            return Err(Error::Invalid(format!("{:?} needs a square shape", self.class)));
        }
        let r = match self.class {
            MatrixClass::Class1n { r }
            | MatrixClass::Class1s { r }
            | MatrixClass::Class2n { r }
            | MatrixClass::Class2s { r }
            | MatrixClass::Class3n { r }
            | MatrixClass::Class3s { r } => Some(r),
            _ => None,
        };
        if let Some(r) = r {
            if r == 0 || r + 2 > n {
                return Err(Error::Invalid(format!("nullity {r} incompatible with n = {n}")));
            }
        }
        if let MatrixClass::SvdPlanted(ref s) = self.class {
            if s.len() != n {
                return Err(Error::Invalid("sigma profile length must equal n".into()));
            }
        }
        if let MatrixClass::BlockSign { r } = self.class {
            if r == 0 || r > n || self.cols != r {
                return Err(Error::Invalid("block-sign needs 1 <= r <= n and cols = r".into()));
            }
        }
        Ok(())
    }
}

const BETA_SYMMETRIC: f64 = 1e-16;

/// Dense instance of a matrix class; a pure function of `(spec, seed)`.
pub fn test_matrix(spec: &MatrixClassSpec, seed: Seed) -> Result<Matrix> {
    spec.validate()?;
    let (m, n) = (spec.rows, spec.cols);
    Ok(match &spec.class {
        MatrixClass::Gauss => gaussian(m, n, seed),
        MatrixClass::GaussToeplitz => gaussian_toeplitz(m, n, 0.0, 1.0, seed).to_dense(),
        MatrixClass::GaussCirculant { f } => gaussian_circulant(n, *f, 0.0, 1.0, seed).to_dense(),
        MatrixClass::SignCirculant => sign_circulant(n, seed).to_dense(),
        MatrixClass::HouseholderPm1 => householder_pm1(n, seed),
        MatrixClass::BlockSign { r } => block_sign(m, *r, seed),
        MatrixClass::Orthogonal => random_orthogonal(n, seed),
        MatrixClass::Class1n { r } => planted_svd(&class1_profile(n, *r, seed), false, seed),
        MatrixClass::Class1s { r } => planted_svd(&class1_profile(n, *r, seed), true, seed),
        MatrixClass::Class2n { r } => {
            let w = random_orthonormal(n, n - r, seed.stream(21));
            let z = random_orthonormal(n - r, *r, seed.stream(22));
            shift_nonsymmetric(&w.hcat(&w.matmul(&z)))
        }
        MatrixClass::Class2s { r } => {
            let w = random_orthonormal(n, n - r, seed.stream(21));
            shift_symmetric(&xprec::xmatmul(&w, &w.transpose()))
        }
        MatrixClass::Class3n { r } => {
            let t = gaussian_toeplitz(n, n - r, 0.0, 1.0, seed.stream(31)).to_dense();
            let s = gaussian_toeplitz(n - r, *r, 0.0, 1.0, seed.stream(32)).to_dense();
            shift_nonsymmetric(&t.hcat(&t.matmul(&s)))
        }
        MatrixClass::Class3s { r } => {
            let t = gaussian_toeplitz(n, n - r, 0.0, 1.0, seed.stream(31)).to_dense();
            shift_symmetric(&xprec::xmatmul(&t, &t.transpose()))
        }
        MatrixClass::Class4n => shift_nonsymmetric(&singular_toeplitz(n, seed)?.to_dense()),
        MatrixClass::Class4s => shift_symmetric(&singular_symmetric_toeplitz(n, seed)?.to_dense()),
        MatrixClass::SvdPlanted(sigma) => planted_svd(sigma, false, seed),
        MatrixClass::IllLeadingBlock => ill_leading_block(n, seed),
        MatrixClass::ShiftedSingularToeplitz { shift } => shifted_singular_toeplitz(n, *shift, seed)?.to_dense(),
    })
}

/// `sigma_1 = 1`, sorted uniform draws in `[0.1, 1)`, `0.1`, then `r` copies of
/// `1e-16`.
fn class1_profile(n: usize, r: usize, seed: Seed) -> Vec<f64> {
    let mut rng = Rng::new(seed.stream(10));
    let mut mid: Vec<f64> = (0..n - r - 2).map(|_| rng.uniform_in(0.1, 1.0)).collect();
    mid.sort_by(|a, b| b.total_cmp(a));
    let mut s = Vec::with_capacity(n);
    s.push(1.0);
    s.extend(mid);
    s.push(0.1);
    s.extend(std::iter::repeat_n(1e-16, r));
    s
}

fn shift_symmetric(a: &Matrix) -> Matrix {
    let nrm = a.norm(linalg::Norm::Two);
    a.scale(1.0 / nrm).shift_diag(BETA_SYMMETRIC)
}

/// `A / ||A|| + beta I` with `beta` bisected on a log scale until
/// `1e16 <= kappa <= 1e18`.
fn shift_nonsymmetric(a: &Matrix) -> Matrix {
    let nrm = a.norm(linalg::Norm::Two);
    let base = a.scale(1.0 / nrm);
    let (mut lo, mut hi) = (-22.0f64, -10.0f64);
    let mut best = base.shift_diag(1e-16);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let cand = base.shift_diag(10f64.powf(mid));
        let k = linalg::cond2(&cand);
        best = cand;
        if k > 1e18 {
            lo = mid;
        } else if k < 1e16 {
            hi = mid;
        } else {
            break;
        }
    }
    best
}

/// Toeplitz matrix with random diagonals except the `(n, 1)` corner, which
/// is chosen so that the matrix is singular.
pub fn singular_toeplitz(n: usize, seed: Seed) -> Result<Toeplitz> {
    let mut rng = Rng::new(seed.stream(41));
    let mut diag = rng.uniform_vec(2 * n - 1);
    // diag index i - j + n - 1; the (n,1) corner is the last one
    diag[2 * n - 2] = 0.0;
    let t0 = Toeplitz::from_diagonals(n, n, diag.clone());
    let lu = linalg::Lu::factor(&t0.to_dense())?;
    let mut en = vec![0.0; n];
    en[n - 1] = 1.0;
    let p1n = lu.solve(&en)[0];
    if p1n == 0.0 {
        return Err(Error::Singular("corner equation"));
    }
    diag[2 * n - 2] = -1.0 / p1n;
    Ok(Toeplitz::from_diagonals(n, n, diag))
}

/// Symmetric Toeplitz matrix whose corner entry is a real root of the
/// quadratic `det = 0`; redrawn up to 100 times until the roots are real.
pub fn singular_symmetric_toeplitz(n: usize, seed: Seed) -> Result<Toeplitz> {
    singular_symmetric_toeplitz_with(n, seed, |rng| rng.gaussian())
}

/// `S + shift I` for a singular symmetric Toeplitz `S` with uniform entries.
pub fn shifted_singular_toeplitz(n: usize, shift: f64, seed: Seed) -> Result<Toeplitz> {
    let mut col = singular_symmetric_toeplitz_uniform(n, seed)?.first_col();
    col[0] += shift;
    Ok(Toeplitz::symmetric(&col))
}

fn singular_symmetric_toeplitz_uniform(n: usize, seed: Seed) -> Result<Toeplitz> {
    singular_symmetric_toeplitz_with(n, seed, |rng| rng.uniform())
}

fn singular_symmetric_toeplitz_with(n: usize, seed: Seed, mut draw: impl FnMut(&mut Rng) -> f64) -> Result<Toeplitz> {
    if n < 2 {
        return Err(Error::Invalid("need n >= 2".into()));
    }
    let mut rng = Rng::new(seed.stream(42));
    for _ in 0..100 {
        let mut col: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        col[n - 1] = 0.0;
        let t0 = Toeplitz::symmetric(&col);
        let Ok(lu) = linalg::Lu::factor(&t0.to_dense()) else { continue };
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let mut en = vec![0.0; n];
        en[n - 1] = 1.0;
        let c1 = lu.solve(&e1);
        let cn = lu.solve(&en);
        let (p11, pn1, p1n, pnn) = (c1[0], c1[n - 1], cn[0], cn[n - 1]);
        // det(I + x M) with M = [e_n e_1]^T P [e_1 e_n]
        let a2 = pn1 * p1n - pnn * p11;
        let a1 = pn1 + p1n;
        let a0 = 1.0;
        let disc = a1 * a1 - 4.0 * a2 * a0;
        if disc < 0.0 || a2 == 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (a1 + a1.signum() * sq);
        let r1 = q / a2;
        let r2 = if q != 0.0 { a0 / q } else { r1 };
        let root = if r1.abs() < r2.abs() { r1 } else { r2 };
        col[n - 1] = root;
        return Ok(Toeplitz::symmetric(&col));
    }
    Err(Error::Invalid("no real corner root after 100 draws".into()))
}

/// Norm of the numerically singular leading block relative to the
/// `N(0, 1/n)` remainder.
pub const ILL_LEADING_SCALE: f64 = 1e-4;

fn ill_leading_block(n: usize, seed: Seed) -> Matrix {
    let h = n / 2;
    let mut a = gaussian(n, n, seed.stream(51)).scale(1.0 / (n as f64).sqrt());
    if h >= 3 {
        let lead = planted_svd(&class1_profile(h, 1, seed.stream(52)), false, seed.stream(53));
        a.set_block(0, 0, &lead.scale(ILL_LEADING_SCALE));
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cond2, singular_values, svd};

    #[test]
    fn deterministic_streams() {
        let a = gaussian_matrix(4, 5, 0.0, 1.0, Seed(7));
        let b = gaussian_matrix(4, 5, 0.0, 1.0, Seed(7));
        assert_eq!(a, b);
        assert_ne!(a, gaussian_matrix(4, 5, 0.0, 1.0, Seed(8)));
        let t = gaussian_matrix(3, 3, 2.5, 1e-300, Seed(1));
        assert!(t.data().iter().all(|&v| (v - 2.5).abs() < 1e-200));
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(Seed(12345));
        let v = rng.gaussian_vec(10000);
        let mean = v.iter().sum::<f64>() / 1e4;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9999.0;
        assert!(mean.abs() < 0.05, "{mean}");
        assert!((0.9..=1.1).contains(&var), "{var}");
        let u = rng.uniform_vec(10000);
        assert!(u.iter().all(|&x| (-1.0..1.0).contains(&x)));
    }

    #[test]
    fn toeplitz_and_circulant_structure() {
        let t = gaussian_toeplitz(1, 1, 0.0, 1.0, Seed(3)).to_dense();
        assert_eq!(t.shape(), (1, 1));
        let t = gaussian_toeplitz(5, 7, 0.0, 1.0, Seed(3)).to_dense();
        for i in 0..4 {
            for j in 0..6 {
                assert_eq!(t[(i, j)], t[(i + 1, j + 1)]);
            }
        }
        let c = gaussian_circulant(6, 1.0, 0.0, 1.0, Seed(4));
        let v = c.first_col().to_vec();
        let mut shifted = Matrix::zeros(6, 6);
        for j in 0..6 {
            for i in 0..6 {
                shifted[((i + j) % 6, j)] = v[i];
            }
        }
        assert_eq!(c.to_dense(), shifted);
    }

    #[test]
    fn block_sign_layout() {
        let u = block_sign_plus(6, 3);
        let expect = Matrix::identity(3).vcat(&Matrix::identity(3)).scale(1.0 / 2f64.sqrt());
        assert!((&u - &expect).max_abs() < 1e-16);
        let u = block_sign(100, 8, Seed(5));
        assert!((u.norm(linalg::Norm::Two) - 1.0).abs() < 1e-12);
        assert!(u.rows_range(8, 8).max_abs() == 0.0);
        assert!(u.rows_range(96, 4).max_abs() == 0.0);
    }

    #[test]
    fn householder_formula() {
        for seed in 0..20 {
            let (u, v) = sign_pair(8, Seed(seed));
            let h = householder_pm1(8, Seed(seed));
            let uv = linalg::dot(&u, &v);
            assert!(uv.abs() >= 1.0);
            let hu = h.matvec(&u);
            let uu = linalg::dot(&u, &u);
            for i in 0..8 {
                assert!((hu[i] - (u[i] - v[i] * uu / uv)).abs() < 1e-14);
            }
            let r = householder_reflector_pm1(8, Seed(seed));
            assert!((&r.matmul(&r) - &Matrix::identity(8)).max_abs() < 1e-13);
        }
        let q = random_orthogonal(8, Seed(2));
        assert!((&q.tr_matmul(&q) - &Matrix::identity(8)).max_abs() < 1e-12);
    }

    #[test]
    fn classes_condition() {
        let a = test_matrix(&MatrixClassSpec::square(MatrixClass::Class1n { r: 1 }, 100), Seed(1)).unwrap();
        let k = cond2(&a);
        assert!(k > 5e15 && k < 2e16 * 1.0001 + 1e16, "{k:e}");
        let a = test_matrix(&MatrixClassSpec::square(MatrixClass::SvdPlanted(vec![1.0; 6]), 6), Seed(3)).unwrap();
        assert!((&a.tr_matmul(&a) - &Matrix::identity(6)).max_abs() < 1e-14);
        let a = test_matrix(&MatrixClassSpec::square(MatrixClass::Class4n, 32), Seed(4)).unwrap();
        let s = singular_values(&a);
        assert!(s[31] <= 1e-12 * s[0]);
        for class in [
            MatrixClass::Class2n { r: 2 },
            MatrixClass::Class2s { r: 2 },
            MatrixClass::Class3n { r: 2 },
            MatrixClass::Class3s { r: 2 },
            MatrixClass::Class4s,
        ] {
            let a = test_matrix(&MatrixClassSpec::square(class.clone(), 40), Seed(5)).unwrap();
            let s = singular_values(&a);
            assert!((s[0] - 1.0).abs() < 1e-6, "{class:?} {}", s[0]);
            assert!(s[39] < 1e-12, "{class:?} {:e}", s[39]);
        }
    }

    #[test]
    fn class_numerical_rank() {
        let a = test_matrix(&MatrixClassSpec::square(MatrixClass::Class1n { r: 3 }, 30), Seed(8)).unwrap();
        assert_eq!(linalg::numerical_rank(&a, 1e-8), 27);
    }

    #[test]
    fn ill_leading_block_family() {
        let a = test_matrix(&MatrixClassSpec::square(MatrixClass::IllLeadingBlock, 64), Seed(6)).unwrap();
        assert!(cond2(&a) < 1e5);
        assert!(cond2(&a.submatrix(0, 0, 32, 32)) > 1e14);
        let f = svd(&a).unwrap();
        assert!(f.sigma[0] < 10.0);
    }

    #[test]
    fn nonsingular_frequency_grid() {
        // entries on a 1e6-point grid; exact nonsingularity via modular rank
        let mut ok = 0;
        for t in 0..200u64 {
            let mut rng = Rng::new(Seed(1000 + t));
            let m: Vec<i64> = (0..256).map(|_| rng.below(1_000_000) as i64).collect();
            if modular_rank(&m, 16, 1_000_000_007) == 16 || modular_rank(&m, 16, 998_244_353) == 16 {
                ok += 1;
            }
        }
        assert!(ok >= 195, "{ok}");
    }

    fn modular_rank(m: &[i64], n: usize, p: i64) -> usize {
        let mut a: Vec<i64> = m.iter().map(|v| v.rem_euclid(p)).collect();
        let pw = |mut b: i64, mut e: i64| {
            let mut r = 1i64;
            b %= p;
            while e > 0 {
                if e & 1 == 1 {
                    r = (r as i128 * b as i128 % p as i128) as i64;
                }
                b = (b as i128 * b as i128 % p as i128) as i64;
                e >>= 1;
            }
            r
        };
        let mut rank = 0;
        for c in 0..n {
            let Some(piv) = (rank..n).find(|&r| a[r * n + c] != 0) else { continue };
            for j in 0..n {
                a.swap(piv * n + j, rank * n + j);
            }
            let inv = pw(a[rank * n + c], p - 2);
            for r in 0..n {
                if r != rank && a[r * n + c] != 0 {
                    let f = (a[r * n + c] as i128 * inv as i128 % p as i128) as i64;
                    for j in 0..n {
                        a[r * n + j] = (a[r * n + j] - (f as i128 * a[rank * n + j] as i128 % p as i128) as i64).rem_euclid(p);
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
