//! Double-double arithmetic built from error-free transformations, plus inner
//! products and matrix kernels that accumulate in extended precision and round
//! once.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Default, PartialEq)]
pub struct ExtScalar {
    pub hi: f64,
    pub lo: f64,
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.hi)
    }
}

#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl ExtScalar {
    pub const ZERO: ExtScalar = ExtScalar { hi: 0.0, lo: 0.0 };
    pub const ONE: ExtScalar = ExtScalar { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Normalizes an arbitrary pair.
    #[inline]
    pub fn from_pair(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        Self::guard(h, l)
    }

    #[inline]
    fn guard(h: f64, l: f64) -> Self {
        if h.is_finite() {
            Self { hi: h, lo: l }
        } else {
            Self { hi: h, lo: 0.0 }
        }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::from_f64(self.hi.sqrt());
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let r = ((self.hi - p) - e + self.lo) / (2.0 * x);
        Self::from_pair(x, r)
    }

    pub fn recip(self) -> Self {
        ExtScalar::ONE / self
    }
}

impl From<f64> for ExtScalar {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for ExtScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

pub fn xadd(a: ExtScalar, b: ExtScalar) -> ExtScalar {
    let (s1, s2) = two_sum(a.hi, b.hi);
    if !s1.is_finite() {
        return ExtScalar::from_f64(s1);
    }
    let (t1, t2) = two_sum(a.lo, b.lo);
    let (s1, s2) = quick_two_sum(s1, s2 + t1);
    let (h, l) = quick_two_sum(s1, s2 + t2);
    ExtScalar::guard(h, l)
}

pub fn xsub(a: ExtScalar, b: ExtScalar) -> ExtScalar {
    xadd(a, -b)
}

pub fn xmul(a: ExtScalar, b: ExtScalar) -> ExtScalar {
    let (p1, p2) = two_prod(a.hi, b.hi);
    if !p1.is_finite() {
        return ExtScalar::from_f64(p1);
    }
    let p2 = p2 + (a.hi * b.lo + a.lo * b.hi);
    let (h, l) = quick_two_sum(p1, p2);
    ExtScalar::guard(h, l)
}

pub fn xdiv(a: ExtScalar, b: ExtScalar) -> ExtScalar {
    let q1 = a.hi / b.hi;
    if !q1.is_finite() {
        return ExtScalar::from_f64(q1);
    }
    let r = a - b * q1;
    let q2 = r.hi / b.hi;
    let r = r - b * q2;
    let q3 = r.hi / b.hi;
    let (h, l) = quick_two_sum(q1, q2);
    ExtScalar::from_pair(h, l) + q3
}

fn mul_f(a: ExtScalar, b: f64) -> ExtScalar {
    let (p1, p2) = two_prod(a.hi, b);
    if !p1.is_finite() {
        return ExtScalar::from_f64(p1);
    }
    let (h, l) = quick_two_sum(p1, p2 + a.lo * b);
    ExtScalar::guard(h, l)
}

fn add_f(a: ExtScalar, b: f64) -> ExtScalar {
    let (s1, s2) = two_sum(a.hi, b);
    if !s1.is_finite() {
        return ExtScalar::from_f64(s1);
    }
    let (h, l) = quick_two_sum(s1, s2 + a.lo);
    ExtScalar::guard(h, l)
}

impl Neg for ExtScalar {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

macro_rules! ext_ops {
    ($tr:ident, $m:ident, $asg:ident, $am:ident, $f:expr, $ff:expr) => {
        impl $tr for ExtScalar {
            type Output = ExtScalar;
            #[inline]
            fn $m(self, rhs: ExtScalar) -> ExtScalar {
                $f(self, rhs)
            }
        }
        impl $tr<f64> for ExtScalar {
            type Output = ExtScalar;
            #[inline]
            fn $m(self, rhs: f64) -> ExtScalar {
                $ff(self, rhs)
            }
        }
        impl $asg for ExtScalar {
            #[inline]
            fn $am(&mut self, rhs: ExtScalar) {
                *self = $f(*self, rhs);
            }
        }
        impl $asg<f64> for ExtScalar {
            #[inline]
            fn $am(&mut self, rhs: f64) {
                *self = $ff(*self, rhs);
            }
        }
    };
}

ext_ops!(Add, add, AddAssign, add_assign, xadd, add_f);
ext_ops!(Sub, sub, SubAssign, sub_assign, xsub, |a, b: f64| add_f(a, -b));
ext_ops!(Mul, mul, MulAssign, mul_assign, xmul, mul_f);

impl Div for ExtScalar {
    type Output = ExtScalar;
    fn div(self, rhs: ExtScalar) -> ExtScalar {
        xdiv(self, rhs)
    }
}

impl Div<f64> for ExtScalar {
    type Output = ExtScalar;
    fn div(self, rhs: f64) -> ExtScalar {
        xdiv(self, ExtScalar::from_f64(rhs))
    }
}

impl std::iter::Sum for ExtScalar {
    fn sum<I: Iterator<Item = ExtScalar>>(iter: I) -> Self {
        iter.fold(ExtScalar::ZERO, xadd)
    }
}

/// Compensated accumulator for sums of exact products.
#[derive(Clone, Copy, Default)]
struct Acc {
    p: f64,
    s: f64,
}

impl Acc {
    #[inline]
    fn prod(&mut self, a: f64, b: f64) {
        let (h, r) = two_prod(a, b);
        let (p, q) = two_sum(self.p, h);
        self.p = p;
        self.s += q + r;
    }
    #[inline]
    fn value(&mut self, v: f64) {
        let (p, q) = two_sum(self.p, v);
        self.p = p;
        self.s += q;
    }
    #[inline]
    fn small(&mut self, v: f64) {
        self.s += v;
    }
    #[inline]
    fn ext(self) -> ExtScalar {
        let (h, l) = quick_two_sum(self.p, self.s);
        if h.is_finite() {
            ExtScalar::from_pair(h, l)
        } else {
            ExtScalar::from_f64(self.p + self.s)
        }
    }
}

/// Inner product of standard-precision vectors in extended precision.
pub fn xdot(x: &[f64], y: &[f64]) -> ExtScalar {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Acc::default();
    for (&a, &b) in x.iter().zip(y) {
        acc.prod(a, b);
    }
    acc.ext()
}

/// Inner product of a standard vector with an extended one.
pub fn xdot_mixed(x: &[f64], y: &[ExtScalar]) -> ExtScalar {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Acc::default();
    for (&a, b) in x.iter().zip(y) {
        acc.prod(a, b.hi);
        acc.small(a * b.lo);
    }
    acc.ext()
}

pub fn xdot_ext(x: &[ExtScalar], y: &[ExtScalar]) -> ExtScalar {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Acc::default();
    for (a, b) in x.iter().zip(y) {
        acc.prod(a.hi, b.hi);
        acc.small(a.hi * b.lo + a.lo * b.hi);
    }
    acc.ext()
}

/// `A * B` with every entry an extended inner product rounded once.
pub fn xmatmul(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.cols(), b.rows());
    let bt = b.transpose();
    Matrix::from_fn(a.rows(), b.cols(), |i, j| xdot(a.row(i), bt.row(j)).to_f64())
}

/// `b - A x` with each entry accumulated in extended precision, rounded once.
pub fn xresidual(a: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.cols(), x.len());
    assert_eq!(a.rows(), b.len());
    (0..a.rows())
        .map(|i| {
            let mut acc = Acc::default();
            acc.value(b[i]);
            for (&aij, &xj) in a.row(i).iter().zip(x) {
                acc.prod(-aij, xj);
            }
            acc.ext().to_f64()
        })
        .collect()
}

/// `b - A x` kept in extended precision.
pub fn xresidual_ext(a: &Matrix, x: &[ExtScalar], b: &[ExtScalar]) -> Vec<ExtScalar> {
    assert_eq!(a.cols(), x.len());
    (0..a.rows())
        .map(|i| {
            let mut acc = Acc::default();
            acc.value(b[i].hi);
            acc.small(b[i].lo);
            for (&aij, xj) in a.row(i).iter().zip(x) {
                acc.prod(-aij, xj.hi);
                acc.small(-aij * xj.lo);
            }
            acc.ext()
        })
        .collect()
}

pub fn xmatvec(a: &Matrix, x: &[ExtScalar]) -> Vec<ExtScalar> {
    (0..a.rows()).map(|i| xdot_mixed(a.row(i), x)).collect()
}

/// `A^T x` with extended accumulation.
pub fn xtr_matvec(a: &Matrix, x: &[ExtScalar]) -> Vec<ExtScalar> {
    let at = a.transpose();
    xmatvec(&at, x)
}

pub fn ext_vec(x: &[f64]) -> Vec<ExtScalar> {
    x.iter().map(|&v| ExtScalar::from_f64(v)).collect()
}

pub fn round_vec(x: &[ExtScalar]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64()).collect()
}

pub fn ext_add(x: &[ExtScalar], y: &[ExtScalar]) -> Vec<ExtScalar> {
    x.iter().zip(y).map(|(&a, &b)| a + b).collect()
}

pub fn ext_sub(x: &[ExtScalar], y: &[ExtScalar]) -> Vec<ExtScalar> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

/// Euclidean norm of the rounded entries.
pub fn ext_norm(x: &[ExtScalar]) -> f64 {
    crate::linalg::vec_norm(&round_vec(x))
}

/// Dense matrix of extended scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExtScalar>,
}

impl ExtMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ExtScalar::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ExtScalar::ONE;
        }
        m
    }

    pub fn from_matrix(a: &Matrix) -> Self {
        Self { rows: a.rows(), cols: a.cols(), data: ext_vec(a.data()) }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ExtScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_cols(rows: usize, cols: &[Vec<ExtScalar>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.data[i * m.cols + j] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtScalar {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: ExtScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[ExtScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<ExtScalar> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn round(&self) -> Matrix {
        Matrix::from_vec(self.rows, self.cols, round_vec(&self.data))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn add(&self, o: &ExtMatrix) -> ExtMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self { rows: self.rows, cols: self.cols, data: ext_add(&self.data, &o.data) }
    }

    pub fn sub(&self, o: &ExtMatrix) -> ExtMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self { rows: self.rows, cols: self.cols, data: ext_sub(&self.data, &o.data) }
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> ExtMatrix {
        Self::from_fn(nr, nc, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn matmul(&self, o: &ExtMatrix) -> ExtMatrix {
        assert_eq!(self.cols, o.rows);
        let ot = o.transpose();
        Self::from_fn(self.rows, o.cols, |i, j| xdot_ext(self.row(i), ot.row(j)))
    }

    pub fn matvec(&self, x: &[ExtScalar]) -> Vec<ExtScalar> {
        (0..self.rows).map(|i| xdot_ext(self.row(i), x)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.hi.abs()))
    }
}

/// `A * X` for standard `A` and extended `X`.
pub fn xmatmul_mixed(a: &Matrix, x: &ExtMatrix) -> ExtMatrix {
    assert_eq!(a.cols(), x.rows());
    let xt = x.transpose();
    ExtMatrix::from_fn(a.rows(), x.cols(), |i, j| xdot_mixed(a.row(i), xt.row(j)))
}

/// `X * A` for extended `X` and standard `A`.
pub fn xmatmul_ext_std(x: &ExtMatrix, a: &Matrix) -> ExtMatrix {
    assert_eq!(x.cols(), a.rows());
    let at = a.transpose();
    ExtMatrix::from_fn(x.rows(), a.cols(), |i, j| xdot_mixed(at.row(j), x.row(i)))
}

/// LU with partial pivoting carried out entirely in extended precision; meant
/// for the small blocks (`r x r`, Schur complements) that need it.
#[derive(Clone, Debug)]
pub struct ExtLu {
    lu: ExtMatrix,
    perm: Vec<usize>,
}

impl ExtLu {
    pub fn factor(a: &ExtMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Shape(format!("extended lu needs square input, got {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu.get(i, k).hi.abs().total_cmp(&lu.get(j, k).hi.abs())).unwrap();
            let piv = lu.get(p, k);
            if piv.hi == 0.0 || piv.hi.abs() <= scale * 1e-300 {
                return Err(Error::ZeroPivot { step: k, value: piv.hi });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
            }
            let inv = piv.recip();
            for i in k + 1..n {
                let l = lu.get(i, k) * inv;
                lu.set(i, k, l);
                if l.hi == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let v = lu.get(i, j) - l * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    /// `min |u_kk| / max |u_kk|`, a cheap singularity indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let d: Vec<f64> = (0..self.dim()).map(|k| self.lu.get(k, k).hi.abs()).collect();
        let hi = d.iter().cloned().fold(0.0, f64::max);
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if d.is_empty() { 1.0 } else { lo / hi }
    }

    pub fn solve(&self, b: &[ExtScalar]) -> Vec<ExtScalar> {
        let n = self.dim();
        let mut x: Vec<ExtScalar> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s = xdot_ext(&self.lu.row(i)[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s = xdot_ext(&self.lu.row(i)[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / self.lu.get(i, i);
        }
        x
    }

    pub fn solve_matrix(&self, b: &ExtMatrix) -> ExtMatrix {
        let cols: Vec<Vec<ExtScalar>> = (0..b.cols()).map(|j| self.solve(&b.col(j))).collect();
        ExtMatrix::from_cols(self.dim(), &cols)
    }

    pub fn inverse(&self) -> ExtMatrix {
        self.solve_matrix(&ExtMatrix::identity(self.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(x: f64) -> ExtScalar {
        ExtScalar::from_f64(x)
    }

    #[test]
    fn cancellation_and_products() {
        assert_eq!(((e(1e16) + e(1.0)) - e(1e16)).to_f64(), 1.0);
        assert_eq!(xmul(e(3.0), e(7.0)).to_f64(), 21.0);
        let x = [1e8, 1.0, -1e8];
        let y = [1e8, 1.0, 1e8];
        assert_eq!(xdot(&x, &y).to_f64(), 1.0);
        assert_eq!(crate::linalg::dot(&x, &y), 0.0);
    }

    #[test]
    fn tenth_to_double_double() {
        let tenth = e(1.0) / e(10.0);
        let back = tenth * 10.0 - e(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        let r = e(2.0).sqrt();
        assert!((r * r - e(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn overflow_propagates() {
        let big = e(f64::MAX);
        assert!((big + big).hi.is_infinite());
        assert!((big * e(2.0)).hi.is_infinite());
    }

    #[test]
    fn residual_of_identity() {
        let b = vec![0.1, -3.0, 7.25];
        let r = xresidual(&Matrix::identity(3), &b, &b);
        assert!(r.iter().all(|&v| v == 0.0));
    }

    // Values of f64 matrices are dyadic rationals, so the exact product can
    // be accumulated in i128 at a common binary exponent.
    fn exact_dot(x: &[f64], y: &[f64]) -> f64 {
        let parts: Vec<(i128, i32)> = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| {
                let (ma, ea) = decompose(a);
                let (mb, eb) = decompose(b);
                (ma as i128 * mb as i128, ea + eb)
            })
            .collect();
        let emin = parts.iter().filter(|p| p.0 != 0).map(|p| p.1).min().unwrap_or(0);
        let total: i128 = parts.iter().map(|&(m, ex)| if m == 0 { 0 } else { m << (ex - emin) }).sum();
        total as f64 * 2f64.powi(emin)
    }

    fn decompose(v: f64) -> (i64, i32) {
        if v == 0.0 {
            return (0, 0);
        }
        let bits = v.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
        let sign = if v < 0.0 { -1 } else { 1 };
        let mut m = frac as i64 * sign;
        let mut ex = exp - 1075;
        while m != 0 && m % 2 == 0 {
            m /= 2;
            ex += 1;
        }
        (m, ex)
    }

    #[test]
    fn hilbert_times_integer_inverse() {
        let h = Matrix::from_fn(4, 4, |i, j| 1.0 / (i + j + 1) as f64);
        let inv = Matrix::from_rows(&[
            &[16.0, -120.0, 240.0, -140.0],
            &[-120.0, 1200.0, -2700.0, 1680.0],
            &[240.0, -2700.0, 6480.0, -4200.0],
            &[-140.0, 1680.0, -4200.0, 2800.0],
        ]);
        let p = xmatmul(&h, &inv);
        let invt = inv.transpose();
        for i in 0..4 {
            for j in 0..4 {
                let exact = exact_dot(h.row(i), invt.row(j));
                assert!((p[(i, j)] - exact).abs() <= exact.abs().max(1e-300) * f64::EPSILON);
                let target = if i == j { 1.0 } else { 0.0 };
                // the rounding of 1/(i+j+1) itself limits closeness to I
                assert!((p[(i, j)] - target).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn planted_integer_system_residual_is_zero() {
        let mut s = 17u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 40) as i64 % 2001 - 1000) as f64
        };
        let a = Matrix::from_fn(8, 8, |_, _| next());
        let x: Vec<f64> = (0..8).map(|_| next()).collect();
        let b = a.matvec(&x);
        assert!(xresidual(&a, &x, &b).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ext_lu_solves_to_double_double() {
        let a = Matrix::from_fn(5, 5, |i, j| 1.0 / (i + j + 1) as f64);
        let lu = ExtLu::factor(&ExtMatrix::from_matrix(&a)).unwrap();
        let x_true: Vec<ExtScalar> = (0..5).map(|i| e(i as f64 + 1.0)).collect();
        let b = xmatvec(&a, &x_true);
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((*u - *v).to_f64().abs() < 1e-20);
        }
    }

    use proptest::prelude::*;

    fn scalar() -> impl Strategy<Value = ExtScalar> {
        (-1e6f64..1e6, -1.0f64..1.0).prop_map(|(h, l)| ExtScalar::from_pair(h, l * h.abs() * 1e-17))
    }

    proptest! {
        #[test]
        fn add_commutes(a in scalar(), b in scalar()) {
            prop_assert_eq!(xadd(a, b), xadd(b, a));
        }

        #[test]
        fn mul_identity(a in scalar()) {
            prop_assert_eq!(xmul(a, ExtScalar::ONE), a);
        }

        #[test]
        fn associativity_near_ulp(a in scalar(), b in scalar(), c in scalar()) {
            let l = (a + b) + c;
            let r = a + (b + c);
            let scale = a.hi.abs() + b.hi.abs() + c.hi.abs();
            prop_assert!((l - r).to_f64().abs() <= scale * 2f64.powi(-100));
            let l = (a * b) * c;
            let r = a * (b * c);
            prop_assert!((l - r).to_f64().abs() <= l.to_f64().abs() * 2f64.powi(-100) + 1e-300);
        }

        #[test]
        fn integer_residual_exact(seed in 0u64..1000, n in 1usize..64) {
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 30) as i64 % (1 << 20)) as f64 - (1 << 19) as f64
            };
            let a = Matrix::from_fn(n, n, |_, _| next());
            let x: Vec<f64> = (0..n).map(|_| next()).collect();
            let b: Vec<f64> = (0..n).map(|_| next()).collect();
            let r = xresidual(&a, &x, &b);
            for i in 0..n {
                let exact: i128 = b[i] as i128 - (0..n).map(|j| a[(i, j)] as i128 * x[j] as i128).sum::<i128>();
                prop_assert_eq!(r[i], exact as f64);
            }
        }
    }
}
