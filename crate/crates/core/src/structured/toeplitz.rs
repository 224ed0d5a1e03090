//! Toeplitz, f-circulant and Hankel matrices with FFT-based products.

use super::exactconv::{xconvolve, XConvKernel};
use super::fft::{convolve, next_pow2, plan, ConvKernel};
use crate::linalg::Matrix;
use crate::xprec::{ext_vec, ExtScalar};
use num_complex::Complex64;

/// `m x n` Toeplitz matrix stored by its diagonals: `t_ij = diag[i - j + n - 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Toeplitz {
    rows: usize,
    cols: usize,
    diag: Vec<f64>,
}

impl Toeplitz {
    pub fn from_diagonals(rows: usize, cols: usize, diag: Vec<f64>) -> Self {
        assert_eq!(diag.len(), rows + cols - 1, "Toeplitz needs m + n - 1 diagonals");
        Self { rows, cols, diag }
    }

    /// From the first column and first row; `col[0]` is used for the corner.
    pub fn from_col_row(col: &[f64], row: &[f64]) -> Self {
        let mut diag: Vec<f64> = row.iter().rev().copied().collect();
        let last = diag.len() - 1;
        diag[last] = col[0];
        diag.extend_from_slice(&col[1..]);
        Self::from_diagonals(col.len(), row.len(), diag)
    }

    pub fn symmetric(col: &[f64]) -> Self {
        Self::from_col_row(col, col)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn diagonals(&self) -> &[f64] {
        &self.diag
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.diag[i + self.cols - 1 - j]
    }

    pub fn first_col(&self) -> Vec<f64> {
        self.diag[self.cols - 1..].to_vec()
    }

    pub fn first_row(&self) -> Vec<f64> {
        self.diag[..self.cols].iter().rev().copied().collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.first_col() == self.first_row()
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn transpose(&self) -> Self {
        Self { rows: self.cols, cols: self.rows, diag: self.diag.iter().rev().copied().collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, diag: self.diag.iter().map(|x| x * s).collect() }
    }

    /// Leading `k x l` block, again Toeplitz.
    pub fn leading(&self, k: usize, l: usize) -> Self {
        let start = self.cols - l;
        Self::from_diagonals(k, l, self.diag[start..start + k + l - 1].to_vec())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let c = convolve(&self.diag, x);
        c[self.cols - 1..self.cols - 1 + self.rows].to_vec()
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        self.transpose().matvec(x)
    }

    /// Product computed to double-double accuracy.
    pub fn matvec_ext(&self, x: &[ExtScalar]) -> Vec<ExtScalar> {
        assert_eq!(x.len(), self.cols);
        let c = xconvolve(&ext_vec(&self.diag), x);
        c[self.cols - 1..self.cols - 1 + self.rows].to_vec()
    }

    /// Cached-spectrum operator for repeated products.
    pub fn operator(&self) -> ToeplitzOp {
        ToeplitzOp {
            rows: self.rows,
            cols: self.cols,
            kernel: ConvKernel::new(&self.diag, self.cols),
            ext: None,
            diag: self.diag.clone(),
        }
    }

    /// Rough spectral norm from a few power steps.
    pub fn norm_estimate(&self) -> f64 {
        let n = self.cols;
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.618).fract()).collect();
        let mut est = 0.0;
        for _ in 0..8 {
            let nx = crate::linalg::vec_norm(&x);
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let y = self.matvec(&x);
            est = crate::linalg::vec_norm(&y);
            x = self.tr_matvec(&y);
        }
        est
    }
}

/// Toeplitz operator with precomputed FFT data.
pub struct ToeplitzOp {
    rows: usize,
    cols: usize,
    kernel: ConvKernel,
    ext: Option<XConvKernel>,
    diag: Vec<f64>,
}

impl ToeplitzOp {
    /// Also prepare the double-double kernel.
    pub fn with_ext(mut self) -> Self {
        self.ext = Some(XConvKernel::new(&ext_vec(&self.diag), self.cols));
        self
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let c = self.kernel.apply(x);
        c[self.cols - 1..self.cols - 1 + self.rows].to_vec()
    }

    pub fn apply_ext(&self, x: &[ExtScalar]) -> Vec<ExtScalar> {
        let c = match &self.ext {
            Some(k) => k.apply(x),
            None => xconvolve(&ext_vec(&self.diag), x),
        };
        c[self.cols - 1..self.cols - 1 + self.rows].to_vec()
    }
}

/// The f-circulant `Z_f(v) = sum_i v_i Z_f^i`; `f = 1` is the ordinary circulant.
#[derive(Clone, Debug, PartialEq)]
pub struct Circulant {
    f: f64,
    col: Vec<f64>,
}

impl Circulant {
    pub fn new(f: f64, col: Vec<f64>) -> Self {
        assert!(!col.is_empty());
        Self { f, col }
    }

    pub fn dim(&self) -> usize {
        self.col.len()
    }

    pub fn factor(&self) -> f64 {
        self.f
    }

    pub fn first_col(&self) -> &[f64] {
        &self.col
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.col[i - j]
        } else {
            self.f * self.col[self.dim() + i - j]
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn as_toeplitz(&self) -> Toeplitz {
        let n = self.dim();
        let row: Vec<f64> = (0..n).map(|j| self.get(0, j)).collect();
        Toeplitz::from_col_row(&self.col, &row)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        f_circulant_matvec(self.f, &self.col, x)
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().rev().copied().collect();
        y = self.matvec(&y);
        y.reverse();
        y
    }

    /// Singular values, non-increasing. The ordinary circulant is diagonalized
    /// by the DFT (radix-2 for power-of-two sizes, direct sum otherwise);
    /// dense SVD for `f != 1`.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.dim();
        if self.f != 1.0 {
            return crate::linalg::singular_values(&self.to_dense());
        }
        let mut s: Vec<f64> = if n == next_pow2(n) {
            plan(n).forward_real(&self.col).iter().map(|z| z.norm()).collect()
        } else {
            (0..n)
                .map(|k| {
                    self.col
                        .iter()
                        .enumerate()
                        .map(|(j, &x)| Complex64::from_polar(x, -2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64))
                        .sum::<Complex64>()
                        .norm()
                })
                .collect()
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// `sigma_max / sigma_min`, infinite when singular.
    pub fn cond2(&self) -> f64 {
        let s = self.singular_values();
        match (s.first(), s.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            _ => f64::INFINITY,
        }
    }
}

/// `Z_f(v) x` through the linear convolution `c = v * x`: `y_i = c_i + f c_{i+n}`.
pub fn f_circulant_matvec(f: f64, v: &[f64], x: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert_eq!(x.len(), n);
    let c = convolve(v, x);
    (0..n).map(|i| c[i] + if i + n < c.len() { f * c[i + n] } else { 0.0 }).collect()
}

/// Lower triangular Toeplitz product `Z(v) x` (the case `f = 0`).
pub fn lower_toeplitz_matvec(v: &[f64], x: &[f64]) -> Vec<f64> {
    convolve(v, x)[..v.len()].to_vec()
}

/// `Z(v)^T x = J Z(v) J x`.
pub fn upper_toeplitz_matvec(v: &[f64], x: &[f64]) -> Vec<f64> {
    let xr: Vec<f64> = x.iter().rev().copied().collect();
    let mut y = lower_toeplitz_matvec(v, &xr);
    y.reverse();
    y
}

/// `m x n` Hankel matrix `h_ij = anti[i + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Hankel {
    rows: usize,
    cols: usize,
    anti: Vec<f64>,
}

impl Hankel {
    pub fn new(rows: usize, cols: usize, anti: Vec<f64>) -> Self {
        assert_eq!(anti.len(), rows + cols - 1);
        Self { rows, cols, anti }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.anti[i + j]
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    /// The Toeplitz matrix `H J` (columns reversed).
    pub fn times_reversal(&self) -> Toeplitz {
        Toeplitz::from_diagonals(self.rows, self.cols, self.anti.clone())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let xr: Vec<f64> = x.iter().rev().copied().collect();
        self.times_reversal().matvec(&xr)
    }
}

/// Circulant product `Z_1(c) x`.
pub fn circulant_matvec(c: &[f64], x: &[f64]) -> Vec<f64> {
    f_circulant_matvec(1.0, c, x)
}

pub fn toeplitz_matvec(t: &Toeplitz, x: &[f64]) -> Vec<f64> {
    t.matvec(x)
}

/// Side on which the reversal `J` multiplies a Toeplitz matrix to give a Hankel one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `H = T J`
    Right,
    /// `H = J T`
    Left,
}

/// Toeplitz partner of a Hankel matrix: `H = T J` for `Side::Right`,
/// `H = J T` for `Side::Left`.
pub fn hankel_bridge(h: &Hankel, side: Side) -> Toeplitz {
    match side {
        Side::Right => h.times_reversal(),
        Side::Left => Toeplitz::from_diagonals(h.rows, h.cols, h.anti.iter().rev().copied().collect()),
    }
}

/// Hankel matrix `T J` or `J T`.
pub fn hankel_from_toeplitz(t: &Toeplitz, side: Side) -> Hankel {
    match side {
        Side::Right => Hankel::new(t.rows, t.cols, t.diag.clone()),
        Side::Left => Hankel::new(t.rows, t.cols, t.diag.iter().rev().copied().collect()),
    }
}

/// Structured matrix kinds accepted by the solvers.
#[derive(Clone, Debug)]
pub enum StructuredMatrix {
    Dense(Matrix),
    Toeplitz(Toeplitz),
    Circulant(Circulant),
    Hankel(Hankel),
}

impl StructuredMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::Dense(m) => m.shape(),
            Self::Toeplitz(t) => (t.rows, t.cols),
            Self::Circulant(c) => (c.dim(), c.dim()),
            Self::Hankel(h) => (h.rows, h.cols),
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(m) => m.matvec(x),
            Self::Toeplitz(t) => t.matvec(x),
            Self::Circulant(c) => c.matvec(x),
            Self::Hankel(h) => h.matvec(x),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Self::Dense(m) => m.clone(),
            Self::Toeplitz(t) => t.to_dense(),
            Self::Circulant(c) => c.to_dense(),
            Self::Hankel(h) => h.to_dense(),
        }
    }
}
