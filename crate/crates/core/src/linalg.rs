//! Dense real matrices and the kernels everything else is built on: one-sided
//! Jacobi SVD, Householder QR, norms, numerical rank and a pivoted LU used as a
//! reference solver.

use crate::error::{Error, Result};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Default cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Threshold factor for detecting rank deficiency in [`qr`].
pub const QR_RANK_TOL: f64 = 1e-13;

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = self.row(i).iter().take(8).map(|v| format!("{v:+.4e}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Panics when `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match {rows}x{cols}");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(m * n);
        for r in rows {
            assert_eq!(r.len(), n, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: m, cols: n, data }
    }

    /// Single column matrix.
    pub fn column(v: &[f64]) -> Self {
        Self::from_vec(v.len(), 1, v.to_vec())
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::diag_rect(d.len(), d.len(), d)
    }

    /// `rows x cols` matrix with `d` on the main diagonal.
    pub fn diag_rect(rows: usize, cols: usize, d: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in d.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_cols(rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_col(j, c);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.data[i * self.cols + j] = x;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols);
        let n = other.cols;
        let mut out = Matrix::zeros(self.rows, n);
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let n = other.cols;
        let mut out = Matrix::zeros(self.cols, n);
        for k in 0..self.rows {
            let brow = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `self^T * x`.
    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s * I`.
    pub fn shift_diag(&self, s: f64) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += s;
        }
        m
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Matrix {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Matrix::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn cols_range(&self, c0: usize, nc: usize) -> Matrix {
        self.submatrix(0, c0, self.rows, nc)
    }

    pub fn rows_range(&self, r0: usize, nr: usize) -> Matrix {
        self.submatrix(r0, 0, nr, self.cols)
    }

    /// `(self | other)`.
    pub fn hcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        m.set_block(0, 0, self);
        m.set_block(0, self.cols, other);
        m
    }

    /// `(self ; other)`.
    pub fn vcat(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        norm(self, kind)
    }

    pub fn fro(&self) -> f64 {
        norm(self, Norm::Frobenius)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape());
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape());
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn vec_norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

pub fn vec_sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vec_add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    One,
    Two,
    Inf,
    Frobenius,
}

pub fn norm(a: &Matrix, kind: Norm) -> f64 {
    match kind {
        Norm::One => (0..a.cols).map(|j| (0..a.rows).map(|i| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max),
        Norm::Inf => (0..a.rows).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max),
        Norm::Frobenius => vec_norm(&a.data),
        Norm::Two => singular_values(a).first().copied().unwrap_or(0.0),
    }
}

/// Full SVD `A = S diag(sigma) T^T`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// `m x m` orthogonal.
    pub s: Matrix,
    /// `min(m, n)` values, non-increasing.
    pub sigma: Vec<f64>,
    /// `n x n` orthogonal.
    pub t: Matrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Matrix {
        let (m, n) = (self.s.rows, self.t.cols);
        let mut ss = Matrix::zeros(m, n);
        for i in 0..m {
            for (j, &sg) in self.sigma.iter().enumerate() {
                ss[(i, j)] = self.s[(i, j)] * sg;
            }
        }
        ss.matmul(&self.t.transpose())
    }

    /// Leading `k` left singular vectors.
    pub fn left(&self, k: usize) -> Matrix {
        self.s.cols_range(0, k)
    }

    /// Leading `k` right singular vectors.
    pub fn right(&self, k: usize) -> Matrix {
        self.t.cols_range(0, k)
    }

    /// Trailing right singular vectors from index `k` on.
    pub fn right_tail(&self, k: usize) -> Matrix {
        self.t.cols_range(k, self.t.cols - k)
    }

    pub fn left_tail(&self, k: usize) -> Matrix {
        self.s.cols_range(k, self.s.cols - k)
    }
}

pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    svd_with_cap(a, JACOBI_MAX_SWEEPS)
}

/// One-sided Jacobi SVD with an explicit sweep cap.
pub fn svd_with_cap(a: &Matrix, max_sweeps: usize) -> Result<SvdFactors> {
    jacobi_svd(a, max_sweeps, true)
}

/// Economy SVD: `s` is `m x k`, `t` is `n x k` with `k = min(m, n)`.
pub fn svd_thin(a: &Matrix) -> Result<SvdFactors> {
    jacobi_svd(a, JACOBI_MAX_SWEEPS, false)
}

fn jacobi_svd(a: &Matrix, max_sweeps: usize, full: bool) -> Result<SvdFactors> {
    if a.rows < a.cols {
        let f = jacobi_svd(&a.transpose(), max_sweeps, full)?;
        return Ok(SvdFactors { s: f.t, sigma: f.sigma, t: f.s });
    }
    let (m, n) = a.shape();
    if n == 0 {
        let s = if full { Matrix::identity(m) } else { Matrix::zeros(m, 0) };
        return Ok(SvdFactors { s, sigma: vec![], t: Matrix::identity(0) });
    }
    // column-major work copies
    let mut w = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            w[j * m + i] = a[(i, j)];
        }
    }
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }
    let tol = f64::EPSILON * m as f64;
    let floor = (f64::EPSILON * w.iter().map(|x| x * x).sum::<f64>().sqrt()).powi(2);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (lo, hi) = w.split_at_mut(q * m);
                let cp = &mut lo[p * m..(p + 1) * m];
                let cq = &mut hi[..m];
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for (x, y) in cp.iter().zip(cq.iter()) {
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0
                    || alpha.min(beta) <= floor
                    || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + 1f64.hypot(zeta));
                let c = 1.0 / 1f64.hypot(t);
                let s = c * t;
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                let (vlo, vhi) = v.split_at_mut(q * n);
                let vp = &mut vlo[p * n..(p + 1) * n];
                let vq = &mut vhi[..n];
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(max_sweeps));
    }
    let norms: Vec<f64> = (0..n).map(|j| vec_norm(&w[j * m..(j + 1) * m])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let smax = sigma[0];

    let mut ucols: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut valid = Vec::with_capacity(m);
    for (k, &j) in order.iter().enumerate() {
        let col = &w[j * m..(j + 1) * m];
        if sigma[k] > smax * 1e-300 && sigma[k] > 0.0 {
            ucols.push(col.iter().map(|x| x / sigma[k]).collect());
            valid.push(true);
        } else {
            ucols.push(vec![0.0; m]);
            valid.push(false);
        }
    }
    if full {
        for _ in n..m {
            ucols.push(vec![0.0; m]);
            valid.push(false);
        }
    }
    reorthonormalize(&mut ucols, &mut valid);
    fill_orthonormal(&mut ucols, &mut valid);

    let s = Matrix::from_cols(m, &ucols);
    let mut t = Matrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        for i in 0..n {
            t[(i, k)] = v[j * n + i];
        }
    }
    Ok(SvdFactors { s, sigma, t })
}

/// Two passes of modified Gram-Schmidt over the valid columns in order; any
/// column that loses most of its norm is marked invalid for refilling.
fn reorthonormalize(cols: &mut [Vec<f64>], valid: &mut [bool]) {
    for k in 0..cols.len() {
        if !valid[k] {
            continue;
        }
        let before = vec_norm(&cols[k]);
        for _ in 0..2 {
            for j in 0..k {
                if !valid[j] {
                    continue;
                }
                let d = dot(&cols[j], &cols[k]);
                let (head, tail) = cols.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= d * y;
                }
            }
        }
        let after = vec_norm(&cols[k]);
        if after < 0.5 * before || after == 0.0 {
            valid[k] = false;
        } else {
            cols[k].iter_mut().for_each(|x| *x /= after);
        }
    }
}

/// Replace invalid columns by unit vectors orthogonal to every valid one.
fn fill_orthonormal(cols: &mut [Vec<f64>], valid: &mut [bool]) {
    let m = cols.first().map_or(0, |c| c.len());
    let mut resid: Vec<f64> = vec![1.0; m];
    for (c, _) in cols.iter().zip(valid.iter()).filter(|(_, &ok)| ok) {
        for (r, x) in resid.iter_mut().zip(c) {
            *r -= x * x;
        }
    }
    for k in 0..cols.len() {
        if valid[k] {
            continue;
        }
        let mut done = false;
        let mut tried = vec![false; m];
        while !done {
            let idx = (0..m).filter(|&i| !tried[i]).max_by(|&a, &b| resid[a].total_cmp(&resid[b]));
            let Some(idx) = idx else { break };
            tried[idx] = true;
            let mut e = vec![0.0; m];
            e[idx] = 1.0;
            for _ in 0..2 {
                for j in 0..cols.len() {
                    if !valid[j] {
                        continue;
                    }
                    let d = dot(&cols[j], &e);
                    for (x, y) in e.iter_mut().zip(&cols[j]) {
                        *x -= d * y;
                    }
                }
            }
            let nr = vec_norm(&e);
            if nr > 1e-3 {
                e.iter_mut().for_each(|x| *x /= nr);
                for (r, x) in resid.iter_mut().zip(&e) {
                    *r -= x * x;
                }
                cols[k] = e;
                valid[k] = true;
                done = true;
            }
        }
    }
}

/// Orthonormal basis of the orthogonal complement of the range of `q`, whose
/// columns are assumed orthonormal.
pub fn orthonormal_complement(q: &Matrix) -> Matrix {
    let (m, k) = q.shape();
    let mut cols: Vec<Vec<f64>> = (0..k).map(|j| q.col(j)).collect();
    let mut valid = vec![true; k];
    cols.extend((k..m).map(|_| vec![0.0; m]));
    valid.extend((k..m).map(|_| false));
    fill_orthonormal(&mut cols, &mut valid);
    Matrix::from_cols(m, &cols[k..])
}

/// Singular values only, via Householder bidiagonalization followed by
/// Sturm-sequence bisection on the Golub-Kahan tridiagonal.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    if a.rows < a.cols {
        return singular_values(&a.transpose());
    }
    let (m, n) = a.shape();
    if n == 0 {
        return vec![];
    }
    let (d, e) = bidiagonalize(a);
    let mut off = Vec::with_capacity(2 * n - 1);
    for k in 0..n {
        off.push(d[k]);
        if k + 1 < n {
            off.push(e[k]);
        }
    }
    let _ = m;
    let sq: Vec<f64> = off.iter().map(|b| b * b).collect();
    let bound = (0..2 * n)
        .map(|i| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i < 2 * n - 1 { off[i].abs() } else { 0.0 };
            left + right
        })
        .fold(0.0, f64::max);
    if bound == 0.0 {
        return vec![0.0; n];
    }
    let maxsq = sq.iter().fold(0.0f64, |a, &b| a.max(b));
    let pivmin = f64::MIN_POSITIVE * maxsq.max(1.0);
    let count_below = |x: f64| -> usize {
        let mut neg = 0usize;
        let mut q = -x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            neg += 1;
        }
        for s in &sq {
            q = -x - s / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                neg += 1;
            }
        }
        neg.saturating_sub(n)
    };
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        // k-th smallest, 0-based
        let (mut lo, mut hi) = (0.0f64, bound * (1.0 + 4.0 * f64::EPSILON));
        for _ in 0..4000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * hi || hi < f64::MIN_POSITIVE * 1e4 {
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// Diagonal and super-diagonal of a bidiagonal matrix orthogonally similar to
/// `a` (requires rows >= cols).
fn bidiagonalize(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut acc = vec![0.0; n];
    for k in 0..n {
        // left reflector on column k
        let x: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
        let (v, beta, alpha) = householder(&x);
        d[k] = alpha;
        if beta != 0.0 {
            acc[k..].iter_mut().for_each(|x| *x = 0.0);
            for (vi, i) in v.iter().zip(k..m) {
                for (a, &wv) in acc[k..].iter_mut().zip(&w.row(i)[k..]) {
                    *a += vi * wv;
                }
            }
            for (vi, i) in v.iter().zip(k..m) {
                let f = beta * vi;
                for (wv, a) in w.row_mut(i)[k..].iter_mut().zip(&acc[k..]) {
                    *wv -= f * a;
                }
            }
        }
        if k + 1 < n {
            let x: Vec<f64> = w.row(k)[k + 1..].to_vec();
            let (v, beta, alpha) = householder(&x);
            e[k] = alpha;
            if beta != 0.0 {
                for i in k..m {
                    let row = &mut w.row_mut(i)[k + 1..];
                    let s = dot(row, &v) * beta;
                    for (r, vi) in row.iter_mut().zip(&v) {
                        *r -= s * vi;
                    }
                }
            }
        }
    }
    (d, e)
}

/// Householder vector `v`, factor `beta` and image `alpha` with
/// `(I - beta v v^T) x = alpha e_1`.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let nx = vec_norm(x);
    if nx == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -nx } else { nx };
    let mut v: Vec<f64> = x.iter().map(|xi| xi / nx).collect();
    v[0] -= alpha / nx;
    let vv = dot(&v, &v);
    if vv == 0.0 {
        return (v, 0.0, alpha);
    }
    (v, 2.0 / vv, alpha)
}

/// Spectral condition number `sigma_1 / sigma_min`.
pub fn cond2(a: &Matrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Thin Householder QR with non-negative diagonal of `R`; requires rows >= cols.
pub fn qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("qr needs rows >= cols, got {m}x{n}")));
    }
    let anorm = a.fro();
    let mut w = a.clone();
    let mut refl: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    let mut acc = vec![0.0; n];
    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
        let (v, beta, _) = householder(&x);
        if beta != 0.0 {
            acc[k..].iter_mut().for_each(|x| *x = 0.0);
            for (vi, i) in v.iter().zip(k..m) {
                for (a, &wv) in acc[k..].iter_mut().zip(&w.row(i)[k..]) {
                    *a += vi * wv;
                }
            }
            for (vi, i) in v.iter().zip(k..m) {
                let f = beta * vi;
                for (wv, a) in w.row_mut(i)[k..].iter_mut().zip(&acc[k..]) {
                    *wv -= f * a;
                }
            }
        }
        refl.push((v, beta));
    }
    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = w[(i, j)];
        }
    }
    for k in 0..n {
        if r[(k, k)].abs() <= QR_RANK_TOL * anorm || anorm == 0.0 {
            return Err(Error::RankDeficient { col: k, value: r[(k, k)] });
        }
    }
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    let mut accq = vec![0.0; n];
    for k in (0..n).rev() {
        let (v, beta) = &refl[k];
        if *beta == 0.0 {
            continue;
        }
        accq.iter_mut().for_each(|x| *x = 0.0);
        for (vi, i) in v.iter().zip(k..m) {
            for (a, &qv) in accq.iter_mut().zip(q.row(i)) {
                *a += vi * qv;
            }
        }
        for (vi, i) in v.iter().zip(k..m) {
            let f = beta * vi;
            for (qv, a) in q.row_mut(i).iter_mut().zip(&accq) {
                *qv -= f * a;
            }
        }
    }
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok((q, r))
}

/// The unique `Q` factor with positive diagonal in `R`.
pub fn qr_q(a: &Matrix) -> Result<Matrix> {
    qr(a).map(|(q, _)| q)
}

/// Orthonormal basis of the numerical range of `a`, retaining singular
/// directions above `tau * sigma_1`.
pub fn range_basis(a: &Matrix, tau: f64) -> Result<Matrix> {
    let f = svd(a)?;
    let rho = count_above(&f.sigma, tau);
    Ok(f.left(rho))
}

/// Default relative tolerance `max(m, n) * 2^-52`.
pub fn default_rank_tol(m: usize, n: usize) -> f64 {
    m.max(n) as f64 * f64::EPSILON
}

fn count_above(sigma: &[f64], tau: f64) -> usize {
    match sigma.first() {
        Some(&s1) if s1 > 0.0 => sigma.iter().take_while(|&&s| s > tau * s1).count(),
        _ => 0,
    }
}

/// Largest `rho` with `sigma_rho > tau * sigma_1`.
pub fn numerical_rank(a: &Matrix, tau: f64) -> usize {
    count_above(&singular_values(a), tau)
}

pub fn pseudo_inverse(a: &Matrix) -> Result<Matrix> {
    let f = svd(a)?;
    let rho = count_above(&f.sigma, default_rank_tol(a.rows, a.cols));
    let (m, n) = a.shape();
    let mut out = Matrix::zeros(n, m);
    for k in 0..rho {
        let inv = 1.0 / f.sigma[k];
        for i in 0..n {
            let ti = f.t[(i, k)] * inv;
            if ti == 0.0 {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += ti * f.s[(j, k)];
            }
        }
    }
    Ok(out)
}

/// Best rank-`rho` approximation obtained by zeroing all but the `rho` largest
/// singular values.
pub fn truncate_svd(a: &Matrix, rho: usize) -> Result<Matrix> {
    let mut f = svd(a)?;
    if rho > f.sigma.len() {
        return Err(Error::Invalid(format!("rank {rho} exceeds {}", f.sigma.len())));
    }
    f.sigma[rho..].iter_mut().for_each(|s| *s = 0.0);
    Ok(f.reconstruct())
}

/// Orthonormal basis for the numerical null space of `a` from its SVD.
pub fn null_space(a: &Matrix, tau: f64) -> Result<Matrix> {
    let f = svd(a)?;
    let rho = count_above(&f.sigma, tau);
    Ok(f.right_tail(rho))
}

/// LU factorization with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("lu needs a square matrix, got {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.max_abs();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs())).unwrap();
            let piv = lu[(p, k)];
            if piv == 0.0 || piv.abs() <= scale * 1e-300 {
                return Err(Error::ZeroPivot { step: k, value: piv });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
                sign = -sign;
            }
            let (top, bottom) = lu.data.split_at_mut((k + 1) * n);
            let prow = &top[k * n..(k + 1) * n];
            for i in 0..n - k - 1 {
                let row = &mut bottom[i * n..(i + 1) * n];
                let l = row[k] / piv;
                row[k] = l;
                if l != 0.0 {
                    for (x, y) in row[k + 1..].iter_mut().zip(&prow[k + 1..]) {
                        *x -= l * y;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s = dot(&row[..i], &x[..i]);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s = dot(&row[i + 1..], &x[i + 1..]);
            x[i] = (x[i] - s) / row[i];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut z = b.to_vec();
        for i in 0..n {
            z[i] /= self.lu[(i, i)];
            let zi = z[i];
            for j in i + 1..n {
                z[j] -= self.lu[(i, j)] * zi;
            }
        }
        for i in (0..n).rev() {
            let zi = z[i];
            for j in 0..i {
                z[j] -= self.lu[(i, j)] * zi;
            }
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        x
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), b.cols);
        for j in 0..b.cols {
            out.set_col(j, &self.solve(&b.col(j)));
        }
        out
    }

    pub fn inverse(&self) -> Matrix {
        self.solve_matrix(&Matrix::identity(self.dim()))
    }

    pub fn det(&self) -> f64 {
        (0..self.dim()).map(|i| self.lu[(i, i)]).product::<f64>() * self.sign
    }
}

pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Lu::factor(a)?.solve(b))
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    Ok(Lu::factor(a)?.inverse())
}
