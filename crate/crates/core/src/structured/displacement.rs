//! Sylvester displacement generators `L M - M R = G H^T` with `L`, `R` drawn
//! from the unit f-circulant shifts `Z_f` and their transposes.

use super::toeplitz::f_circulant_matvec;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// The shift `Z_f`, or `Z_f^T` when `transposed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Op {
    pub shift: f64,
    pub transposed: bool,
}

impl Op {
    pub fn z(shift: f64) -> Self {
        Self { shift, transposed: false }
    }

    pub fn zt(shift: f64) -> Self {
        Self { shift, transposed: true }
    }

    pub fn t(self) -> Self {
        Self { shift: self.shift, transposed: !self.transposed }
    }

    /// `Op * M`.
    pub fn left_mul(&self, m: &Matrix) -> Matrix {
        let (r, c) = m.shape();
        Matrix::from_fn(r, c, |i, j| {
            if self.transposed {
                if i + 1 < r { m[(i + 1, j)] } else { self.shift * m[(0, j)] }
            } else if i > 0 {
                m[(i - 1, j)]
            } else {
                self.shift * m[(r - 1, j)]
            }
        })
    }

    /// `M * Op`.
    pub fn right_mul(&self, m: &Matrix) -> Matrix {
        let (r, c) = m.shape();
        Matrix::from_fn(r, c, |i, j| {
            if self.transposed {
                if j > 0 { m[(i, j - 1)] } else { self.shift * m[(i, c - 1)] }
            } else if j + 1 < c {
                m[(i, j + 1)]
            } else {
                self.shift * m[(i, 0)]
            }
        })
    }

    pub fn to_dense(&self, n: usize) -> Matrix {
        self.left_mul(&Matrix::identity(n))
    }
}

/// Displacement operator value `L M - M R`.
pub fn displacement(m: &Matrix, left: Op, right: Op) -> Matrix {
    &left.left_mul(m) - &right.right_mul(m)
}

fn flip_rows(m: &Matrix) -> Matrix {
    let r = m.rows();
    Matrix::from_fn(r, m.cols(), |i, j| m[(r - 1 - i, j)])
}

fn rev(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

/// Generator pair for an `n x n` matrix.
#[derive(Clone, Debug)]
pub struct DisplacementGenerator {
    pub left: Op,
    pub right: Op,
    pub g: Matrix,
    pub h: Matrix,
}

impl DisplacementGenerator {
    pub fn new(left: Op, right: Op, g: Matrix, h: Matrix) -> Result<Self> {
        if g.shape() != h.shape() {
            return Err(Error::Shape(format!("generator shapes {:?} vs {:?}", g.shape(), h.shape())));
        }
        if left.shift == right.shift {
            return Err(Error::Invalid("operator shifts must differ".into()));
        }
        Ok(Self { left, right, g, h })
    }

    /// Generator of a dense matrix, keeping singular values above `tol * ||M||_F`.
    pub fn from_dense(m: &Matrix, left: Op, right: Op, tol: f64) -> Result<Self> {
        let d = displacement(m, left, right);
        let f = linalg::svd_thin(&d)?;
        let cut = tol * m.fro();
        let k = f.sigma.iter().take_while(|&&s| s > cut).count();
        let mut g = f.s.cols_range(0, k);
        for j in 0..k {
            for i in 0..g.rows() {
                g[(i, j)] *= f.sigma[j];
            }
        }
        Self::new(left, right, g, f.t.cols_range(0, k))
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    /// Displacement length.
    pub fn len(&self) -> usize {
        self.g.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.g.cols() == 0
    }

    /// Generator of `N = P_L M P_R` in the pure `(Z_e, Z_f)` setting, where
    /// `P` is the reversal for a transposed side.
    fn bridged(&self) -> (Matrix, Matrix) {
        let g = if self.left.transposed { flip_rows(&self.g) } else { self.g.clone() };
        let h = if self.right.transposed { flip_rows(&self.h) } else { self.h.clone() };
        (g, h)
    }

    fn denom(&self) -> f64 {
        self.left.shift - self.right.shift
    }

    fn apply_core(&self, g: &Matrix, h: &Matrix, x: &[f64]) -> Vec<f64> {
        let (e, f) = (self.left.shift, self.right.shift);
        let n = self.dim();
        let mut y = vec![0.0; n];
        for j in 0..g.cols() {
            let t = f_circulant_matvec(f, &rev(&h.col(j)), x);
            let u = f_circulant_matvec(e, &g.col(j), &t);
            y.iter_mut().zip(&u).for_each(|(a, b)| *a += b);
        }
        let d = self.denom();
        y.iter_mut().for_each(|v| *v /= d);
        y
    }

    fn apply_core_t(&self, g: &Matrix, h: &Matrix, x: &[f64]) -> Vec<f64> {
        let (e, f) = (self.left.shift, self.right.shift);
        let n = self.dim();
        let xr = rev(x);
        let mut y = vec![0.0; n];
        for j in 0..g.cols() {
            let t = f_circulant_matvec(e, &g.col(j), &xr);
            let u = f_circulant_matvec(f, &rev(&h.col(j)), &t);
            y.iter_mut().zip(&u).for_each(|(a, b)| *a += b);
        }
        y.reverse();
        let d = self.denom();
        y.iter_mut().for_each(|v| *v /= d);
        y
    }

    /// `M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let (g, h) = self.bridged();
        let xin = if self.right.transposed { rev(x) } else { x.to_vec() };
        let y = self.apply_core(&g, &h, &xin);
        if self.left.transposed { rev(&y) } else { y }
    }

    /// `M^T x`.
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let (g, h) = self.bridged();
        let xin = if self.left.transposed { rev(x) } else { x.to_vec() };
        let y = self.apply_core_t(&g, &h, &xin);
        if self.right.transposed { rev(&y) } else { y }
    }

    pub fn apply_matrix(&self, x: &Matrix) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| self.apply(&x.col(j))).collect();
        Matrix::from_cols(self.dim(), &cols)
    }

    fn apply_transpose_matrix(&self, x: &Matrix) -> Matrix {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| self.apply_transpose(&x.col(j))).collect();
        Matrix::from_cols(self.dim(), &cols)
    }

    pub fn to_dense(&self) -> Matrix {
        self.apply_matrix(&Matrix::identity(self.dim()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { g: self.g.scale(s), ..self.clone() }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.left != o.left || self.right != o.right {
            return Err(Error::Invalid("operator mismatch in sum".into()));
        }
        Self::new(self.left, self.right, self.g.hcat(&o.g), self.h.hcat(&o.h))
    }

    /// Generator of `M^T`, for the operator pair `(R^T, L^T)`.
    pub fn transpose(&self) -> Self {
        Self { left: self.right.t(), right: self.left.t(), g: self.h.scale(-1.0), h: self.g.clone() }
    }

    /// Generator of `self * other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let (r1, l2) = (self.right, other.left);
        if r1.transposed != l2.transposed {
            return Err(Error::Invalid("incompatible middle operators".into()));
        }
        let mut g = self.g.hcat(&self.apply_matrix(&other.g));
        let mut h = other.apply_transpose_matrix(&self.h).hcat(&other.h);
        if r1.shift != l2.shift {
            let n = self.dim();
            let (i, k) = if r1.transposed { (n - 1, 0) } else { (0, n - 1) };
            let mut ei = vec![0.0; n];
            ei[i] = r1.shift - l2.shift;
            let mut ek = vec![0.0; n];
            ek[k] = 1.0;
            g = g.hcat(&Matrix::column(&self.apply(&ei)));
            h = h.hcat(&Matrix::column(&other.apply_transpose(&ek)));
        }
        Self::new(self.left, other.right, g, h)
    }

    /// Generator of `M^{-1}` for `(R, L)` through a dense factorization.
    pub fn inverse(&self) -> Result<Self> {
        let lu = linalg::Lu::factor(&self.to_dense())?;
        let n = self.dim();
        let d = self.len();
        let mut g = Matrix::zeros(n, d);
        let mut h = Matrix::zeros(n, d);
        for j in 0..d {
            let gj: Vec<f64> = lu.solve(&self.g.col(j)).iter().map(|v| -v).collect();
            g.set_col(j, &gj);
            h.set_col(j, &lu.solve_transpose(&self.h.col(j)));
        }
        Self::new(self.right, self.left, g, h)
    }

    /// Recompress to at most `max_len` terms, dropping singular values of
    /// `G H^T` below `tol` times the largest.
    pub fn compress(&self, max_len: usize, tol: f64) -> Result<Self> {
        if self.is_empty() {
            return Ok(self.clone());
        }
        let fg = linalg::svd_thin(&self.g)?;
        let fh = linalg::svd_thin(&self.h)?;
        let d = fg.sigma.len();
        let mut core = fg.t.transpose().matmul(&fh.t);
        for i in 0..d {
            for j in 0..d {
                core[(i, j)] *= fg.sigma[i] * fh.sigma[j];
            }
        }
        let fc = linalg::svd_thin(&core)?;
        let top = fc.sigma.first().copied().unwrap_or(0.0);
        let k = fc.sigma.iter().take(max_len).take_while(|&&s| s > tol * top && s > 0.0).count();
        let mut p = fc.s.cols_range(0, k);
        for j in 0..k {
            for i in 0..d {
                p[(i, j)] *= fc.sigma[j];
            }
        }
        let g = fg.s.matmul(&p);
        let h = fh.s.matmul(&fc.t.cols_range(0, k));
        Self::new(self.left, self.right, g, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, gaussian_toeplitz, Seed};

    const OPS: [(Op, Op); 4] = [
        (Op { shift: 1.0, transposed: false }, Op { shift: -1.0, transposed: false }),
        (Op { shift: 1.0, transposed: true }, Op { shift: -1.0, transposed: true }),
        (Op { shift: 0.0, transposed: false }, Op { shift: 1.0, transposed: true }),
        (Op { shift: -1.0, transposed: true }, Op { shift: 1.0, transposed: false }),
    ];

    fn diff(a: &Matrix, b: &Matrix) -> f64 {
        (a - b).max_abs()
    }

    #[test]
    fn toeplitz_has_length_two() {
        let t = gaussian_toeplitz(12, 12, 0.0, 1.0, Seed(1)).to_dense();
        for (l, r) in OPS.iter().take(2) {
            let g = DisplacementGenerator::from_dense(&t, *l, *r, 1e-10).unwrap();
            assert!(g.len() <= 2, "{l:?} {r:?}: {}", g.len());
            assert!(diff(&g.to_dense(), &t) < 1e-11);
        }
    }

    #[test]
    fn round_trip_all_operator_pairs() {
        let m = gaussian(9, 9, Seed(2));
        let x: Vec<f64> = (0..9).map(|i| (i as f64).cos()).collect();
        for (l, r) in OPS {
            let g = DisplacementGenerator::from_dense(&m, l, r, 1e-14).unwrap();
            assert!(diff(&g.to_dense(), &m) < 1e-11, "{l:?} {r:?}");
            let y = g.apply_transpose(&x);
            let want = m.tr_matvec(&x);
            assert!(y.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-11));
            let t = g.transpose();
            assert!(diff(&t.to_dense(), &m.transpose()) < 1e-11);
        }
    }

    #[test]
    fn algebra() {
        let a = gaussian_toeplitz(10, 10, 0.0, 1.0, Seed(3)).to_dense().shift_diag(6.0);
        let b = gaussian_toeplitz(10, 10, 0.0, 1.0, Seed(4)).to_dense();
        let (e, f) = (Op::z(1.0), Op::z(-1.0));
        let ga = DisplacementGenerator::from_dense(&a, e, f, 1e-12).unwrap();
        let gb = DisplacementGenerator::from_dense(&b, f, Op::z(0.0), 1e-12).unwrap();
        let p = ga.product(&gb).unwrap();
        assert!(diff(&p.to_dense(), &a.matmul(&b)) < 1e-10);
        // mismatched middle shifts need the correction term
        let gb2 = DisplacementGenerator::from_dense(&b, Op::z(0.0), f, 1e-12).unwrap();
        let p2 = ga.product(&gb2).unwrap();
        assert!(diff(&p2.to_dense(), &a.matmul(&b)) < 1e-10);
        let inv = ga.inverse().unwrap();
        assert!(diff(&inv.to_dense(), &linalg::inverse(&a).unwrap()) < 1e-10);
        assert!(inv.len() <= 2);
        let c = p.compress(4, 1e-12).unwrap();
        assert!(c.len() <= 4);
        assert!(diff(&c.to_dense(), &a.matmul(&b)) < 1e-9);
        let s = ga.add(&ga.scale(2.0)).unwrap();
        assert!(diff(&s.to_dense(), &a.scale(3.0)) < 1e-10);
    }

    #[test]
    fn rejects_equal_shifts() {
        let m = Matrix::identity(3);
        assert!(DisplacementGenerator::from_dense(&m, Op::z(1.0), Op::z(1.0), 1e-12).is_err());
    }
}
