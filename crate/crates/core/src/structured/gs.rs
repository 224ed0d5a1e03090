//! Levinson recursion and Gohberg-Semencul representations of Toeplitz
//! inverses as differences of products of triangular Toeplitz factors.

use super::exactconv::XConvKernel;
use super::fft::ConvKernel;
use super::toeplitz::Toeplitz;
use crate::error::{Error, Result};
use crate::xprec::{ext_vec, round_vec, ExtScalar};
use std::cell::OnceCell;

/// Relative threshold on the leading generator entry.
pub const GS_PIVOT_TOL: f64 = 1e-13;

/// Solve `T x = b` for symmetric Toeplitz `T` given by its first column,
/// assuming every leading principal minor is nonsingular.
pub fn levinson_symmetric(col: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = col.len();
    assert_eq!(b.len(), n);
    let t0 = col[0];
    if t0 == 0.0 {
        return Err(Error::ZeroPivot { step: 0, value: 0.0 });
    }
    let r: Vec<f64> = col[1..].iter().map(|v| v / t0).collect();
    let b: Vec<f64> = b.iter().map(|v| v / t0).collect();
    let mut x = vec![0.0; n];
    x[0] = b[0];
    if n == 1 {
        return Ok(x);
    }
    let mut y = vec![0.0; n - 1];
    y[0] = -r[0];
    let mut beta = 1.0;
    let mut alpha = -r[0];
    let mut tmp = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if !beta.is_finite() || beta.abs() < 1e-14 {
            return Err(Error::ZeroPivot { step: k, value: beta });
        }
        let mut s = b[k];
        for i in 0..k {
            s -= r[i] * x[k - 1 - i];
        }
        let mu = s / beta;
        for i in 0..k {
            tmp[i] = x[i] + mu * y[k - 1 - i];
        }
        x[..k].copy_from_slice(&tmp[..k]);
        x[k] = mu;
        if k < n - 1 {
            let mut s = -r[k];
            for i in 0..k {
                s -= r[i] * y[k - 1 - i];
            }
            alpha = s / beta;
            for i in 0..k {
                tmp[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&tmp[..k]);
            y[k] = alpha;
        }
    }
    Ok(x)
}

fn rev<T: Copy>(v: &[T]) -> Vec<T> {
    v.iter().rev().copied().collect()
}

fn down<T: Copy + Default>(v: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); v.len()];
    out[1..].copy_from_slice(&v[..v.len() - 1]);
    out
}

/// `(1/c) [Z(a1) Z(b1)^T - Z(a2) Z(b2)^T]` with lower triangular Toeplitz `Z(.)`.
pub struct GsInverse {
    gens: [Vec<ExtScalar>; 4],
    c: ExtScalar,
    kernels: OnceCell<[ConvKernel; 4]>,
    ext_kernels: OnceCell<[XConvKernel; 4]>,
}

impl GsInverse {
    pub fn new(a1: Vec<ExtScalar>, b1: Vec<ExtScalar>, a2: Vec<ExtScalar>, b2: Vec<ExtScalar>, c: ExtScalar) -> Result<Self> {
        let n = a1.len();
        assert!(b1.len() == n && a2.len() == n && b2.len() == n);
        let scale = [&a1, &b1, &a2, &b2].iter().flat_map(|v| v.iter()).fold(0.0f64, |m, x| m.max(x.hi.abs()));
        if !c.is_finite() || c.hi.abs() <= GS_PIVOT_TOL * scale || c.hi == 0.0 {
            return Err(Error::ZeroPivot { step: 0, value: c.hi });
        }
        Ok(Self { gens: [a1, b1, a2, b2], c, kernels: OnceCell::new(), ext_kernels: OnceCell::new() })
    }

    /// From `p = T^{-1} e_1` and `q = T^{-1} e_n`.
    pub fn from_end_columns(p: &[f64], q: &[f64]) -> Result<Self> {
        let jp = rev(p);
        let (p, q) = (ext_vec(p), ext_vec(q));
        let c = p[0];
        Self::new(p.clone(), ext_vec(&rev(&round_vec(&q))), down(&q), down(&ext_vec(&jp)), c)
    }

    /// Inverse of the leading `n x n` block of an `(n+1) x (n+1)` Toeplitz
    /// matrix `K` from its first and last inverse columns `v`, `w`.
    pub fn leading_from_border(v: &[ExtScalar], w: &[ExtScalar]) -> Result<Self> {
        let n = v.len() - 1;
        assert_eq!(w.len(), n + 1);
        Self::new(v[..n].to_vec(), rev(&w[1..]), w[..n].to_vec(), rev(&v[1..]), v[0])
    }

    pub fn dim(&self) -> usize {
        self.gens[0].len()
    }

    fn kernels(&self) -> &[ConvKernel; 4] {
        self.kernels.get_or_init(|| {
            let n = self.dim();
            let k = |i: usize| ConvKernel::new(&round_vec(&self.gens[i]), n);
            [k(0), k(1), k(2), k(3)]
        })
    }

    fn ext_kernels(&self) -> &[XConvKernel; 4] {
        self.ext_kernels.get_or_init(|| {
            let n = self.dim();
            let k = |i: usize| XConvKernel::new(&self.gens[i], n);
            [k(0), k(1), k(2), k(3)]
        })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let k = self.kernels();
        let xr = rev(x);
        let lower = |ker: &ConvKernel, v: &[f64]| ker.apply(v)[..n].to_vec();
        let mut u1 = lower(&k[1], &xr);
        u1.reverse();
        let mut u2 = lower(&k[3], &xr);
        u2.reverse();
        let y1 = lower(&k[0], &u1);
        let y2 = lower(&k[2], &u2);
        let c = self.c.to_f64();
        y1.iter().zip(&y2).map(|(a, b)| (a - b) / c).collect()
    }

    pub fn apply_ext(&self, x: &[ExtScalar]) -> Vec<ExtScalar> {
        let n = self.dim();
        let k = self.ext_kernels();
        let xr = rev(x);
        let lower = |ker: &XConvKernel, v: &[ExtScalar]| ker.apply(v)[..n].to_vec();
        let u1 = rev(&lower(&k[1], &xr));
        let u2 = rev(&lower(&k[3], &xr));
        let y1 = lower(&k[0], &u1);
        let y2 = lower(&k[2], &u2);
        y1.iter().zip(&y2).map(|(a, b)| (*a - *b) / self.c).collect()
    }

    pub fn to_dense(&self) -> crate::linalg::Matrix {
        let n = self.dim();
        let mut m = crate::linalg::Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            m.set_col(j, &self.apply(&e));
        }
        m
    }
}

/// Implicit inverse of a nonsingular Toeplitz matrix. The end columns come
/// from Levinson in the symmetric case and from a dense factorization
/// otherwise; a vanishing first-column pivot falls back to the form built
/// from an `(n+1) x (n+1)` embedding with a random corner pair.
pub fn toeplitz_inverse_gs(t: &Toeplitz) -> Result<GsInverse> {
    let n = t.rows();
    if t.cols() != n {
        return Err(Error::Shape("square Toeplitz matrix expected".into()));
    }
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let mut en = vec![0.0; n];
    en[n - 1] = 1.0;
    let col = t.first_col();
    let lev = if t.is_symmetric() { levinson_symmetric(&col, &e1).ok() } else { None };
    let (p, q) = match lev {
        Some(p) => {
            let q = rev(&p);
            (p, q)
        }
        None => {
            let lu = crate::linalg::Lu::factor(&t.to_dense())?;
            (lu.solve(&e1), lu.solve(&en))
        }
    };
    match GsInverse::from_end_columns(&p, &q) {
        Ok(g) => Ok(g),
        Err(_) => border_form(t),
    }
}

fn border_form(t: &Toeplitz) -> Result<GsInverse> {
    let n = t.rows();
    let scale = t.diagonals().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let mut last = Err(Error::Singular("Gohberg-Semencul pivots vanish"));
    for (a, b) in [(0.7317, -1.213), (1.377, 0.4419)] {
        let mut diag = Vec::with_capacity(2 * n + 1);
        diag.push(a * scale);
        diag.extend_from_slice(t.diagonals());
        diag.push(b * scale);
        let k = Toeplitz::from_diagonals(n + 1, n + 1, diag).to_dense();
        let Ok(lu) = crate::linalg::Lu::factor(&k) else { continue };
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        let v = lu.solve(&e);
        e[0] = 0.0;
        e[n] = 1.0;
        let w = lu.solve(&e);
        last = GsInverse::leading_from_border(&ext_vec(&v), &ext_vec(&w));
        if last.is_ok() {
            break;
        }
    }
    last
}
