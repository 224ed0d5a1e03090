//! Additive preprocessing `C = A + U V^T` and its dual, augmentation, and the
//! Sherman-Morrison-Woodbury recoveries built on them.

use crate::elimination::refine_ext;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Norm};
use crate::xprec::{self, ext_sub, ext_vec, round_vec, xmatmul_ext_std, xmatmul_mixed, ExtLu, ExtMatrix, ExtScalar};

/// Extended-refinement step cap for solves with the preprocessed matrix.
pub const REFINE_CAP: usize = 12;
/// Pivot ratio below which `G`, `H` or `R` count as numerically singular.
pub const SINGULAR_RATIO: f64 = 1e-28;

/// `C = A + U V^T` with its parts.
#[derive(Clone, Debug)]
pub struct AdditivePrep {
    pub a: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub c: Matrix,
}

/// Build `C = A + U V^T`; with `staged` every entry is summed in extended
/// precision and rounded once.
pub fn additive_preprocess(a: &Matrix, u: &Matrix, v: &Matrix, staged: bool) -> Result<AdditivePrep> {
    let (m, n) = a.shape();
    if u.rows() != m || v.rows() != n || u.cols() != v.cols() {
        return Err(Error::Shape(format!("A {:?}, U {:?}, V {:?}", a.shape(), u.shape(), v.shape())));
    }
    let c = if staged {
        Matrix::from_fn(m, n, |i, j| (xprec::xdot(u.row(i), v.row(j)) + a[(i, j)]).to_f64())
    } else {
        a + &u.matmul(&v.transpose())
    };
    Ok(AdditivePrep { a: a.clone(), u: u.clone(), v: v.clone(), c })
}

/// Rescale `U`, `V` by a common factor so that `||U V^T||_2 = ||A||_2`.
pub fn balance(a: &Matrix, u: &Matrix, v: &Matrix) -> (Matrix, Matrix) {
    let uv = u.matmul(&v.transpose()).norm(Norm::Two);
    if uv == 0.0 {
        return (u.clone(), v.clone());
    }
    let s = (a.norm(Norm::Two) / uv).sqrt();
    (u.scale(s), v.scale(s))
}

impl AdditivePrep {
    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    /// `b - (A + U V^T) x` with the exact (unrounded) `C`.
    pub fn residual_ext(&self, x: &[ExtScalar], b: &[ExtScalar]) -> Vec<ExtScalar> {
        let r = xprec::xresidual_ext(&self.a, x, b);
        if self.rank() == 0 {
            return r;
        }
        let vx = xprec::xtr_matvec(&self.v, x);
        ext_sub(&r, &xprec::xmatvec(&self.u, &vx))
    }

    /// Solve with the exact `C` to extended accuracy by refining `approx`.
    pub fn solve_c_ext(&self, approx: &impl Fn(&[f64]) -> Vec<f64>, b: &[ExtScalar]) -> Vec<ExtScalar> {
        refine_ext(|x| self.residual_ext(x, b), approx, b, REFINE_CAP).0
    }
}

/// `A^{-1} = C^{-1} + C^{-1} U G^{-1} V^T C^{-1}` with `G = I - V^T C^{-1} U`.
pub struct Smw<S> {
    prep: AdditivePrep,
    solve_c: S,
    xu: ExtMatrix,
    g: ExtMatrix,
    glu: Option<ExtLu>,
}

impl<S: Fn(&[f64]) -> Vec<f64>> Smw<S> {
    /// `solve_c` approximately solves with `C`; it is refined internally.
    pub fn new(prep: &AdditivePrep, solve_c: S) -> Result<Self> {
        let (n, r) = prep.u.shape();
        let cols: Vec<Vec<ExtScalar>> = (0..r).map(|j| prep.solve_c_ext(&solve_c, &ext_vec(&prep.u.col(j)))).collect();
        let xu = ExtMatrix::from_cols(n, &cols);
        let vx = xmatmul_mixed(&prep.v.transpose(), &xu);
        let g = ExtMatrix::identity(r).sub(&vx);
        let glu = if r > 0 {
            let lu = ExtLu::factor(&g).map_err(|_| Error::Singular("G = I - V^T C^{-1} U"))?;
            if lu.pivot_ratio() < SINGULAR_RATIO {
                return Err(Error::Singular("G = I - V^T C^{-1} U"));
            }
            Some(lu)
        } else {
            None
        };
        Ok(Self { prep: prep.clone(), solve_c, xu, g, glu })
    }

    pub fn prep(&self) -> &AdditivePrep {
        &self.prep
    }

    /// `X_U = C^{-1} U`.
    pub fn xu(&self) -> &ExtMatrix {
        &self.xu
    }

    pub fn g(&self) -> &ExtMatrix {
        &self.g
    }

    pub fn solve_c_ext(&self, b: &[ExtScalar]) -> Vec<ExtScalar> {
        self.prep.solve_c_ext(&self.solve_c, b)
    }

    /// `X_U G^{-1} w`.
    fn correction(&self, w: &[ExtScalar]) -> Vec<ExtScalar> {
        match &self.glu {
            Some(lu) => self.xu.matvec(&lu.solve(w)),
            None => vec![ExtScalar::ZERO; self.xu.rows()],
        }
    }

    /// `A^{-1} b` in extended precision.
    pub fn solve_ext(&self, b: &[ExtScalar]) -> Vec<ExtScalar> {
        let z = self.solve_c_ext(b);
        if self.glu.is_none() {
            return z;
        }
        let w = xprec::xtr_matvec(&self.prep.v, &z);
        xprec::ext_add(&z, &self.correction(&w))
    }
}

pub fn smw_solve(prep: &AdditivePrep, solve_c: impl Fn(&[f64]) -> Vec<f64>, b: &[f64]) -> Result<Vec<ExtScalar>> {
    Ok(Smw::new(prep, solve_c)?.solve_ext(&ext_vec(b)))
}

/// `H = I_q + V_^T A U_` and `C_ = A - A U_ H^{-1} V_^T A`.
#[derive(Clone, Debug)]
pub struct DualPrep {
    pub h: ExtMatrix,
    pub c: Matrix,
    pub u: Matrix,
    pub v: Matrix,
}

pub fn dual_additive(a: &Matrix, u: &Matrix, v: &Matrix, staged: bool) -> Result<DualPrep> {
    let n = a.rows();
    if !a.is_square() || u.rows() != n || v.rows() != n || u.cols() != v.cols() {
        return Err(Error::Shape(format!("A {:?}, U {:?}, V {:?}", a.shape(), u.shape(), v.shape())));
    }
    let q = u.cols();
    let au = xmatmul_mixed(a, &ExtMatrix::from_matrix(u));
    let va = xmatmul_ext_std(&ExtMatrix::from_matrix(&v.transpose()), a);
    let vau = xmatmul_mixed(&v.transpose(), &au);
    let h = ExtMatrix::identity(q).add(&vau);
    if q == 0 {
        return Ok(DualPrep { h, c: a.clone(), u: u.clone(), v: v.clone() });
    }
    let lu = ExtLu::factor(&h).map_err(|_| Error::Singular("H = I + V^T A U"))?;
    if lu.pivot_ratio() < SINGULAR_RATIO {
        return Err(Error::Singular("H = I + V^T A U"));
    }
    let hva = lu.solve_matrix(&va);
    let corr = au.matmul(&hva);
    let full = ExtMatrix::from_matrix(a).sub(&corr);
    let c = if staged { full.round() } else { a - &au.round().matmul(&hva.round()) };
    Ok(DualPrep { h, c, u: u.clone(), v: v.clone() })
}

/// `K = (W, V^T; -U, A)`.
#[derive(Clone, Debug)]
pub struct Augmentation {
    pub a: Matrix,
    pub u: Matrix,
    pub v: Matrix,
    pub w: Matrix,
    pub k: Matrix,
}

pub fn augment(a: &Matrix, u: &Matrix, v: &Matrix, w: &Matrix) -> Result<Augmentation> {
    let (m, n) = a.shape();
    let r = w.rows();
    if u.shape() != (m, w.cols()) || v.shape() != (n, r) {
        return Err(Error::Shape(format!("A {:?}, U {:?}, V {:?}, W {:?}", a.shape(), u.shape(), v.shape(), w.shape())));
    }
    let top = w.hcat(&v.transpose());
    let bottom = u.scale(-1.0).hcat(a);
    Ok(Augmentation { a: a.clone(), u: u.clone(), v: v.clone(), w: w.clone(), k: top.vcat(&bottom) })
}

impl Augmentation {
    pub fn extra(&self) -> usize {
        self.w.rows()
    }

    /// `||K - U^ diag(C, I) V^ diag(W, I)|| / ||K||` with `C = A + U W^{-1} V^T`.
    pub fn factorization_residual(&self) -> Result<f64> {
        let (n, r) = (self.a.rows(), self.extra());
        let winv = linalg::inverse(&self.w)?;
        let uw = self.u.matmul(&winv);
        let c = &self.a + &uw.matmul(&self.v.transpose());
        let uh = Matrix::zeros(r, n).hcat(&Matrix::identity(r)).vcat(&Matrix::identity(n).hcat(&uw.scale(-1.0)));
        let d1 = c.hcat(&Matrix::zeros(n, r)).vcat(&Matrix::zeros(r, n).hcat(&Matrix::identity(r)));
        let vh = Matrix::zeros(n, r).hcat(&Matrix::identity(n)).vcat(&Matrix::identity(r).hcat(&self.v.transpose()));
        let d2 = self.w.hcat(&Matrix::zeros(r, n)).vcat(&Matrix::zeros(n, r).hcat(&Matrix::identity(n)));
        let prod = uh.matmul(&d1).matmul(&vh).matmul(&d2);
        Ok((&prod - &self.k).norm(Norm::Two) / self.k.norm(Norm::Two))
    }
}

/// `A^{-1}` recovered from solves with `K`: `S^{-1}` is the trailing block
/// of `K^{-1}` and `A^{-1} = S^{-1} + S^{-1} U W^{-1} R^{-1} V^T S^{-1}`.
pub struct AugRecovery<S> {
    aug: Augmentation,
    solve_k: S,
    su: ExtMatrix,
    rlu: Option<ExtLu>,
}

impl<S: Fn(&[f64]) -> Vec<f64>> AugRecovery<S> {
    /// `S^{-1} y` to extended accuracy.
    pub fn solve_s_ext(&self, y: &[ExtScalar]) -> Vec<ExtScalar> {
        let r = self.aug.extra();
        let mut rhs = vec![ExtScalar::ZERO; r];
        rhs.extend_from_slice(y);
        let k = &self.aug.k;
        let (x, _) = refine_ext(|x| xprec::xresidual_ext(k, x, &rhs), &self.solve_k, &rhs, REFINE_CAP);
        x[r..].to_vec()
    }

    pub fn solve_ext(&self, b: &[ExtScalar]) -> Vec<ExtScalar> {
        let z = self.solve_s_ext(b);
        match &self.rlu {
            Some(lu) => {
                let w = lu.solve(&xprec::xtr_matvec(&self.aug.v, &z));
                xprec::ext_add(&z, &self.su.matvec(&w))
            }
            None => z,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        round_vec(&self.solve_ext(&ext_vec(b)))
    }
}

pub fn aug_inverse_recover<S: Fn(&[f64]) -> Vec<f64>>(aug: &Augmentation, solve_k: S) -> Result<AugRecovery<S>> {
    let (n, r) = (aug.a.rows(), aug.extra());
    if !aug.a.is_square() {
        return Err(Error::Shape("square A expected".into()));
    }
    let mut rec = AugRecovery { aug: aug.clone(), solve_k, su: ExtMatrix::zeros(n, 0), rlu: None };
    if r == 0 {
        return Ok(rec);
    }
    let wt = ExtLu::factor(&ExtMatrix::from_matrix(&aug.w.transpose())).map_err(|_| Error::Singular("W"))?;
    // U W^{-1} = (W^{-T} U^T)^T, then S^{-1} applied per column
    let uw = wt.solve_matrix(&ExtMatrix::from_matrix(&aug.u.transpose())).transpose();
    let cols: Vec<Vec<ExtScalar>> = (0..r).map(|j| rec.solve_s_ext(&uw.col(j))).collect();
    let su = ExtMatrix::from_cols(n, &cols);
    let vsu = xmatmul_mixed(&aug.v.transpose(), &su);
    let rmat = ExtMatrix::identity(r).sub(&vsu);
    let rlu = ExtLu::factor(&rmat).map_err(|_| Error::Singular("R = I - V^T S^{-1} U W^{-1}"))?;
    if rlu.pivot_ratio() < SINGULAR_RATIO {
        return Err(Error::Singular("R = I - V^T S^{-1} U W^{-1}"));
    }
    rec.su = su;
    rec.rlu = Some(rlu);
    Ok(rec)
}

/// Which multiplicative preconditioner to expose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultVariant {
    /// `C^{-1} (I + U G^{-1} V^T C^{-1})`, an approximate inverse: `A A_ ~ I`.
    Inverse,
    /// `I + C^{-1} U G^{-1} V^T`, so that `A A_ = C`.
    Right,
    /// `I + U G^{-1} V^T C^{-1}`, so that `A_ A = C`.
    Left,
}

/// Implicit multiplicative preconditioner.
pub struct MultPreconditioner<S> {
    smw: Smw<S>,
    variant: MultVariant,
}

pub fn mult_preconditioner<S: Fn(&[f64]) -> Vec<f64>>(prep: &AdditivePrep, solve_c: S, variant: MultVariant) -> Result<MultPreconditioner<S>> {
    Ok(MultPreconditioner { smw: Smw::new(prep, solve_c)?, variant })
}

impl<S: Fn(&[f64]) -> Vec<f64>> MultPreconditioner<S> {
    pub fn variant(&self) -> MultVariant {
        self.variant
    }

    pub fn apply_ext(&self, x: &[ExtScalar]) -> Vec<ExtScalar> {
        let v = &self.smw.prep.v;
        let u = &self.smw.prep.u;
        match self.variant {
            MultVariant::Inverse => self.smw.solve_ext(x),
            MultVariant::Right => {
                let w = xprec::xtr_matvec(v, x);
                xprec::ext_add(x, &self.smw.correction(&w))
            }
            MultVariant::Left => {
                if u.cols() == 0 {
                    return x.to_vec();
                }
                let z = self.smw.solve_c_ext(x);
                let w = xprec::xtr_matvec(v, &z);
                let g = self.smw.glu.as_ref().map(|lu| lu.solve(&w)).unwrap_or_default();
                xprec::ext_add(x, &xprec::xmatvec(u, &g))
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        round_vec(&self.apply_ext(&ext_vec(x)))
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.smw.prep.a.cols();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                self.apply(&e)
            })
            .collect();
        Matrix::from_cols(n, &cols)
    }

    /// `A A_` (or `A_ A` for the left variant), accumulated in extended
    /// precision and rounded once.
    pub fn composed(&self) -> Matrix {
        let a = &self.smw.prep.a;
        let n = a.cols();
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                if self.variant == MultVariant::Left {
                    round_vec(&self.apply_ext(&ext_vec(&a.col(j))))
                } else {
                    let mut e = vec![ExtScalar::ZERO; n];
                    e[j] = ExtScalar::ONE;
                    round_vec(&xprec::xmatvec(a, &self.apply_ext(&e)))
                }
            })
            .collect();
        Matrix::from_cols(a.rows(), &cols)
    }
}
