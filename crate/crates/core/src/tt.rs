//! Tensor-train compression by a left-to-right sweep of truncated
//! factorizations of the unfoldings.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lowrank::{sample_cover, CoverSide, Family};
use crate::rng::Seed;

/// Dense `d`-way tensor stored in lexicographic (last index fastest) order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || len != data.len() {
            return Err(Error::Shape(format!("dims {dims:?} need {len} values, got {}", data.len())));
        }
        Ok(DenseTensor { dims, data })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let len: usize = dims.iter().product();
        let mut idx = vec![0; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, &dims);
        }
        DenseTensor { dims, data }
    }

    /// `a_1 o a_2 o ... o a_d`.
    pub fn outer(factors: &[Vec<f64>]) -> Self {
        let dims = factors.iter().map(Vec::len).collect();
        Self::from_fn(dims, |idx| idx.iter().zip(factors).map(|(&i, f)| f[i]).product())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len(), "index arity");
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &n)| {
            assert!(i < n, "index {i} out of range {n}");
            acc * n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn fro(&self) -> f64 {
        linalg::vec_norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x - y).collect();
        Ok(DenseTensor { dims: self.dims.clone(), data })
    }

    /// Parses `dims: n1 n2 ... nd` followed by the values.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Invalid("line 1: empty tensor file".into()))?;
        let rest = header
            .trim()
            .strip_prefix("dims:")
            .ok_or_else(|| Error::Invalid(format!("line 1: expected 'dims:' header, got {header:?}")))?;
        let dims = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| Error::Invalid(format!("line 1: bad dimension {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut data = vec![];
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                let v = tok.parse::<f64>().map_err(|e| Error::Invalid(format!("line {}: bad value {tok:?}: {e}", ln + 1)))?;
                data.push(v);
            }
        }
        Self::new(dims, data)
    }

    pub fn to_text(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        let mut out = format!("dims: {}\n", dims.join(" "));
        let last = *self.dims.last().unwrap_or(&1);
        for chunk in self.data.chunks(last.max(1)) {
            let row: Vec<String> = chunk.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

fn advance(idx: &mut [usize], dims: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < dims[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// `(n_1...n_k) x (n_{k+1}...n_d)` unfolding.
pub fn unfolding(a: &DenseTensor, k: usize) -> Result<Matrix> {
    let d = a.order();
    if k == 0 || k >= d {
        return Err(Error::Invalid(format!("unfolding index {k} outside 1..{}", d.saturating_sub(1))));
    }
    let rows: usize = a.dims[..k].iter().product();
    let cols: usize = a.dims[k..].iter().product();
    Ok(Matrix::from_vec(rows, cols, a.data.clone()))
}

/// Three-way core of shape `left x mode x right`.
#[derive(Clone, Debug, PartialEq)]
pub struct TtCore {
    pub left: usize,
    pub mode: usize,
    pub right: usize,
    pub data: Vec<f64>,
}

impl TtCore {
    pub fn new(left: usize, mode: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != left * mode * right {
            return Err(Error::Shape(format!("core {left}x{mode}x{right} with {} values", data.len())));
        }
        Ok(TtCore { left, mode, right, data })
    }

    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.mode + i) * self.right + b]
    }

    /// `left x right` slice at mode index `i`.
    pub fn slice(&self, i: usize) -> Matrix {
        Matrix::from_fn(self.left, self.right, |a, b| self.get(a, i, b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TTDecomposition {
    cores: Vec<TtCore>,
}

impl TTDecomposition {
    pub fn new(cores: Vec<TtCore>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::Invalid("no cores".into()));
        }
        if cores[0].left != 1 || cores[cores.len() - 1].right != 1 {
            return Err(Error::Shape("boundary ranks must be 1".into()));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::Shape(format!("rank mismatch between cores {k} and {}", k + 1)));
            }
        }
        Ok(TTDecomposition { cores })
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode).collect()
    }

    /// Interior compression ranks `r_1..r_{d-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1].iter().map(|c| c.right).collect()
    }

    pub fn storage(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    pub fn eval(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.cores.len(), "index arity");
        let mut row = vec![1.0];
        for (core, &i) in self.cores.iter().zip(idx) {
            let mut next = vec![0.0; core.right];
            for (a, &ra) in row.iter().enumerate() {
                if ra == 0.0 {
                    continue;
                }
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += ra * core.get(a, i, b);
                }
            }
            row = next;
        }
        row[0]
    }

    pub fn to_full(&self) -> DenseTensor {
        // (prefix x r_k) matrix grown one core at a time
        let mut acc = Matrix::from_vec(1, 1, vec![1.0]);
        for core in &self.cores {
            let unf = Matrix::from_vec(core.left, core.mode * core.right, core.data.clone());
            let prod = acc.matmul(&unf);
            acc = Matrix::from_vec(prod.rows() * core.mode, core.right, prod.into_data());
        }
        DenseTensor { dims: self.dims(), data: acc.into_data() }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for core in &self.cores {
            out.push_str(&format!("core: {} {} {}\n", core.left, core.mode, core.right));
            let vals: Vec<String> = core.data.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&vals.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Svd,
    /// Gaussian cover of width `rank + 2`, then truncation back to `rank`.
    Randomized,
}

impl Method {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "svd" => Some(Method::Svd),
            "randomized" | "random" => Some(Method::Randomized),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Truncation {
    /// Relative Frobenius accuracy for the whole tensor.
    Tol(f64),
    /// Fixed interior ranks, capped by the unfolding sizes.
    Ranks(Vec<usize>),
}

pub const OVERSAMPLING: usize = 2;

/// Truncated left factor `U` (orthonormal) and remainder `R` with `C ~ U R`.
struct Split {
    u: Matrix,
    rest: Matrix,
}

fn sigma_tail_rank(sigma: &[f64], budget_sq: f64) -> usize {
    let mut tail = 0.0;
    let mut r = sigma.len();
    while r > 0 && tail + sigma[r - 1] * sigma[r - 1] <= budget_sq {
        tail += sigma[r - 1] * sigma[r - 1];
        r -= 1;
    }
    r
}

fn split_from_svd(q: Option<&Matrix>, b: &Matrix, target: StepTarget, resid_sq: f64) -> Result<Split> {
    let f = linalg::svd_thin(b)?;
    let r = match target {
        StepTarget::Rank(r) => r.min(f.sigma.len()),
        StepTarget::Budget(delta_sq) => sigma_tail_rank(&f.sigma, (delta_sq - resid_sq).max(0.0)),
    }
    .max(1);
    let w = f.s.cols_range(0, r);
    let u = match q {
        Some(q) => q.matmul(&w),
        None => w,
    };
    let mut vt = f.t.cols_range(0, r).transpose();
    for (i, sg) in f.sigma[..r].iter().enumerate() {
        for v in vt.row_mut(i) {
            *v *= sg;
        }
    }
    Ok(Split { u, rest: vt })
}

#[derive(Clone, Copy, Debug)]
enum StepTarget {
    Rank(usize),
    /// Squared Frobenius budget for the discarded part.
    Budget(f64),
}

fn split_step(c: &Matrix, method: Method, target: StepTarget, seed: Seed) -> Result<Split> {
    let full = c.rows().min(c.cols());
    match method {
        Method::Svd => split_from_svd(None, c, target, 0.0),
        Method::Randomized => {
            let mut width = match target {
                StepTarget::Rank(r) => r + OVERSAMPLING,
                StepTarget::Budget(_) => 1 + OVERSAMPLING,
            };
            for attempt in 0.. {
                width = width.min(full).max(1);
                let cover = sample_cover(&c.transpose(), width, CoverSide::Right, Family::Gaussian, seed.derive(attempt));
                let q = linalg::qr_q(&cover).or_else(|_| linalg::range_basis(&cover, 1e-14))?;
                let b = q.tr_matmul(c);
                let resid_sq = (c - &q.matmul(&b)).fro().powi(2);
                let done = match target {
                    StepTarget::Rank(_) => true,
                    StepTarget::Budget(delta_sq) => resid_sq <= delta_sq || width == full,
                };
                if done {
                    return split_from_svd(Some(&q), &b, target, resid_sq);
                }
                width *= 2;
            }
            unreachable!()
        }
    }
}

/// Left-to-right sweep: split the current unfolding, keep the left factor as
/// a core and fold `Sigma V^T` into the next unfolding.
pub fn tt_compress(a: &DenseTensor, method: Method, trunc: &Truncation, seed: Seed) -> Result<TTDecomposition> {
    let d = a.order();
    if d < 2 {
        return Err(Error::Invalid("tensor order must be at least 2".into()));
    }
    if let Truncation::Ranks(r) = trunc {
        if r.len() != d - 1 || r.contains(&0) {
            return Err(Error::Invalid(format!("need {} positive ranks, got {r:?}", d - 1)));
        }
    }
    let delta_sq = match trunc {
        Truncation::Tol(eps) if *eps < 0.0 => return Err(Error::Invalid(format!("negative tolerance {eps}"))),
        Truncation::Tol(eps) => (eps * a.fro()).powi(2) / (d - 1) as f64,
        Truncation::Ranks(_) => 0.0,
    };
    let dims = &a.dims;
    let mut cores = Vec::with_capacity(d);
    let mut left = 1;
    let mut cur = Matrix::from_vec(dims[0], a.data.len() / dims[0], a.data.clone());
    for k in 0..d - 1 {
        let target = match trunc {
            Truncation::Tol(_) => StepTarget::Budget(delta_sq),
            Truncation::Ranks(r) => StepTarget::Rank(r[k]),
        };
        let split = split_step(&cur, method, target, seed.stream(k as u64))?;
        let r = split.u.cols();
        cores.push(TtCore::new(left, dims[k], r, split.u.into_data())?);
        let rest = split.rest;
        let cols = rest.cols() / dims[k + 1];
        cur = Matrix::from_vec(r * dims[k + 1], cols, rest.into_data());
        left = r;
    }
    cores.push(TtCore::new(left, dims[d - 1], 1, cur.into_data())?);
    TTDecomposition::new(cores)
}

/// `tau_k`: Frobenius tail of the `k`-th unfolding beyond rank `r_k`.
pub fn unfolding_tails(a: &DenseTensor, ranks: &[usize]) -> Result<Vec<f64>> {
    ranks
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let s = linalg::singular_values(&unfolding(a, k + 1)?);
            Ok(s.iter().skip(r).map(|x| x * x).sum::<f64>().sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use proptest::prelude::*;

    fn random_tt(dims: &[usize], ranks: &[usize], seed: Seed) -> TTDecomposition {
        let mut rng = Rng::new(seed);
        let mut full = vec![1];
        full.extend_from_slice(ranks);
        full.push(1);
        let cores = dims
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let len = full[k] * n * full[k + 1];
                TtCore::new(full[k], n, full[k + 1], rng.gaussian_vec(len)).unwrap()
            })
            .collect();
        TTDecomposition::new(cores).unwrap()
    }

    fn rel_err(a: &DenseTensor, t: &TTDecomposition) -> f64 {
        a.sub(&t.to_full()).unwrap().fro() / a.fro()
    }

    #[test]
    fn unfolding_of_matrix_is_itself() {
        let a = DenseTensor::new(vec![2, 3], (0..6).map(f64::from).collect()).unwrap();
        let m = unfolding(&a, 1).unwrap();
        assert_eq!(m, Matrix::from_vec(2, 3, (0..6).map(f64::from).collect()));
        assert!(unfolding(&a, 0).is_err());
        assert!(unfolding(&a, 2).is_err());
    }

    #[test]
    fn unfolding_counting_tensor() {
        let a = DenseTensor::from_fn(vec![2, 2, 2], |i| (4 * i[0] + 2 * i[1] + i[2]) as f64);
        let m = unfolding(&a, 1).unwrap();
        for i0 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    assert_eq!(m[(i0, 2 * i1 + i2)], a.get(&[i0, i1, i2]));
                }
            }
        }
        let m2 = unfolding(&a, 2).unwrap();
        assert_eq!(m2.shape(), (4, 2));
        assert_eq!(m2[(3, 1)], 7.0);
    }

    #[test]
    fn outer_product_has_unit_ranks() {
        let mut rng = Rng::new(Seed(1));
        let a = DenseTensor::outer(&[rng.gaussian_vec(3), rng.gaussian_vec(4), rng.gaussian_vec(5)]);
        for k in 1..3 {
            assert_eq!(linalg::numerical_rank(&unfolding(&a, k).unwrap(), 1e-12), 1);
        }
        for method in [Method::Svd, Method::Randomized] {
            let t = tt_compress(&a, method, &Truncation::Tol(1e-12), Seed(2)).unwrap();
            assert_eq!(t.ranks(), vec![1, 1]);
            assert!(rel_err(&a, &t) <= 1e-12);
        }
    }

    #[test]
    fn planted_ranks_recovered_by_svd() {
        let a = random_tt(&[4, 4, 4], &[2, 3], Seed(3)).to_full();
        let t = tt_compress(&a, Method::Svd, &Truncation::Tol(1e-13), Seed(4)).unwrap();
        assert_eq!(t.ranks(), vec![2, 3]);
        assert!(rel_err(&a, &t) <= 1e-10);
    }

    #[test]
    fn planted_ranks_randomized() {
        let mut ok = 0;
        for trial in 0..100 {
            let a = random_tt(&[4, 4, 4], &[2, 3], Seed(1000 + trial)).to_full();
            let t = tt_compress(&a, Method::Randomized, &Truncation::Ranks(vec![2, 3]), Seed(2000 + trial)).unwrap();
            ok += usize::from(rel_err(&a, &t) <= 1e-8);
        }
        assert!(ok >= 95, "{ok}");
    }

    #[test]
    fn scalar_cores_multiply() {
        let cores = [2.0, -3.0, 0.5].iter().map(|&v| TtCore::new(1, 1, 1, vec![v]).unwrap()).collect();
        let t = TTDecomposition::new(cores).unwrap();
        assert_eq!(t.eval(&[0, 0, 0]), -3.0);
        assert_eq!(t.to_full().data(), &[-3.0]);
    }

    #[test]
    fn rank_mismatch_rejected() {
        let a = TtCore::new(1, 2, 2, vec![0.0; 4]).unwrap();
        let b = TtCore::new(3, 2, 1, vec![0.0; 6]).unwrap();
        assert!(TTDecomposition::new(vec![a, b]).is_err());
        assert!(TtCore::new(1, 2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn lossless_round_trip() {
        let mut rng = Rng::new(Seed(5));
        let a = DenseTensor::new(vec![3, 2, 4, 2], rng.gaussian_vec(48)).unwrap();
        let t = tt_compress(&a, Method::Svd, &Truncation::Tol(0.0), Seed(6)).unwrap();
        assert!(a.sub(&t.to_full()).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn error_bound_from_unfolding_tails() {
        let mut rng = Rng::new(Seed(7));
        let a = DenseTensor::new(vec![3, 3, 3, 3], rng.gaussian_vec(81)).unwrap();
        let ranks = vec![2, 2, 2];
        let tails = unfolding_tails(&a, &ranks).unwrap();
        let bound: f64 = tails.iter().map(|t| t * t).sum();
        let t = tt_compress(&a, Method::Svd, &Truncation::Ranks(ranks.clone()), Seed(8)).unwrap();
        assert_eq!(t.ranks(), ranks);
        let err = a.sub(&t.to_full()).unwrap().fro().powi(2);
        assert!(err <= bound * (1.0 + 1e-12), "{err} > {bound}");
        let tr = tt_compress(&a, Method::Randomized, &Truncation::Ranks(ranks), Seed(9)).unwrap();
        assert!(a.sub(&tr.to_full()).unwrap().fro().powi(2) <= 4.0 * bound);
    }

    #[test]
    fn tolerance_mode_meets_target() {
        let mut rng = Rng::new(Seed(10));
        let planted = random_tt(&[5, 6, 5], &[3, 3], Seed(11)).to_full();
        let noise = DenseTensor::new(vec![5, 6, 5], rng.gaussian_vec(150)).unwrap();
        let data = planted.data().iter().zip(noise.data()).map(|(x, y)| x + 1e-6 * y).collect();
        let a = DenseTensor::new(vec![5, 6, 5], data).unwrap();
        for method in [Method::Svd, Method::Randomized] {
            let t = tt_compress(&a, method, &Truncation::Tol(1e-3), Seed(12)).unwrap();
            assert_eq!(t.ranks(), vec![3, 3]);
            assert!(rel_err(&a, &t) <= 1e-3);
        }
    }

    #[test]
    fn error_non_increasing_in_rank() {
        let dims = [4, 5, 4];
        for r1 in 1..4 {
            let mut errs = vec![];
            for r2 in 1..5 {
                let mut v: Vec<f64> = (0..9)
                    .map(|s| {
                        let a = random_tt(&dims, &[3, 4], Seed(50 + s)).to_full();
                        let t = tt_compress(&a, Method::Svd, &Truncation::Ranks(vec![r1, r2]), Seed(s)).unwrap();
                        rel_err(&a, &t)
                    })
                    .collect();
                v.sort_by(f64::total_cmp);
                errs.push(v[4]);
            }
            assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{errs:?}");
        }
    }

    #[test]
    fn text_round_trip() {
        let a = DenseTensor::from_fn(vec![2, 3], |i| i[0] as f64 - 0.5 * i[1] as f64);
        assert_eq!(DenseTensor::parse(&a.to_text()).unwrap(), a);
        let bad = DenseTensor::parse("dims 2 2\n1 2 3 4").unwrap_err();
        assert!(bad.to_string().contains("line 1"));
        let short = DenseTensor::parse("dims: 2 2\n1 2 3\n");
        assert!(short.is_err());
        let junk = DenseTensor::parse("dims: 2\n1\nx\n").unwrap_err();
        assert!(junk.to_string().contains("line 3"));
    }

    #[test]
    fn compress_rejects_bad_input() {
        let a = DenseTensor::new(vec![4], vec![1.0; 4]).unwrap();
        assert!(tt_compress(&a, Method::Svd, &Truncation::Tol(0.1), Seed(0)).is_err());
        let b = DenseTensor::new(vec![2, 2], vec![1.0; 4]).unwrap();
        assert!(tt_compress(&b, Method::Svd, &Truncation::Ranks(vec![1, 1]), Seed(0)).is_err());
        assert!(tt_compress(&b, Method::Svd, &Truncation::Tol(-1.0), Seed(0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn eval_matches_full(d1 in 1usize..4, d2 in 1usize..4, d3 in 1usize..4, r1 in 1usize..3, r2 in 1usize..3, s in 0u64..1000) {
            let t = random_tt(&[d1, d2, d3], &[r1, r2], Seed(s));
            let full = t.to_full();
            for i in 0..d1 {
                for j in 0..d2 {
                    for k in 0..d3 {
                        prop_assert!((full.get(&[i, j, k]) - t.eval(&[i, j, k])).abs() <= 1e-12 * (1.0 + full.fro()));
                    }
                }
            }
        }

        #[test]
        fn unfolding_respects_index_map(d1 in 1usize..4, d2 in 1usize..4, d3 in 1usize..4, s in 0u64..1000) {
            let mut rng = Rng::new(Seed(s));
            let a = DenseTensor::new(vec![d1, d2, d3], rng.gaussian_vec(d1 * d2 * d3)).unwrap();
            let m1 = unfolding(&a, 1).unwrap();
            let m2 = unfolding(&a, 2).unwrap();
            for i in 0..d1 {
                for j in 0..d2 {
                    for k in 0..d3 {
                        prop_assert_eq!(m1[(i, j * d3 + k)], a.get(&[i, j, k]));
                        prop_assert_eq!(m2[(i * d2 + j, k)], a.get(&[i, j, k]));
                    }
                }
            }
        }

        #[test]
        fn svd_sweep_obeys_tail_bound(r1 in 1usize..4, r2 in 1usize..4, s in 0u64..1000) {
            let mut rng = Rng::new(Seed(s));
            let a = DenseTensor::new(vec![3, 4, 3], rng.gaussian_vec(36)).unwrap();
            let ranks = vec![r1, r2];
            let bound: f64 = unfolding_tails(&a, &ranks).unwrap().iter().map(|t| t * t).sum();
            let t = tt_compress(&a, Method::Svd, &Truncation::Ranks(ranks), Seed(s)).unwrap();
            let err = a.sub(&t.to_full()).unwrap().fro().powi(2);
            prop_assert!(err <= bound * (1.0 + 1e-10) + 1e-24);
        }
    }
}
