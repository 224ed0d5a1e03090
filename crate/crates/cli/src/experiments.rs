//! Seeded experiment designs, one per subcommand.

use std::time::Instant;

use num_complex::Complex64;
use randmat::elimination::{self, Multiplier};
use randmat::linalg::{self, Lu, Norm};
use randmat::lowrank::{Family, Outcome};
use randmat::precond;
use randmat::rng::{self, MatrixClass, MatrixClassSpec, Rng};
use randmat::singspaces;
use randmat::solvers::{self, BlockVariant};
use randmat::structured::fft;
use randmat::tt::{self, DenseTensor, Method, TtCore, TTDecomposition, Truncation};
use randmat::{Matrix, Seed};

use crate::error::{CliError, Result};
use crate::io::TAIL_FLOOR;
use crate::stats::{Row, TrialStats};

pub const EXPERIMENTS: [&str; 13] = [
    "condstats",
    "precondstats",
    "genp",
    "svd-tail",
    "svd-head",
    "svd-head-sampling",
    "blocktri",
    "blocktri-dual",
    "blocktri-sampling",
    "smw-solve",
    "toeplitz-aug",
    "appendixB",
    "tt-demo",
];

/// Floor of the planted spectra in the singular-space experiments.
pub const SPACE_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Params {
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    pub q: Vec<usize>,
    pub class: Option<String>,
    pub family: Option<String>,
    pub method: Option<String>,
    pub refine: Option<usize>,
    pub tol: Option<f64>,
    /// Grid size for the nonsingularity experiment.
    pub delta: Option<u64>,
    pub trials: usize,
    pub seed: Seed,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            n: vec![],
            r: vec![],
            q: vec![],
            class: None,
            family: None,
            method: None,
            refine: None,
            tol: None,
            delta: None,
            trials: 100,
            seed: Seed(2024),
        }
    }
}

impl Params {
    fn ns(&self, default: &[usize]) -> Vec<usize> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }

    fn rs(&self, default: &[usize]) -> Vec<usize> {
        if self.r.is_empty() {
            default.to_vec()
        } else {
            self.r.clone()
        }
    }

    fn qs(&self, default: &[usize]) -> Vec<usize> {
        if self.q.is_empty() {
            default.to_vec()
        } else {
            self.q.clone()
        }
    }

    /// `--r` for nullity-driven designs, falling back to `--q`.
    fn ks(&self, default: &[usize]) -> Vec<usize> {
        if self.r.is_empty() {
            self.qs(default)
        } else {
            self.r.clone()
        }
    }

    fn families(&self, default: &[&str]) -> Vec<String> {
        match &self.family {
            Some(f) => f.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            None => default.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn trial_seed(&self, key: &[u64], t: usize) -> Seed {
        key.iter().fold(self.seed, |s, &k| s.stream(k)).derive(t as u64)
    }
}

/// Per-trial values of one metric for one parameter combination.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub r_or_q: usize,
    pub metric: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn row(&self, seed: Seed) -> Row {
        Row {
            experiment: self.experiment.clone(),
            family: self.family.clone(),
            n: self.n,
            r_or_q: self.r_or_q,
            stats: TrialStats::from_values(self.metric.clone(), &self.values, seed),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn median(&self) -> f64 {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        match v.len() {
            0 => f64::NAN,
            k if k % 2 == 1 => v[k / 2],
            k => 0.5 * (v[k / 2 - 1] + v[k / 2]),
        }
    }

    pub fn fraction(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.values.iter().filter(|&&v| pred(v)).count() as f64 / self.values.len() as f64
    }
}

/// Collects named metrics for one parameter combination.
struct Batch {
    experiment: &'static str,
    family: String,
    n: usize,
    k: usize,
    metrics: Vec<(String, Vec<f64>)>,
}

impl Batch {
    fn new(experiment: &'static str, family: &str, n: usize, k: usize) -> Self {
        Batch { experiment, family: family.to_string(), n, k, metrics: vec![] }
    }

    fn push(&mut self, metric: &str, v: f64) {
        match self.metrics.iter_mut().find(|(m, _)| m == metric) {
            Some((_, vals)) => vals.push(v),
            None => self.metrics.push((metric.to_string(), vec![v])),
        }
    }

    fn finish(self, out: &mut Vec<Series>) {
        for (metric, values) in self.metrics {
            out.push(Series {
                experiment: self.experiment.to_string(),
                family: self.family.clone(),
                n: self.n,
                r_or_q: self.k,
                metric,
                values,
            });
        }
    }
}

pub fn run_experiment(name: &str, p: &Params) -> Result<Vec<Row>> {
    Ok(run_series(name, p)?.iter().map(|s| s.row(p.seed)).collect())
}

pub fn run_series(name: &str, p: &Params) -> Result<Vec<Series>> {
    if p.trials == 0 {
        return Err(CliError::Invalid("trials must be positive".into()));
    }
    if p.n.contains(&0) {
        return Err(CliError::Invalid("dimensions must be positive".into()));
    }
    match name {
        "condstats" => condstats(p),
        "precondstats" => precondstats(p),
        "genp" => genp(p),
        "svd-tail" => svd_tail(p),
        "svd-head" => svd_head(p, false),
        "svd-head-sampling" => svd_head(p, true),
        "blocktri" => blocktri(p, "blocktri", None),
        "blocktri-dual" => blocktri(p, "blocktri-dual", Some(BlockVariant::Dual)),
        "blocktri-sampling" => blocktri(p, "blocktri-sampling", Some(BlockVariant::Sampling)),
        "smw-solve" => smw_solve(p),
        "toeplitz-aug" => toeplitz_aug(p),
        "appendixB" => appendix_b(p),
        "tt-demo" => tt_demo(p),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

fn check_k(n: usize, k: usize, what: &str) -> Result<()> {
    if k == 0 || k >= n {
        return Err(CliError::Invalid(format!("{what} {k} must lie in 1..{n}")));
    }
    Ok(())
}

fn family_code(f: &str) -> u64 {
    f.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Norms of `A` and `A^{-1}`, dense.
struct Norms {
    sigma_max: f64,
    sigma_min: f64,
    one: f64,
    inv_one: f64,
}

fn dense_norms(a: &Matrix) -> Result<Norms> {
    let s = linalg::singular_values(a);
    let inv = Lu::factor(a)?.inverse();
    Ok(Norms { sigma_max: s[0], sigma_min: *s.last().unwrap(), one: a.norm(Norm::One), inv_one: inv.norm(Norm::One) })
}

/// Power-of-two sizes only. A circulant is normal, so its singular values are the moduli of the DFT of
/// its first column and its inverse is the circulant with column
/// `ifft(1 / fft(c))`.
fn circulant_norms(col: &[f64]) -> Norms {
    let z: Vec<Complex64> = col.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let spec = fft::fft(&z);
    let moduli: Vec<f64> = spec.iter().map(|c| c.norm()).collect();
    let inv_spec: Vec<Complex64> = spec.iter().map(|c| c.inv()).collect();
    let inv_col = fft::ifft(&inv_spec);
    Norms {
        sigma_max: moduli.iter().cloned().fold(0.0, f64::max),
        sigma_min: moduli.iter().cloned().fold(f64::INFINITY, f64::min),
        one: col.iter().map(|x| x.abs()).sum(),
        inv_one: inv_col.iter().map(|c| c.re.abs()).sum(),
    }
}

fn condstats(p: &Params) -> Result<Vec<Series>> {
    let mut out = vec![];
    for fam in p.families(&["gauss", "toeplitz", "circulant"]) {
        for n in p.ns(&[256]) {
            let mut batch = Batch::new("condstats", &fam, n, 0);
            for t in 0..p.trials {
                let seed = p.trial_seed(&[1, family_code(&fam), n as u64], t);
                let nm = match fam.as_str() {
                    "gauss" => dense_norms(&rng::gaussian(n, n, seed))?,
                    "toeplitz" => dense_norms(&rng::gaussian_toeplitz(n, n, 0.0, 1.0, seed).to_dense())?,
                    "circulant" => {
                        let c = rng::gaussian_circulant(n, 1.0, 0.0, 1.0, seed);
                        if n.is_power_of_two() {
                            circulant_norms(c.first_col())
                        } else {
                            dense_norms(&c.to_dense())?
                        }
                    }
                    other => return Err(CliError::Invalid(format!("condstats family {other:?}: expected gauss, toeplitz or circulant"))),
                };
                batch.push("kappa", nm.sigma_max / nm.sigma_min);
                batch.push("kappa1", nm.one * nm.inv_one);
                batch.push("norm1", nm.one);
                batch.push("norm2", nm.sigma_max);
                batch.push("norm_ratio", nm.one / nm.sigma_max);
                batch.push("inv_norm1", nm.inv_one);
                batch.push("inv_norm2", 1.0 / nm.sigma_min);
                batch.push("inv_norm_ratio", nm.inv_one * nm.sigma_min);
            }
            batch.finish(&mut out);
        }
    }
    Ok(out)
}

fn precond_class(name: &str, r: usize) -> Result<MatrixClass> {
    Ok(match name {
        "1n" => MatrixClass::Class1n { r },
        "1s" => MatrixClass::Class1s { r },
        "2n" => MatrixClass::Class2n { r },
        "2s" => MatrixClass::Class2s { r },
        "3n" => MatrixClass::Class3n { r },
        "3s" => MatrixClass::Class3s { r },
        "4n" => MatrixClass::Class4n,
        "4s" => MatrixClass::Class4s,
        other => return Err(CliError::Invalid(format!("unknown preconditioning class {other:?}"))),
    })
}

/// `U = V` block-sign of width `r`, scaled so `||U V^T|| = ||A||`.
fn precondstats(p: &Params) -> Result<Vec<Series>> {
    let mut out = vec![];
    let classes = p.class.clone().unwrap_or_else(|| "1n".into());
    for class in classes.split(',').map(str::trim) {
        for n in p.ns(&[100]) {
            let default_r: &[usize] = if class.starts_with('4') { &[1] } else { &[1, 2, 4, 8] };
            for r in p.rs(default_r) {
                check_k(n, r, "r")?;
                let mut batch = Batch::new("precondstats", class, n, r);
                for t in 0..p.trials {
                    let seed = p.trial_seed(&[2, family_code(class), n as u64, r as u64], t);
                    let a = rng::test_matrix(&MatrixClassSpec::square(precond_class(class, r)?, n), seed)?;
                    let u = rng::block_sign(n, r, seed.stream(5));
                    let (u, v) = precond::balance(&a, &u, &u);
                    let prep = precond::additive_preprocess(&a, &u, &v, true)?;
                    batch.push("kappa_a", linalg::cond2(&a));
                    batch.push("kappa_c", linalg::cond2(&prep.c));
                }
                batch.finish(&mut out);
            }
        }
    }
    Ok(out)
}

fn rhs(n: usize, seed: Seed) -> Vec<f64> {
    Rng::new(seed.stream(99)).gaussian_vec(n)
}

/// Unpivoted elimination; a pivot breakdown is counted, not averaged in.
fn plain_genp(batch: &mut Batch, metric: &str, breakdowns: &str, a: &Matrix, b: &[f64]) {
    if let Ok(y) = elimination::genp_solve(a, b) {
        let r = elimination::relative_residual(a, &y, b);
        if r.is_finite() {
            batch.push(metric, r);
            batch.push(breakdowns, 0.0);
            return;
        }
    }
    batch.push(breakdowns, 1.0);
}

fn genp(p: &Params) -> Result<Vec<Series>> {
    let method = p.method.clone().unwrap_or_else(|| "sign_circulant".into());
    let mult = Multiplier::parse(&method).ok_or_else(|| CliError::Invalid(format!("unknown multiplier {method:?}")))?;
    let refine = p.refine.unwrap_or(1);
    let mut out = vec![];
    for n in p.ns(&[64, 256]) {
        let mut batch = Batch::new("genp", &method, n, 0);
        for t in 0..p.trials {
            let seed = p.trial_seed(&[3, n as u64], t);
            let a = rng::test_matrix(&MatrixClassSpec::square(MatrixClass::IllLeadingBlock, n), seed)?;
            let b = rhs(n, seed);
            plain_genp(&mut batch, "residual_plain", "plain_breakdowns", &a, &b);
            match elimination::randomized_genp_solve(&a, &b, mult, refine, seed.stream(7)) {
                Ok(s) => {
                    for (k, r) in s.residuals.iter().enumerate() {
                        batch.push(&format!("residual_refine{k}"), *r);
                    }
                    batch.push("failures", 0.0);
                }
                Err(_) => batch.push("failures", 1.0),
            }
        }
        batch.finish(&mut out);
    }
    Ok(out)
}

/// `A = S diag(sigma) T^T` with the orthogonal factors kept for reference.
fn planted(n: usize, sigma: &[f64], seed: Seed) -> (Matrix, Matrix) {
    let s = rng::random_orthogonal(n, seed.stream(11));
    let t = rng::random_orthogonal(n, seed.stream(12));
    (rng::compose_svd(&s, sigma, &t), t)
}

/// Residual test `||A B|| <= tau ||A|| ||B||` for the trailing bases; sits
/// between the floor and the smallest leading value of the family.
pub const TRAILING_TOL: f64 = 1e-6;

fn svd_tail(p: &Params) -> Result<Vec<Series>> {
    let tau = p.tol.unwrap_or(TRAILING_TOL);
    let mut out = vec![];
    for n in p.ns(&[64]) {
        for r in p.ks(&[1, 8, 32]) {
            check_k(n, r, "r")?;
            let mut batch = Batch::new("svd-tail", "additive", n, r);
            for t in 0..p.trials {
                let seed = p.trial_seed(&[4, n as u64, r as u64], t);
                let (a, tt) = planted(n, &rng::head_profile(n, n - r, SPACE_FLOOR), seed);
                let target = tt.cols_range(n - r, r);
                match singspaces::trailing_basis_additive(&a, r, tau, seed.stream(13))? {
                    Outcome::Success(tr) => {
                        let q = linalg::qr_q(&tr.b)?;
                        batch.push("kappa_c", tr.kappa);
                        batch.push("rn1", singspaces::alignment_error(&tr.b, &target)?);
                        batch.push("rn2", a.matmul(&q).norm(Norm::Two));
                        batch.push("failures", 0.0);
                    }
                    Outcome::Failure(_) => batch.push("failures", 1.0),
                }
            }
            batch.finish(&mut out);
        }
    }
    Ok(out)
}

fn svd_head(p: &Params, sampling: bool) -> Result<Vec<Series>> {
    let (experiment, default_fams): (&'static str, &[&str]) =
        if sampling { ("svd-head-sampling", &["gaussian", "toeplitz"]) } else { ("svd-head", &["dual"]) };
    let mut out = vec![];
    for fam in p.families(default_fams) {
        let family = match (sampling, fam.as_str()) {
            (false, "dual") => None,
            (true, "gaussian") => Some(Family::Gaussian),
            (true, "toeplitz") => Some(Family::GaussianToeplitz),
            (_, other) => return Err(CliError::Invalid(format!("{experiment}: unknown family {other:?}"))),
        };
        for n in p.ns(&[64]) {
            for q in p.qs(&[1, 8, 32]) {
                check_k(n, q, "q")?;
                let mut batch = Batch::new(experiment, &fam, n, q);
                for t in 0..p.trials {
                    let seed = p.trial_seed(&[5, family_code(&fam), n as u64, q as u64], t);
                    let (a, tt) = planted(n, &rng::head_profile(n, q, SPACE_FLOOR), seed);
                    let b = match family {
                        None => singspaces::leading_basis_dual(&a, q, seed.stream(14))?,
                        Some(f) => singspaces::leading_basis_sampling(&a, q, f, seed.stream(14)),
                    };
                    let qb = linalg::qr_q(&b)?;
                    batch.push("rn1", singspaces::alignment_error(&b, &tt.cols_range(0, q))?);
                    batch.push("rn2", (&a - &a.matmul(&qb).matmul(&qb.transpose())).norm(Norm::Two));
                }
                batch.finish(&mut out);
            }
        }
    }
    Ok(out)
}

/// Planted `1/j` spectra: `tail` has `k` trailing values at the floor, `head`
/// keeps only `k` leading values above it.
fn solve_family(fam: &str, n: usize, k: usize, seed: Seed) -> Result<(Matrix, usize)> {
    check_k(n, k, "r_or_q")?;
    match fam {
        "tail" => Ok((rng::planted_svd(&rng::head_profile(n, n - k, TAIL_FLOOR), false, seed), n - k)),
        "head" => Ok((rng::planted_svd(&rng::head_profile(n, k, TAIL_FLOOR), false, seed), k)),
        other => Err(CliError::Invalid(format!("unknown solve family {other:?}: expected tail or head"))),
    }
}

fn blocktri(p: &Params, experiment: &'static str, fixed: Option<BlockVariant>) -> Result<Vec<Series>> {
    let variant = match fixed {
        Some(v) => v,
        None => {
            let m = p.method.clone().unwrap_or_else(|| "orthogonal".into());
            BlockVariant::parse(&m).ok_or_else(|| CliError::Invalid(format!("unknown block variant {m:?}")))?
        }
    };
    let mut out = vec![];
    for fam in p.families(&["tail"]) {
        for n in p.ns(&[32]) {
            for k in p.ks(&[1, 2, 4]) {
                let mut batch = Batch::new(experiment, &fam, n, k);
                for t in 0..p.trials {
                    let seed = p.trial_seed(&[6, family_code(&fam), n as u64, k as u64], t);
                    let (a, q) = solve_family(&fam, n, k, seed)?;
                    let b = rhs(n, seed);
                    let got = match solvers::block_triangulate(&a, q, variant, seed.stream(15))? {
                        Outcome::Success(bt) => solvers::solve_blocktri(&bt, &a, &b).ok().map(|y| (bt.dominance(), y)),
                        Outcome::Failure(_) => None,
                    };
                    match got {
                        Some((dom, y)) => {
                            batch.push("residual", solvers::relative_residual_ext(&a, &y, &b));
                            batch.push("dominance", dom);
                            batch.push("failures", 0.0);
                        }
                        None => batch.push("failures", 1.0),
                    }
                    plain_genp(&mut batch, "residual_ge", "ge_breakdowns", &a, &b);
                    batch.push("residual_lu", elimination::relative_residual(&a, &linalg::solve(&a, &b)?, &b));
                }
                batch.finish(&mut out);
            }
        }
    }
    Ok(out)
}

fn smw_solve(p: &Params) -> Result<Vec<Series>> {
    let mut out = vec![];
    for n in p.ns(&[64]) {
        for r in p.ks(&[1, 2, 4]) {
            let mut batch = Batch::new("smw-solve", "tail", n, r);
            for t in 0..p.trials {
                let seed = p.trial_seed(&[7, n as u64, r as u64], t);
                let (a, _) = solve_family("tail", n, r, seed)?;
                let b = rhs(n, seed);
                match solvers::solve_smw_refined(&a, &b, r, seed.stream(16)) {
                    Ok(s) => {
                        batch.push("residual", s.residual);
                        batch.push("kappa_c", s.kappa_c);
                        batch.push("failures", 0.0);
                    }
                    Err(_) => batch.push("failures", 1.0),
                }
            }
            batch.finish(&mut out);
        }
    }
    Ok(out)
}

pub const TOEPLITZ_SHIFT: f64 = 1e-9;

fn toeplitz_aug(p: &Params) -> Result<Vec<Series>> {
    let shift = p.tol.unwrap_or(TOEPLITZ_SHIFT);
    let mut out = vec![];
    for n in p.ns(&[512, 1024]) {
        let mut batch = Batch::new("toeplitz-aug", "shifted-singular", n, 0);
        for t in 0..p.trials {
            let seed = p.trial_seed(&[8, n as u64], t);
            let tm = rng::shifted_singular_toeplitz(n, shift, seed)?;
            let b = rhs(n, seed);
            let start = Instant::now();
            let got = solvers::toeplitz_solve_aug(&tm, &b, seed.stream(17));
            let secs = start.elapsed().as_secs_f64();
            match got {
                Ok(s) => {
                    batch.push("residual", s.residual);
                    batch.push("seconds", secs);
                    batch.push("failures", 0.0);
                }
                Err(_) => batch.push("failures", 1.0),
            }
        }
        batch.finish(&mut out);
    }
    Ok(out)
}

const PRIMES: [u64; 2] = [1_000_000_007, 998_244_353];

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Rank of a square integer matrix modulo a prime below `2^32`.
pub fn rank_mod(m: &[u64], n: usize, p: u64) -> usize {
    let mut a: Vec<u64> = m.iter().map(|v| v % p).collect();
    let mut rank = 0;
    for c in 0..n {
        let Some(piv) = (rank..n).find(|&r| a[r * n + c] != 0) else { continue };
        for j in 0..n {
            a.swap(piv * n + j, rank * n + j);
        }
        let inv = pow_mod(a[rank * n + c], p - 2, p);
        for r in rank + 1..n {
            let f = a[r * n + c] * inv % p;
            if f == 0 {
                continue;
            }
            for j in c..n {
                a[r * n + j] = (a[r * n + j] + p - f * a[rank * n + j] % p) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// A nonzero rank modulo any prime certifies exact nonsingularity; a
/// singular verdict needs every prime to agree.
pub fn exactly_nonsingular(m: &[u64], n: usize) -> bool {
    PRIMES.iter().any(|&p| rank_mod(m, n, p) == n)
}

fn appendix_b(p: &Params) -> Result<Vec<Series>> {
    let delta = p.delta.unwrap_or(1_000_000);
    if delta < 2 {
        return Err(CliError::Invalid("grid size must be at least 2".into()));
    }
    let mut out = vec![];
    for k in p.ns(&[16]) {
        let mut batch = Batch::new("appendixB", "uniform-grid", k, delta.min(usize::MAX as u64) as usize);
        for t in 0..p.trials {
            let mut rng = Rng::new(p.trial_seed(&[9, k as u64, delta], t));
            let m: Vec<u64> = (0..k * k).map(|_| rng.below(delta)).collect();
            batch.push("nonsingular", f64::from(u8::from(exactly_nonsingular(&m, k))));
        }
        batch.push("bound", 1.0 - k as f64 / delta as f64);
        batch.finish(&mut out);
    }
    Ok(out)
}

fn random_tt(dims: &[usize], ranks: &[usize], seed: Seed) -> Result<TTDecomposition> {
    let mut rng = Rng::new(seed);
    let mut full = vec![1];
    full.extend_from_slice(ranks);
    full.push(1);
    let cores = dims
        .iter()
        .enumerate()
        .map(|(k, &n)| TtCore::new(full[k], n, full[k + 1], rng.gaussian_vec(full[k] * n * full[k + 1])))
        .collect::<randmat::Result<Vec<_>>>()?;
    Ok(TTDecomposition::new(cores)?)
}

/// Planted TT tensor plus relative Gaussian noise `--tol`, compressed back to
/// the planted ranks.
fn tt_demo(p: &Params) -> Result<Vec<Series>> {
    let dims = p.ns(&[6, 6, 6, 6]);
    if dims.len() < 2 {
        return Err(CliError::Invalid("tt-demo needs at least two dimensions".into()));
    }
    let ranks = p.rs(&vec![3; dims.len() - 1]);
    if ranks.len() != dims.len() - 1 {
        return Err(CliError::Invalid(format!("{} dimensions need {} ranks", dims.len(), dims.len() - 1)));
    }
    let noise = p.tol.unwrap_or(1e-6);
    let mut out = vec![];
    for name in p.method.clone().unwrap_or_else(|| "svd,randomized".into()).split(',') {
        let method = Method::parse(name.trim()).ok_or_else(|| CliError::Invalid(format!("unknown TT method {name:?}")))?;
        let mut batch = Batch::new("tt-demo", name.trim(), dims.iter().product(), ranks.iter().copied().max().unwrap_or(0));
        for t in 0..p.trials {
            let seed = p.trial_seed(&[10, family_code(name)], t);
            let clean = random_tt(&dims, &ranks, seed.stream(1))?.to_full();
            let mut rng = Rng::new(seed.stream(2));
            let scale = noise * clean.fro() / (clean.data().len() as f64).sqrt();
            let data = clean.data().iter().map(|x| x + scale * rng.gaussian()).collect();
            let a = DenseTensor::new(dims.clone(), data)?;
            let got = tt::tt_compress(&a, method, &Truncation::Ranks(ranks.clone()), seed.stream(3))?;
            let err = a.sub(&got.to_full())?.fro();
            let bound: f64 = tt::unfolding_tails(&a, &ranks)?.iter().map(|x| x * x).sum();
            batch.push("rel_error", err / a.fro());
            batch.push("bound_ratio", if bound > 0.0 { err * err / bound } else { 0.0 });
            batch.push("storage_ratio", got.storage() as f64 / a.data().len() as f64);
        }
        batch.finish(&mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> Params {
        Params { trials, seed: Seed(5), ..Params::default() }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(run_experiment("table99", &small(1)), Err(CliError::UnknownExperiment(_))));
    }

    #[test]
    fn circulant_norms_match_dense() {
        let c = rng::gaussian_circulant(16, 1.0, 0.0, 1.0, Seed(3));
        let fast = circulant_norms(c.first_col());
        let dense = dense_norms(&c.to_dense()).unwrap();
        for (x, y) in [(fast.sigma_max, dense.sigma_max), (fast.sigma_min, dense.sigma_min), (fast.one, dense.one), (fast.inv_one, dense.inv_one)] {
            assert!((x - y).abs() <= 1e-9 * y, "{x} vs {y}");
        }
    }

    #[test]
    fn deterministic_rows() {
        let p = Params { n: vec![12], ..small(3) };
        let a = run_experiment("condstats", &p).unwrap();
        let b = run_experiment("condstats", &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3 * 8);
        assert!(a.iter().all(|r| r.stats.min <= r.stats.mean && r.stats.mean <= r.stats.max));
    }

    #[test]
    fn modular_rank_small() {
        assert_eq!(rank_mod(&[1, 2, 2, 4], 2, PRIMES[0]), 1);
        assert_eq!(rank_mod(&[0, 1, 1, 0], 2, PRIMES[0]), 2);
        assert!(!exactly_nonsingular(&[3, 6, 1, 2], 2));
        assert!(exactly_nonsingular(&[PRIMES[0], 1, 1, 0], 2));
    }

    #[test]
    fn appendix_b_frequency() {
        let p = Params { n: vec![4], delta: Some(5), ..small(400) };
        let s = run_series("appendixB", &p).unwrap();
        let freq = s.iter().find(|s| s.metric == "nonsingular").unwrap().mean();
        assert!(freq >= 1.0 - 4.0 / 5.0 && freq < 1.0, "{freq}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = Params { n: vec![8], r: vec![8], ..small(1) };
        assert!(run_experiment("precondstats", &p).is_err());
        let p = Params { family: Some("hilbert".into()), ..small(1) };
        assert!(run_experiment("condstats", &p).is_err());
        assert!(run_experiment("genp", &Params { trials: 0, ..small(1) }).is_err());
    }

    #[test]
    fn small_designs_run() {
        let p = Params { n: vec![16], r: vec![2], q: vec![2], ..small(2) };
        for name in ["precondstats", "genp", "svd-tail", "svd-head", "svd-head-sampling", "blocktri", "blocktri-dual", "blocktri-sampling", "smw-solve"] {
            let rows = run_experiment(name, &p).unwrap();
            assert!(!rows.is_empty(), "{name}");
        }
        let pt = Params { n: vec![32], ..small(2) };
        let rows = run_experiment("toeplitz-aug", &pt).unwrap();
        assert!(rows.iter().any(|r| r.stats.label == "residual"));
        let tt = Params { n: vec![3, 4, 3], r: vec![2, 2], ..small(2) };
        let rows = run_experiment("tt-demo", &tt).unwrap();
        assert_eq!(rows.len(), 6);
    }
}
