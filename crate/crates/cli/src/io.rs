//! Matrix files and file-level solves.

use std::fs;
use std::path::Path;

use randmat::elimination::{self, Multiplier};
use randmat::lowrank::Outcome;
use randmat::rng::{self, MatrixClass, MatrixClassSpec};
use randmat::solvers::{self, BlockVariant};
use randmat::structured::Toeplitz;
use randmat::xprec::{round_vec, ExtScalar};
use randmat::{linalg, Matrix, Seed};

use crate::error::{CliError, Result};

pub const TAIL_FLOOR: f64 = 1e-17;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Header `rows cols`, then row-major values.
pub fn parse_matrix(text: &str, path: &str) -> Result<Matrix> {
    let err = |line: usize, msg: String| CliError::Parse { path: path.to_string(), line, msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|e| err(hl + 1, format!("bad dimension {s:?}: {e}")));
    let (rows, cols) = match dims.as_slice() {
        [r, c] => (parse_dim(r)?, parse_dim(c)?),
        _ => return Err(err(hl + 1, format!("expected header 'rows cols', got {header:?}"))),
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut last = hl + 1;
    for (ln, line) in lines {
        last = ln + 1;
        for tok in line.split_whitespace() {
            let v = tok.parse::<f64>().map_err(|e| err(ln + 1, format!("bad value {tok:?}: {e}")))?;
            data.push(v);
        }
    }
    if data.len() != rows * cols {
        return Err(err(last, format!("expected {} values for {rows}x{cols}, found {}", rows * cols, data.len())));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn format_matrix(a: &Matrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix(&read_text(path)?, &path.display().to_string())
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    write_text(path, &format_matrix(a))
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(CliError::Invalid(format!("{}: vector files hold one column, found {}", path.display(), m.cols())));
    }
    Ok(m.into_data())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMethod {
    Smw,
    Dual,
    Blocktri(BlockVariant),
    Genp(Multiplier),
    Lu,
    ToeplitzAug,
}

impl SolveMethod {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "smw" => SolveMethod::Smw,
            "dual" => SolveMethod::Dual,
            "lu" => SolveMethod::Lu,
            "toeplitz-aug" => SolveMethod::ToeplitzAug,
            "blocktri" => SolveMethod::Blocktri(BlockVariant::Orthogonal),
            _ => {
                if let Some(v) = s.strip_prefix("blocktri-").and_then(BlockVariant::parse) {
                    SolveMethod::Blocktri(v)
                } else if let Some(m) = s.strip_prefix("genp").map(|t| t.trim_start_matches('-')) {
                    SolveMethod::Genp(if m.is_empty() { Multiplier::SignCirculant } else { Multiplier::parse(m).ok_or_else(|| CliError::Invalid(format!("unknown multiplier {m:?}")))? })
                } else {
                    return Err(CliError::Invalid(format!("unknown method {s:?}")));
                }
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub method: SolveMethod,
    /// Nullity for the additive methods; estimated when absent.
    pub r: Option<usize>,
    /// Numerical rank for the dual methods; estimated when absent.
    pub q: Option<usize>,
    pub refine: usize,
    pub seed: Seed,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: String,
    pub n: usize,
    pub rank_param: Option<usize>,
    pub y: Vec<f64>,
    /// Residual of the solution as computed, extended precision where the solver keeps it.
    pub residual: f64,
    /// Residual of the rounded solution that is written out.
    pub residual_rounded: f64,
}

impl SolveReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("method: {}\nn: {}\n", self.method, self.n);
        if let Some(k) = self.rank_param {
            s.push_str(&format!("rank_param: {k}\n"));
        }
        s.push_str(&format!("relative_residual: {:e}\nrelative_residual_rounded: {:e}\n", self.residual, self.residual_rounded));
        s
    }
}

fn numerical_nullity(a: &Matrix) -> usize {
    let tol = linalg::default_rank_tol(a.rows(), a.cols());
    a.cols() - linalg::numerical_rank(a, tol)
}

fn as_symmetric_toeplitz(a: &Matrix) -> Option<Toeplitz> {
    let n = a.rows();
    let col = a.col(0);
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)] != col[i.abs_diff(j)] {
                return None;
            }
        }
    }
    Some(Toeplitz::symmetric(&col))
}

fn outcome<T>(o: Outcome<T>) -> Result<T> {
    match o {
        Outcome::Success(t) => Ok(t),
        Outcome::Failure(f) => Err(CliError::Failure { stage: f.stage.to_string(), detail: f.detail }),
    }
}

pub fn solve_system(a: &Matrix, b: &[f64], opts: &SolveOptions) -> Result<SolveReport> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(CliError::Invalid(format!("matrix {}x{} and right-hand side of length {}", a.rows(), a.cols(), b.len())));
    }
    let ext = |y: Vec<ExtScalar>, name: &str, k: Option<usize>| SolveReport {
        method: name.to_string(),
        n,
        rank_param: k,
        residual: solvers::relative_residual_ext(a, &y, b),
        residual_rounded: elimination::relative_residual(a, &round_vec(&y), b),
        y: round_vec(&y),
    };
    let plain = |y: Vec<f64>, name: &str| {
        let r = elimination::relative_residual(a, &y, b);
        SolveReport { method: name.to_string(), n, rank_param: None, residual: r, residual_rounded: r, y }
    };
    Ok(match opts.method {
        SolveMethod::Smw => {
            let r = opts.r.unwrap_or_else(|| numerical_nullity(a));
            let s = solvers::solve_smw_refined(a, b, r, opts.seed)?;
            ext(s.y, "smw", Some(r))
        }
        SolveMethod::Dual => {
            let q = opts.q.unwrap_or_else(|| n - numerical_nullity(a));
            ext(solvers::solve_dual(a, b, q, opts.seed)?, "dual", Some(q))
        }
        SolveMethod::Blocktri(v) => {
            let q = opts.q.or(opts.r.map(|r| n - r)).unwrap_or_else(|| n - numerical_nullity(a));
            let bt = outcome(solvers::block_triangulate(a, q, v, opts.seed)?)?;
            ext(solvers::solve_blocktri(&bt, a, b)?, &format!("blocktri-{v:?}").to_lowercase(), Some(q))
        }
        SolveMethod::Genp(m) => {
            let s = elimination::randomized_genp_solve(a, b, m, opts.refine, opts.seed)?;
            plain(s.y, "genp")
        }
        SolveMethod::Lu => plain(linalg::solve(a, b)?, "lu"),
        SolveMethod::ToeplitzAug => {
            let t = as_symmetric_toeplitz(a).ok_or_else(|| CliError::Invalid("toeplitz-aug needs a symmetric Toeplitz matrix".into()))?;
            ext(solvers::toeplitz_solve_aug(&t, b, opts.seed)?.y, "toeplitz-aug", None)
        }
    })
}

/// Reads `A` and `b`, solves, writes the rounded solution to `out` and the
/// report to `out` with a `.report` suffix.
pub fn solve_file(matrix: &Path, rhs: &Path, out: &Path, opts: &SolveOptions) -> Result<SolveReport> {
    let a = read_matrix(matrix)?;
    let b = read_vector(rhs)?;
    let report = solve_system(&a, &b, opts)?;
    write_matrix(out, &Matrix::column(&report.y))?;
    let mut rp = out.as_os_str().to_owned();
    rp.push(".report");
    write_text(Path::new(&rp), &report.to_text())?;
    Ok(report)
}

/// Test matrix by name. `tail` and `head` are planted SVD families with
/// `sigma_j = 1/j` on the large part and `1e-17` on the rest; `k` is the
/// count of small (tail) or large (head) values.
pub fn generate_matrix(class: &str, n: usize, k: usize, seed: Seed) -> Result<Matrix> {
    let spec = |c| MatrixClassSpec::square(c, n);
    let need = |what: &str| {
        if k == 0 || k >= n {
            Err(CliError::Invalid(format!("{what} count {k} must lie in 1..{n}")))
        } else {
            Ok(())
        }
    };
    let class = match class {
        "tail" => {
            need("tail")?;
            return Ok(rng::planted_svd(&rng::head_profile(n, n - k, TAIL_FLOOR), false, seed));
        }
        "head" => {
            need("head")?;
            return Ok(rng::planted_svd(&rng::head_profile(n, k, TAIL_FLOOR), false, seed));
        }
        "gauss" => MatrixClass::Gauss,
        "toeplitz" => MatrixClass::GaussToeplitz,
        "circulant" => MatrixClass::GaussCirculant { f: 1.0 },
        "sign-circulant" => MatrixClass::SignCirculant,
        "orthogonal" => MatrixClass::Orthogonal,
        "ill-leading" => MatrixClass::IllLeadingBlock,
        "shifted-toeplitz" => MatrixClass::ShiftedSingularToeplitz { shift: 1e-9 },
        "1n" => MatrixClass::Class1n { r: k },
        "1s" => MatrixClass::Class1s { r: k },
        "2n" => MatrixClass::Class2n { r: k },
        "2s" => MatrixClass::Class2s { r: k },
        "3n" => MatrixClass::Class3n { r: k },
        "3s" => MatrixClass::Class3s { r: k },
        "4n" => MatrixClass::Class4n,
        "4s" => MatrixClass::Class4s,
        other => return Err(CliError::Invalid(format!("unknown matrix class {other:?}"))),
    };
    Ok(rng::test_matrix(&spec(class), seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(method: SolveMethod) -> SolveOptions {
        SolveOptions { method, r: None, q: None, refine: 1, seed: Seed(3) }
    }

    #[test]
    fn matrix_text_round_trip() {
        let a = Matrix::from_vec(2, 3, vec![1.0, -2.5, 3e-17, 0.1, 1e300, -0.0]);
        assert_eq!(parse_matrix(&format_matrix(&a), "m").unwrap(), a);
    }

    #[test]
    fn malformed_header_names_line() {
        let e = parse_matrix("\n2 x\n1 2\n3 4\n", "bad.txt").unwrap_err();
        assert_eq!(e.to_string(), "bad.txt:2: bad dimension \"x\": invalid digit found in string");
        let e = parse_matrix("2 2 2\n", "bad.txt").unwrap_err();
        assert!(e.to_string().starts_with("bad.txt:1:"));
        let e = parse_matrix("2 2\n1 2\n3 q\n", "bad.txt").unwrap_err();
        assert!(e.to_string().starts_with("bad.txt:3:"));
        let e = parse_matrix("2 2\n1 2\n3\n", "bad.txt").unwrap_err();
        assert!(e.to_string().contains("expected 4 values"));
    }

    #[test]
    fn identity_echoes_rhs() {
        let b = vec![1.0, -2.0, 3.5];
        for m in [SolveMethod::Lu, SolveMethod::Smw, SolveMethod::Genp(Multiplier::SignCirculant)] {
            let rep = solve_system(&Matrix::identity(3), &b, &opts(m)).unwrap();
            assert!(rep.y.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-13), "{m:?}");
        }
    }

    #[test]
    fn method_names() {
        assert_eq!(SolveMethod::parse("blocktri-dual").unwrap(), SolveMethod::Blocktri(BlockVariant::Dual));
        assert_eq!(SolveMethod::parse("genp").unwrap(), SolveMethod::Genp(Multiplier::SignCirculant));
        assert_eq!(SolveMethod::parse("genp-householder").unwrap(), SolveMethod::Genp(Multiplier::HouseholderPm1));
        assert!(SolveMethod::parse("cholesky").is_err());
    }

    #[test]
    fn toeplitz_detection() {
        let t = Toeplitz::symmetric(&[4.0, 1.0, 0.5]).to_dense();
        assert!(as_symmetric_toeplitz(&t).is_some());
        let mut u = t.clone();
        u[(0, 1)] = 2.0;
        assert!(as_symmetric_toeplitz(&u).is_none());
    }

    #[test]
    fn generated_classes() {
        let a = generate_matrix("tail", 16, 1, Seed(1)).unwrap();
        assert_eq!(numerical_nullity(&a), 1);
        assert!(generate_matrix("tail", 16, 0, Seed(1)).is_err());
        assert!(generate_matrix("nope", 16, 1, Seed(1)).is_err());
        assert_eq!(generate_matrix("1n", 12, 2, Seed(1)).unwrap().shape(), (12, 12));
    }
}
