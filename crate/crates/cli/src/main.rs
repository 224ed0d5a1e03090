use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, Args, Command, FromArgMatches};
use randmat::tt::{self, DenseTensor, Method, Truncation};
use randmat::Seed;
use randmat_cli::io::{self as mio, SolveMethod, SolveOptions};
use randmat_cli::{run_experiment, write_csv, CliError, Params, Result, EXPERIMENTS};

/// Comma-separated sizes such as `64,256`.
#[derive(Clone, Debug)]
struct List(Vec<usize>);

fn list(s: &str) -> std::result::Result<List, String> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad list entry {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(List)
}

#[derive(Args, Debug)]
struct ExpArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_parser = list)]
    n: Option<List>,
    #[arg(long, value_parser = list)]
    r: Option<List>,
    #[arg(long, value_parser = list)]
    q: Option<List>,
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Grid size for appendixB.
    #[arg(long)]
    delta: Option<u64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, default_value = "smw")]
    method: String,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 2)]
    refine: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    class: String,
    #[arg(long)]
    n: usize,
    /// Nullity or rank parameter of the class.
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompressArgs {
    tensor: PathBuf,
    #[arg(long, default_value = "svd")]
    method: String,
    /// Relative Frobenius budget.
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed TT ranks, comma-separated.
    #[arg(long, value_parser = list)]
    r: Option<List>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn cli() -> Command {
    let mut cmd = Command::new("randmat")
        .about("Randomized matrix computations: experiments and solvers")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for name in EXPERIMENTS {
        cmd = cmd.subcommand(ExpArgs::augment_args(Command::new(name).about(format!("Run the {name} experiment as CSV"))));
    }
    cmd.subcommand(SolveArgs::augment_args(Command::new("solve").about("Solve A y = b from matrix files")))
        .subcommand(GenerateArgs::augment_args(Command::new("generate").about("Write a seeded test matrix")))
        .subcommand(CompressArgs::augment_args(Command::new("compress").about("TT-compress a dense tensor file")))
}

fn read_text(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn experiment(name: &str, m: &ArgMatches) -> Result<()> {
    let a = ExpArgs::from_arg_matches(m).map_err(|e| CliError::Invalid(e.to_string()))?;
    let params = Params {
        n: a.n.map(|l| l.0).unwrap_or_default(),
        r: a.r.map(|l| l.0).unwrap_or_default(),
        q: a.q.map(|l| l.0).unwrap_or_default(),
        class: a.class,
        family: a.family,
        method: a.method,
        refine: a.refine,
        tol: a.tol,
        delta: a.delta,
        trials: a.trials,
        seed: Seed(a.seed),
    };
    let rows = run_experiment(name, &params)?;
    match a.out {
        Some(path) => {
            let f = fs::File::create(&path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
            write_csv(&rows, f)
        }
        None => write_csv(&rows, io::stdout().lock()),
    }
}

fn solve(m: &ArgMatches) -> Result<()> {
    let a = SolveArgs::from_arg_matches(m).map_err(|e| CliError::Invalid(e.to_string()))?;
    let opts = SolveOptions { method: SolveMethod::parse(&a.method)?, r: a.r, q: a.q, refine: a.refine, seed: Seed(a.seed) };
    let report = mio::solve_file(&a.matrix, &a.rhs, &a.out, &opts)?;
    print!("{}", report.to_text());
    Ok(())
}

fn generate(m: &ArgMatches) -> Result<()> {
    let a = GenerateArgs::from_arg_matches(m).map_err(|e| CliError::Invalid(e.to_string()))?;
    let mat = mio::generate_matrix(&a.class, a.n, a.r, Seed(a.seed))?;
    mio::write_matrix(&a.out, &mat)
}

fn compress(m: &ArgMatches) -> Result<()> {
    let a = CompressArgs::from_arg_matches(m).map_err(|e| CliError::Invalid(e.to_string()))?;
    let method = Method::parse(&a.method).ok_or_else(|| CliError::Invalid(format!("unknown TT method {:?}", a.method)))?;
    let trunc = match (a.tol, a.r) {
        (Some(t), None) => Truncation::Tol(t),
        (None, Some(r)) => Truncation::Ranks(r.0),
        (None, None) => Truncation::Tol(1e-10),
        (Some(_), Some(_)) => return Err(CliError::Invalid("give either --tol or --r, not both".into())),
    };
    let text = read_text(&a.tensor)?;
    let tensor = DenseTensor::parse(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", a.tensor.display())))?;
    let got = tt::tt_compress(&tensor, method, &trunc, Seed(a.seed))?;
    let err = tensor.sub(&got.to_full())?.fro() / tensor.fro().max(f64::MIN_POSITIVE);
    write_text(&a.out, &got.to_text())?;
    let mut so = io::stdout().lock();
    writeln!(so, "ranks {:?} storage {} rel_error {:.3e}", got.ranks(), got.storage(), err)
        .map_err(|source| CliError::Io { path: "stdout".into(), source })
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let res = match name {
        "solve" => solve(sub),
        "generate" => generate(sub),
        "compress" => compress(sub),
        exp => experiment(exp, sub),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("randmat: {e}");
            ExitCode::FAILURE
        }
    }
}
