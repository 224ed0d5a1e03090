use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn randmat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randmat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn report_value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|v| v.trim_start_matches(':').trim().parse().ok()))
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
}

fn read_column(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split_whitespace().nth(1), Some("1"));
    lines.map(|l| l.trim().parse().unwrap()).collect()
}

#[test]
fn identity_system_echoes_rhs() {
    let dir = TempDir::new().unwrap();
    fs::write(p(&dir, "a.txt"), "3 3\n1 0 0\n0 1 0\n0 0 1\n").unwrap();
    fs::write(p(&dir, "b.txt"), "3 1\n1.5\n-2\n0.25\n").unwrap();
    for method in ["lu", "smw", "genp-gaussian"] {
        let o = randmat(&["solve", &p(&dir, "a.txt"), "--rhs", &p(&dir, "b.txt"), "--method", method, "--r", "0", "--out", &p(&dir, "y.txt")]);
        assert!(o.status.success(), "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let y = read_column(&dir.path().join("y.txt"));
        for (got, want) in y.iter().zip([1.5, -2.0, 0.25]) {
            assert!((got - want).abs() < 1e-12, "{method}: {y:?}");
        }
        assert!(report_value(&stdout(&o), "relative_residual") < 1e-14);
        assert!(dir.path().join("y.txt.report").exists());
    }
}

#[test]
fn generated_tail_instance_solves_with_smw() {
    let dir = TempDir::new().unwrap();
    let o = randmat(&["generate", "--class", "tail", "--n", "16", "--r", "1", "--seed", "7", "--out", &p(&dir, "a.txt")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rhs: String = (0..16).map(|i| format!("{}\n", (i as f64).sin())).collect();
    fs::write(p(&dir, "b.txt"), format!("16 1\n{rhs}")).unwrap();
    let o = randmat(&["solve", &p(&dir, "a.txt"), "--rhs", &p(&dir, "b.txt"), "--method", "smw", "--r", "1", "--out", &p(&dir, "y.txt")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(report_value(&text, "relative_residual") <= 1e-9, "{text}");
    assert_eq!(report_value(&text, "rank_param"), 1.0);
    assert_eq!(read_column(&dir.path().join("y.txt")).len(), 16);
}

#[test]
fn malformed_header_names_the_line() {
    let dir = TempDir::new().unwrap();
    fs::write(p(&dir, "a.txt"), "# comment\n\n3 x\n1 2 3\n").unwrap();
    fs::write(p(&dir, "b.txt"), "1 1\n1\n").unwrap();
    let o = randmat(&["solve", &p(&dir, "a.txt"), "--rhs", &p(&dir, "b.txt"), "--out", &p(&dir, "y.txt")]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("a.txt:3:"), "{err}");
    assert!(err.contains("bad dimension"), "{err}");
}

#[test]
fn short_matrix_body_is_rejected() {
    let dir = TempDir::new().unwrap();
    fs::write(p(&dir, "a.txt"), "2 2\n1 2\n3\n").unwrap();
    fs::write(p(&dir, "b.txt"), "2 1\n1\n1\n").unwrap();
    let o = randmat(&["solve", &p(&dir, "a.txt"), "--rhs", &p(&dir, "b.txt"), "--out", &p(&dir, "y.txt")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("expected 4 values"));
}

#[test]
fn experiment_csv_is_deterministic() {
    let args = ["condstats", "--n", "16", "--trials", "3", "--seed", "11"];
    let a = randmat(&args);
    let b = randmat(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("experiment,family,n,r_or_q,metric,min,max,mean,std,trials,seed"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.iter().any(|r| r.starts_with("condstats,gauss,16,0,kappa,")));
    assert!(rows.iter().all(|r| r.ends_with(",3,11")));
    let other = randmat(&["condstats", "--n", "16", "--trials", "3", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn experiment_writes_csv_file() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "b.csv");
    let o = randmat(&["appendixB", "--n", "4", "--delta", "10", "--trials", "50", "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let row = text.lines().find(|l| l.contains(",nonsingular,")).expect("nonsingular row");
    let fields: Vec<&str> = row.split(',').collect();
    let mean: f64 = fields[7].parse().unwrap();
    assert!(mean > 0.3 && mean <= 1.0, "{row}");
    assert!(text.lines().any(|l| l.contains(",bound,")));
}

#[test]
fn unknown_subcommand_and_bad_list_fail() {
    assert!(!randmat(&["table99"]).status.success());
    let o = randmat(&["condstats", "--n", "16,x"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad list entry"));
}

#[test]
fn compress_round_trips_a_rank_one_tensor() {
    let dir = TempDir::new().unwrap();
    let mut body = String::from("dims: 2 3 2\n");
    for i in 0..2 {
        for j in 0..3 {
            for k in 0..2 {
                body.push_str(&format!("{}\n", (i + 1) as f64 * (j as f64 - 1.5) * (k + 2) as f64));
            }
        }
    }
    fs::write(p(&dir, "t.txt"), &body).unwrap();
    let o = randmat(&["compress", &p(&dir, "t.txt"), "--tol", "1e-12", "--out", &p(&dir, "tt.txt")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("ranks [1, 1] "), "{text}");
    let err: f64 = text.split_whitespace().last().unwrap().parse().unwrap();
    assert!(err < 1e-12, "{text}");
}
