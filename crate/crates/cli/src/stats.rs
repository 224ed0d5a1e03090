use std::io::Write;

use randmat::Seed;

use crate::error::Result;

/// Summary of one metric over a batch of trials.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub seed: Seed,
}

impl TrialStats {
    /// Sample standard deviation; an empty batch gives NaN statistics.
    pub fn from_values(label: impl Into<String>, values: &[f64], seed: Seed) -> Self {
        let n = values.len();
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        let (mean, std) = match n {
            0 => (f64::NAN, f64::NAN),
            1 => (sum, 0.0),
            _ => {
                let mean = sum / n as f64;
                let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
                (mean, (ss / (n - 1) as f64).sqrt())
            }
        };
        if n == 0 {
            (min, max) = (f64::NAN, f64::NAN);
        }
        TrialStats { label: label.into(), min, max, mean, std, trials: n, seed }
    }
}

/// One CSV line: a metric for one parameter combination.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub family: String,
    pub n: usize,
    pub r_or_q: usize,
    pub stats: TrialStats,
}

pub const CSV_HEADER: [&str; 11] = ["experiment", "family", "n", "r_or_q", "metric", "min", "max", "mean", "std", "trials", "seed"];

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let s = &r.stats;
        w.write_record([
            r.experiment.clone(),
            r.family.clone(),
            r.n.to_string(),
            r.r_or_q.to_string(),
            s.label.clone(),
            num(s.min),
            num(s.max),
            num(s.mean),
            num(s.std),
            s.trials.to_string(),
            s.seed.0.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::CliError::Io { path: "<csv>".into(), source: e })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let s = TrialStats::from_values("x", &[1.0, 2.0, 3.0, 6.0], Seed(1));
        assert_eq!((s.min, s.max, s.mean, s.trials), (1.0, 6.0, 3.0, 4));
        assert!((s.std - (14.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }

    #[test]
    fn degenerate_batches() {
        let one = TrialStats::from_values("x", &[4.0], Seed(0));
        assert_eq!((one.mean, one.std), (4.0, 0.0));
        let none = TrialStats::from_values("x", &[], Seed(0));
        assert!(none.mean.is_nan() && none.min.is_nan());
    }

    #[test]
    fn csv_layout() {
        let row = Row {
            experiment: "condstats".into(),
            family: "gauss".into(),
            n: 8,
            r_or_q: 0,
            stats: TrialStats::from_values("kappa", &[1.0, 3.0], Seed(7)),
        };
        let mut buf = vec![];
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "experiment,family,n,r_or_q,metric,min,max,mean,std,trials,seed");
        assert_eq!(lines.next().unwrap(), "condstats,gauss,8,0,kappa,1.000000e0,3.000000e0,2.000000e0,1.414214e0,2,7");
    }
}
