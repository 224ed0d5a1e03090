//! Pass/fail bookkeeping for the acceptance run.

use std::fmt::Write;

/// One measured quantity against its bound.
#[derive(Clone, Debug)]
pub struct Check {
    pub what: String,
    pub value: f64,
    pub ok: bool,
    pub bound: String,
}

impl Check {
    pub fn at_most(what: impl Into<String>, value: f64, max: f64) -> Self {
        Check { what: what.into(), value, ok: value <= max, bound: format!("<= {max:.1e}") }
    }

    pub fn at_least(what: impl Into<String>, value: f64, min: f64) -> Self {
        Check { what: what.into(), value, ok: value >= min, bound: format!(">= {min:.3e}") }
    }

    pub fn within(what: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check { what: what.into(), value, ok: (lo..=hi).contains(&value), bound: format!("in [{lo:.2e}, {hi:.2e}]") }
    }
}

/// Criterion lines in the order they were recorded.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    /// Records a criterion; it passes when every check does. Failing checks
    /// are listed first on the line.
    pub fn record(&mut self, id: &str, title: &str, checks: &[Check]) -> bool {
        let ok = checks.iter().all(|c| c.ok);
        let mut ordered: Vec<&Check> = checks.iter().filter(|c| !c.ok).collect();
        ordered.extend(checks.iter().filter(|c| c.ok));
        let mut line = format!("{} {id} {title}:", if ok { "PASS" } else { "FAIL" });
        for c in ordered {
            let mark = if c.ok { "" } else { " [x]" };
            let _ = write!(line, " {} = {:.3e} {}{mark};", c.what, c.value, c.bound);
        }
        line.pop();
        println!("{line}");
        self.lines.push((id.to_string(), ok));
        ok
    }

    pub fn failed(&self) -> Vec<&str> {
        self.lines.iter().filter(|(_, ok)| !ok).map(|(id, _)| id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds() {
        assert!(Check::at_most("x", 1.0, 1.0).ok);
        assert!(!Check::at_least("x", 0.5, 1.0).ok);
        assert!(Check::within("x", 2.0, 1.0, 3.0).ok);
        assert!(!Check::within("x", f64::NAN, 1.0, 3.0).ok);
        assert!(!Check::at_most("x", f64::NAN, 1.0).ok);
    }

    #[test]
    fn report_tracks_failures() {
        let mut r = Report::default();
        assert!(r.record("1", "a", &[Check::at_most("x", 0.0, 1.0)]));
        assert!(!r.record("2", "b", &[Check::at_most("x", 0.0, 1.0), Check::at_most("y", 2.0, 1.0)]));
        assert_eq!(r.failed(), vec!["2"]);
        assert_eq!(r.len(), 2);
    }
}
