//! Report rows, tables and their CSV/JSON serializations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// A documented disagreement with a published value; does not fail the run.
    KnownIssue,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::KnownIssue => "known-issue",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// One checked quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub estimate: Option<f64>,
    pub std_err: Option<f64>,
    pub oracle: Option<f64>,
    pub bound: Option<f64>,
    /// How the verdict was reached, e.g. `3 se` or `abs 1e-10`.
    pub tolerance: Option<String>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl Row {
    fn base(name: impl Into<String>, estimate: f64) -> Self {
        Self {
            name: name.into(),
            estimate: Some(estimate),
            std_err: None,
            oracle: None,
            bound: None,
            tolerance: None,
            verdict: Verdict::Pass,
            note: None,
        }
    }

    /// `|estimate - oracle| <= k · se`.
    pub fn within_se(name: impl Into<String>, estimate: f64, se: f64, oracle: f64, k: f64) -> Self {
        let ok = (estimate - oracle).abs() <= k * se;
        Self {
            std_err: Some(se),
            oracle: Some(oracle),
            tolerance: Some(format!("{k} se")),
            verdict: Verdict::from_bool(ok),
            ..Self::base(name, estimate)
        }
    }

    /// `|estimate - oracle| <= tol`.
    pub fn within_abs(name: impl Into<String>, estimate: f64, oracle: f64, tol: f64) -> Self {
        let ok = (estimate - oracle).abs() <= tol;
        Self {
            oracle: Some(oracle),
            tolerance: Some(format!("abs {tol:e}")),
            verdict: Verdict::from_bool(ok),
            ..Self::base(name, estimate)
        }
    }

    /// `estimate <= bound + k · se`.
    pub fn below_bound(name: impl Into<String>, estimate: f64, se: f64, bound: f64, k: f64) -> Self {
        let ok = estimate <= bound + k * se;
        Self {
            std_err: Some(se),
            bound: Some(bound),
            tolerance: Some(format!("{k} se")),
            verdict: Verdict::from_bool(ok),
            ..Self::base(name, estimate)
        }
    }

    /// `estimate < bound` strictly.
    pub fn less_than(name: impl Into<String>, estimate: f64, bound: f64) -> Self {
        Self {
            bound: Some(bound),
            tolerance: Some("strict".into()),
            verdict: Verdict::from_bool(estimate < bound),
            ..Self::base(name, estimate)
        }
    }

    /// `low <= estimate <= high`.
    pub fn in_range(name: impl Into<String>, estimate: f64, low: f64, high: f64) -> Self {
        Self {
            tolerance: Some(format!("range [{low}, {high}]")),
            verdict: Verdict::from_bool((low..=high).contains(&estimate)),
            ..Self::base(name, estimate)
        }
    }

    /// A boolean property.
    pub fn check(name: impl Into<String>, ok: bool, note: impl Into<String>) -> Self {
        Self {
            estimate: None,
            tolerance: Some("exact".into()),
            verdict: Verdict::from_bool(ok),
            note: Some(note.into()),
            ..Self::base(name, 0.0)
        }
    }

    /// A value reported without a verdict of its own.
    pub fn info(name: impl Into<String>, estimate: f64, se: Option<f64>) -> Self {
        Self {
            std_err: se,
            ..Self::base(name, estimate)
        }
    }

    /// A numerical failure carried as a failed row.
    pub fn failure(name: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            estimate: None,
            verdict: Verdict::Fail,
            note: Some(message.into()),
            ..Self::base(name, 0.0)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// A rectangular data table written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn format_cell(cell: &Cell) -> String {
    match cell {
        Cell::Real(v) => format_real(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Cell::Empty => String::new(),
    }
}

/// Everything an experiment produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<Row>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(Row::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.passed())
    }

    pub fn rows_table(&self) -> Table {
        let mut t = Table::new(&[
            "name", "estimate", "std_err", "oracle", "bound", "tolerance", "verdict", "note",
        ]);
        for r in &self.rows {
            t.push(vec![
                Cell::Text(r.name.clone()),
                r.estimate.into(),
                r.std_err.into(),
                r.oracle.into(),
                r.bound.into(),
                r.tolerance.as_deref().map_or(Cell::Empty, Cell::from),
                Cell::from(r.verdict.as_str()),
                r.note.as_deref().map_or(Cell::Empty, Cell::from),
            ]);
        }
        t
    }

    /// Pretty JSON with every float written by the shortest round-trip
    /// representation; non-finite values become `null`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human-readable summary, one line per row.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = write!(out, "[{}] {}", r.verdict.as_str(), r.name);
            if let Some(e) = r.estimate {
                let _ = write!(out, " = {e:.6}");
            }
            if let Some(se) = r.std_err {
                let _ = write!(out, " (se {se:.2e})");
            }
            if let Some(o) = r.oracle {
                let _ = write!(out, ", oracle {o:.6}");
            }
            if let Some(b) = r.bound {
                let _ = write!(out, ", bound {b:.6}");
            }
            if let Some(n) = &r.note {
                let _ = write!(out, " -- {n}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip_at_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = format_real(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn csv_has_header_and_unix_newlines() {
        let mut t = Table::new(&["r", "G"]);
        t.push(vec![0.5.into(), 0.25.into()]);
        let csv = t.to_csv();
        assert!(csv.starts_with("r,G\n"));
        assert!(!csv.contains('\r'));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn known_issue_does_not_fail() {
        let mut row = Row::within_abs("x", 1.0, 2.0, 0.1);
        assert!(!row.passed());
        row.verdict = Verdict::KnownIssue;
        assert!(row.passed());
    }

    #[test]
    fn text_cells_are_quoted_when_needed() {
        assert_eq!(format_cell(&Cell::from("a,b")), "\"a,b\"");
        assert_eq!(format_cell(&Cell::from("plain")), "plain");
    }
}
