use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::{Error, Result};

/// One line of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub ratio: f64,
    pub seed: Option<u64>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub condense_seconds: f64,
    pub train_seconds: f64,
}

impl From<&EvalReport> for ResultRow {
    fn from(r: &EvalReport) -> Self {
        ResultRow {
            method: r.method.clone(),
            ratio: r.ratio,
            seed: r.seed,
            accuracy: r.accuracy,
            macro_f1: r.macro_f1,
            condense_seconds: r.condense_seconds,
            train_seconds: r.train_seconds,
        }
    }
}

impl ResultRow {
    /// A report carrying only what the csv row records.
    pub fn into_report(self) -> EvalReport {
        EvalReport {
            method: self.method,
            ratio: self.ratio,
            seed: self.seed,
            accuracy: self.accuracy,
            macro_f1: self.macro_f1,
            per_class: Vec::new(),
            test_size: 0,
            dataset_hash: None,
            provenance: None,
            condense_seconds: self.condense_seconds,
            train_seconds: self.train_seconds,
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        file: path.to_path_buf(),
        line: e.position().map_or(0, |p| p.line() as usize),
        msg: e.to_string(),
    }
}

pub fn results_csv(reports: &[EvalReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(ResultRow::from(r)).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub ratio: f64,
    pub runs: usize,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    pub condense_seconds_mean: f64,
    pub train_seconds_mean: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<SummaryRow>,
}

/// Mean and sample standard deviation, computed exactly on the rational
/// values of the inputs and rounded once at the end.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let exact: Vec<BigRational> = values
        .iter()
        .map(|&v| BigRational::from_float(v).expect("finite metric"))
        .collect();
    let count = BigRational::from_integer(BigInt::from(n));
    let mean = exact.iter().fold(BigRational::zero(), |a, b| a + b) / &count;
    let std = if n < 2 {
        0.0
    } else {
        let ss = exact
            .iter()
            .map(|v| (v - &mean) * (v - &mean))
            .fold(BigRational::zero(), |a, b| a + b);
        let var = ss / BigRational::from_integer(BigInt::from(n - 1));
        var.to_f64().unwrap_or(f64::NAN).sqrt()
    };
    (mean.to_f64().unwrap_or(f64::NAN), std)
}

/// Aggregate runs into method x ratio rows (mean and sample std over
/// seeds). Refuses to mix reports tagged with different datasets.
pub fn compare_runs(reports: &[EvalReport]) -> Result<ComparisonTable> {
    if reports.len() < 2 {
        return Err(Error::Eval(format!(
            "need at least two reports to compare, got {}",
            reports.len()
        )));
    }
    let mut hash: Option<&str> = None;
    for r in reports {
        if let Some(h) = r.dataset_hash.as_deref() {
            match hash {
                Some(seen) if seen != h => {
                    return Err(Error::DatasetMismatch(seen.to_string(), h.to_string()))
                }
                _ => hash = Some(h),
            }
        }
    }
    let mut groups: BTreeMap<(String, u64), Vec<&EvalReport>> = BTreeMap::new();
    for r in reports {
        // ratios are non-negative, so bit order is numeric order
        groups
            .entry((r.method.clone(), r.ratio.to_bits()))
            .or_default()
            .push(r);
    }
    let rows = groups
        .into_iter()
        .map(|((method, ratio), runs)| {
            let col = |f: fn(&EvalReport) -> f64| runs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (accuracy_mean, accuracy_std) = mean_std(&col(|r| r.accuracy));
            let (macro_f1_mean, macro_f1_std) = mean_std(&col(|r| r.macro_f1));
            SummaryRow {
                method,
                ratio: f64::from_bits(ratio),
                runs: runs.len(),
                accuracy_mean,
                accuracy_std,
                macro_f1_mean,
                macro_f1_std,
                condense_seconds_mean: mean_std(&col(|r| r.condense_seconds)).0,
                train_seconds_mean: mean_std(&col(|r| r.train_seconds)).0,
            }
        })
        .collect();
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    /// Aligned text table, accuracies in percent.
    pub fn to_text(&self) -> String {
        let mut lines = vec![[
            "method".to_string(),
            "ratio".into(),
            "runs".into(),
            "accuracy (%)".into(),
            "macro-F1 (%)".into(),
            "condense s".into(),
            "train s".into(),
        ]];
        for r in &self.rows {
            lines.push([
                r.method.clone(),
                format!("{:.2}%", r.ratio * 100.0),
                r.runs.to_string(),
                format!("{:.2} ± {:.2}", r.accuracy_mean * 100.0, r.accuracy_std * 100.0),
                format!("{:.2} ± {:.2}", r.macro_f1_mean * 100.0, r.macro_f1_std * 100.0),
                format!("{:.4}", r.condense_seconds_mean),
                format!("{:.4}", r.train_seconds_mean),
            ]);
        }
        let mut widths = [0usize; 7];
        for l in &lines {
            for (w, cell) in widths.iter_mut().zip(l) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (cell, w))| {
                    let pad = w - cell.chars().count();
                    if i == 0 {
                        format!("{cell}{}", " ".repeat(pad))
                    } else {
                        format!("{}{cell}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(method: &str, ratio: f64, acc: f64, hash: Option<&str>) -> EvalReport {
        ResultRow {
            method: method.into(),
            ratio,
            seed: Some(0),
            accuracy: acc,
            macro_f1: acc,
            condense_seconds: 0.1,
            train_seconds: 0.2,
        }
        .into_report()
        .with_hash(hash)
    }

    impl EvalReport {
        fn with_hash(mut self, h: Option<&str>) -> Self {
            self.dataset_hash = h.map(String::from);
            self
        }
    }

    #[test]
    fn identical_runs_have_zero_spread() {
        let runs: Vec<_> = (0..5).map(|_| report("herding", 0.012, 0.9137, None)).collect();
        let t = compare_runs(&runs).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].accuracy_std, 0.0);
        assert_eq!(t.rows[0].accuracy_mean, 0.9137);
    }

    #[test]
    fn two_run_mean_and_sample_std() {
        let t = compare_runs(&[report("r", 0.1, 0.9, None), report("r", 0.1, 0.92, None)]).unwrap();
        assert!((t.rows[0].accuracy_mean - 0.91).abs() < 1e-15);
        // sqrt(((0.01)^2 * 2) / 1) = 0.0141421...
        assert!((t.rows[0].accuracy_std - 0.01 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mixed_datasets_refused() {
        let err = compare_runs(&[report("a", 0.1, 0.5, Some("x")), report("a", 0.1, 0.5, Some("y"))]);
        assert!(matches!(err, Err(Error::DatasetMismatch(..))));
    }

    #[test]
    fn single_report_refused() {
        assert!(compare_runs(&[report("a", 0.1, 0.5, None)]).is_err());
    }

    #[test]
    fn groups_sorted_by_method_then_ratio() {
        let t = compare_runs(&[
            report("random", 0.048, 0.5, None),
            report("herding", 0.048, 0.8, None),
            report("herding", 0.012, 0.7, None),
        ])
        .unwrap();
        let keys: Vec<_> = t.rows.iter().map(|r| (r.method.as_str(), r.ratio)).collect();
        assert_eq!(keys, [("herding", 0.012), ("herding", 0.048), ("random", 0.048)]);
        assert!(t.to_text().contains("70.00 ± 0.00"));
    }

    #[test]
    fn csv_header_is_fixed() {
        let csv = results_csv(&[report("herding", 0.012, 0.5, None)]);
        assert_eq!(
            csv.lines().next().unwrap(),
            "method,ratio,seed,accuracy,macro_f1,condense_seconds,train_seconds"
        );
    }
}
