//! Confusion matrices, derived statistical measures, and result tables.
//!
//! The confusion-matrix layout follows the seizure-detection convention used
//! throughout this crate: the first row/column is the non-seizure class, so
//!
//! ```text
//!                    predicted
//!                    NonSeizure  Seizure
//! actual NonSeizure      a          b
//! actual Seizure         c          d
//! ```
//!
//! and the "positive" class of TPR/FPR is the non-seizure class.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::ClassLabel;

/// 2x2 confusion matrix in the non-seizure/seizure layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ConfusionMatrix {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ConfusionMatrix { a, b, c, d }
    }

    pub fn zero() -> Self {
        ConfusionMatrix::new(0, 0, 0, 0)
    }

    /// Tally (actual, predicted) pairs.
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (ClassLabel, ClassLabel)>,
    {
        let mut cm = ConfusionMatrix::zero();
        for (actual, predicted) in pairs {
            cm.record(actual, predicted);
        }
        cm
    }

    pub fn record(&mut self, actual: ClassLabel, predicted: ClassLabel) {
        match (actual, predicted) {
            (ClassLabel::NonSeizure, ClassLabel::NonSeizure) => self.a += 1,
            (ClassLabel::NonSeizure, ClassLabel::Seizure) => self.b += 1,
            (ClassLabel::Seizure, ClassLabel::NonSeizure) => self.c += 1,
            (ClassLabel::Seizure, ClassLabel::Seizure) => self.d += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

/// Statistical measures derived from a confusion matrix.
///
/// A `None` field means the defining ratio has a zero denominator; reports
/// render it as `N/A` instead of coercing to 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub acc: Option<f64>,
    pub tpr: Option<f64>,
    pub precision: Option<f64>,
    pub tnr: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Derive ACC, TPR, Precision, TNR, FPR and FNR from a confusion matrix.
///
/// Zero denominators yield `None`, never a silent 0/0.
pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput("confusion matrix has no observations"));
    }
    Ok(MetricReport {
        acc: ratio(cm.a + cm.d, total),
        tpr: ratio(cm.a, cm.a + cm.b),
        precision: ratio(cm.a, cm.a + cm.c),
        tnr: ratio(cm.d, cm.c + cm.d),
        fpr: ratio(cm.b, cm.a + cm.b),
        fnr: ratio(cm.c, cm.c + cm.d),
    })
}

/// One evaluated (experiment, feature set, classifier) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultCell {
    pub confusion: ConfusionMatrix,
    pub report: MetricReport,
    /// Training wall-clock seconds; reported in the timing log only.
    pub train_seconds: Option<f64>,
    /// Test-set prediction wall-clock seconds; reported in the timing log only.
    pub test_seconds: Option<f64>,
}

impl ResultCell {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self> {
        Ok(ResultCell {
            confusion,
            report: metrics(&confusion)?,
            train_seconds: None,
            test_seconds: None,
        })
    }
}

/// Canonical column order for feature-set variants in reports.
pub const VARIANT_COLUMNS: [&str; 5] = ["raw", "llsp1", "llsp2", "llsp3", "llsp4"];

/// Collected results keyed by (experiment, variant, classifier).
///
/// Keys are plain strings so the table does not depend on upstream modules;
/// variants follow [`VARIANT_COLUMNS`] naming.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsTable {
    cells: BTreeMap<(String, String, String), ResultCell>,
}

fn format_opt_full(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => "NA".to_owned(),
    }
}

fn parse_opt_full(s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::CsvSchema(format!("cannot parse metric value {s:?}")))
}

/// Integer-percent rendering used by the accuracy tables.
fn percent_cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{}%", (x * 100.0).round() as i64),
        None => "N/A".to_owned(),
    }
}

/// 0/1 exact rates render without decimals, everything else with two.
fn rate_cell(v: Option<f64>) -> String {
    match v {
        Some(x) if x == 0.0 => "0".to_owned(),
        Some(x) if x == 1.0 => "1".to_owned(),
        Some(x) => format!("{x:.2}"),
        None => "N/A".to_owned(),
    }
}

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

impl ResultsTable {
    pub fn new() -> Self {
        ResultsTable::default()
    }

    pub fn insert(&mut self, experiment: &str, variant: &str, classifier: &str, cell: ResultCell) {
        self.cells.insert(
            (
                experiment.to_owned(),
                variant.to_owned(),
                classifier.to_owned(),
            ),
            cell,
        );
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, experiment: &str, variant: &str, classifier: &str) -> Option<&ResultCell> {
        self.cells.get(&(
            experiment.to_owned(),
            variant.to_owned(),
            classifier.to_owned(),
        ))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String, String), &ResultCell)> {
        self.cells.iter()
    }

    fn experiments(&self) -> Vec<String> {
        let mut out: Vec<String> = self.cells.keys().map(|k| k.0.clone()).collect();
        out.dedup();
        out
    }

    fn classifiers_for(&self, experiment: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .cells
            .keys()
            .filter(|k| k.0 == experiment)
            .map(|k| k.2.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Render the per-experiment accuracy tables and the 100%-combination
    /// summary as aligned text. Timings never appear here.
    pub fn render_text(&self) -> Result<String> {
        if self.is_empty() {
            return Err(Error::EmptyInput("results table"));
        }
        let mut out = String::new();
        for experiment in self.experiments() {
            writeln!(
                out,
                "Classification accuracy on the test set — experiment {experiment}"
            )
            .unwrap();
            let classifiers = self.classifiers_for(&experiment);
            let width = classifiers
                .iter()
                .map(|c| c.len())
                .max()
                .unwrap_or(0)
                .max("classifier".len());
            let mut header = pad("classifier", width);
            for v in VARIANT_COLUMNS {
                header.push_str(&format!("  {v:>6}"));
            }
            writeln!(out, "{header}").unwrap();
            for classifier in &classifiers {
                let mut row = pad(classifier, width);
                for v in VARIANT_COLUMNS {
                    let cell = match self.get(&experiment, v, classifier) {
                        Some(c) => percent_cell(c.report.acc),
                        None => "N/A".to_owned(),
                    };
                    row.push_str(&format!("  {cell:>6}"));
                }
                writeln!(out, "{row}").unwrap();
            }
            writeln!(out).unwrap();
        }

        writeln!(out, "Combinations reaching 100% accuracy").unwrap();
        writeln!(
            out,
            "{}  {}  {:>4} {:>4} {:>4} {:>4}",
            pad("method", 24),
            pad("experiment", 10),
            "TPR",
            "TNR",
            "FPR",
            "FNR"
        )
        .unwrap();
        let mut any = false;
        for ((experiment, variant, classifier), cell) in &self.cells {
            if cell.report.acc == Some(1.0) {
                any = true;
                let method = format!("{variant} + {classifier}");
                writeln!(
                    out,
                    "{}  {}  {:>4} {:>4} {:>4} {:>4}",
                    pad(&method, 24),
                    pad(experiment, 10),
                    rate_cell(cell.report.tpr),
                    rate_cell(cell.report.tnr),
                    rate_cell(cell.report.fpr),
                    rate_cell(cell.report.fnr),
                )
                .unwrap();
            }
        }
        if !any {
            writeln!(out, "(none)").unwrap();
        }
        Ok(out)
    }

    /// Render the timing companion table (train/test seconds per combination).
    pub fn render_timing_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{}  {}  {}  {:>10} {:>10}",
            pad("experiment", 10),
            pad("variant", 7),
            pad("classifier", 12),
            "train_s",
            "test_s"
        )
        .unwrap();
        for ((experiment, variant, classifier), cell) in &self.cells {
            writeln!(
                out,
                "{}  {}  {}  {:>10} {:>10}",
                pad(experiment, 10),
                pad(variant, 7),
                pad(classifier, 12),
                cell.train_seconds
                    .map(|t| format!("{t:.3}"))
                    .unwrap_or_else(|| "N/A".into()),
                cell.test_seconds
                    .map(|t| format!("{t:.3}"))
                    .unwrap_or_else(|| "N/A".into()),
            )
            .unwrap();
        }
        out
    }

    /// Full-precision CSV of counts and metrics (no timings).
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("experiment,variant,classifier,a,b,c,d,acc,tpr,precision,tnr,fpr,fnr\n");
        for ((experiment, variant, classifier), cell) in &self.cells {
            let cm = &cell.confusion;
            let r = &cell.report;
            writeln!(
                out,
                "{experiment},{variant},{classifier},{},{},{},{},{},{},{},{},{},{}",
                cm.a,
                cm.b,
                cm.c,
                cm.d,
                format_opt_full(r.acc),
                format_opt_full(r.tpr),
                format_opt_full(r.precision),
                format_opt_full(r.tnr),
                format_opt_full(r.fpr),
                format_opt_full(r.fnr),
            )
            .unwrap();
        }
        out
    }

    /// Parse a CSV produced by [`ResultsTable::to_csv`]. Metric columns are
    /// recomputed from the counts so every reported number is derived from
    /// the persisted confusion matrices.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or(Error::EmptyInput("metrics CSV has no header"))?;
        if header != "experiment,variant,classifier,a,b,c,d,acc,tpr,precision,tnr,fpr,fnr" {
            return Err(Error::CsvSchema(format!(
                "unexpected metrics CSV header: {header:?}"
            )));
        }
        let mut table = ResultsTable::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 13 {
                return Err(Error::CsvSchema(format!(
                    "metrics CSV line {}: expected 13 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let count = |s: &str| -> Result<u64> {
                s.parse::<u64>()
                    .map_err(|_| Error::CsvSchema(format!("cannot parse count {s:?}")))
            };
            let cm = ConfusionMatrix::new(
                count(fields[3])?,
                count(fields[4])?,
                count(fields[5])?,
                count(fields[6])?,
            );
            // Stored metric columns are validated against the recomputation.
            let recomputed = metrics(&cm)?;
            let stored = MetricReport {
                acc: parse_opt_full(fields[7])?,
                tpr: parse_opt_full(fields[8])?,
                precision: parse_opt_full(fields[9])?,
                tnr: parse_opt_full(fields[10])?,
                fpr: parse_opt_full(fields[11])?,
                fnr: parse_opt_full(fields[12])?,
            };
            if stored != recomputed {
                return Err(Error::CsvSchema(format!(
                    "metrics CSV line {}: stored metrics disagree with counts",
                    lineno + 2
                )));
            }
            table.insert(
                fields[0],
                fields[1],
                fields[2],
                ResultCell {
                    confusion: cm,
                    report: recomputed,
                    train_seconds: None,
                    test_seconds: None,
                },
            );
        }
        Ok(table)
    }
}
