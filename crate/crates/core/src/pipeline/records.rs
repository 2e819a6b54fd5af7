//! CSV forms of labelled records and evaluation rows.
//!
//! Reals are written as `{:.16e}` (17 significant digits), so reading a file
//! back reproduces the values exactly.

use std::str::FromStr;

use super::{EvaluationReport, EvaluationRow, LabeledRecord, PipelineError};
use crate::Scalar;

pub const LABELS_HEADER: &str = "ticker,volatility,return,cluster";
pub const EVALUATION_HEADER: &str = "ticker,volatility,return,raw_output,predicted,kmeans,missed";
const FEATURES_HEADER: &str = "ticker,volatility,return";

pub fn labels_csv<T: Scalar>(records: &[LabeledRecord<T>]) -> String {
    let mut out = format!("{LABELS_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{}\n",
            r.ticker, r.volatility, r.ret, r.cluster
        ));
    }
    out
}

pub fn evaluation_csv<T: Scalar>(report: &EvaluationReport<T>) -> String {
    let mut out = format!("{EVALUATION_HEADER}\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{},{},{}\n",
            r.ticker,
            r.volatility,
            r.ret,
            r.raw_output,
            r.predicted,
            r.kmeans,
            u8::from(r.missed())
        ));
    }
    out
}

/// A features row whose cluster column is optional.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow<T> {
    pub ticker: String,
    pub volatility: T,
    pub ret: T,
    pub cluster: Option<usize>,
}

fn records_error(line: u64, message: impl Into<String>) -> PipelineError {
    PipelineError::Records {
        line,
        message: message.into(),
    }
}

fn rows(text: &str, headers: &[&str]) -> Result<(usize, Vec<(u64, csv::StringRecord)>), PipelineError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| records_error(1, e.to_string()))?;
    let joined = header.iter().collect::<Vec<_>>().join(",");
    let which = headers
        .iter()
        .position(|h| *h == joined)
        .ok_or_else(|| records_error(1, format!("expected header `{}`", headers.join("` or `"))))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| records_error(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        out.push((line, record));
    }
    Ok((which, out))
}

fn field<V: FromStr>(record: &csv::StringRecord, index: usize, line: u64, name: &str) -> Result<V, PipelineError> {
    let raw = record
        .get(index)
        .ok_or_else(|| records_error(line, format!("missing {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| records_error(line, format!("bad {name} `{raw}`")))
}

fn finite<T: Scalar>(value: T, line: u64, name: &str) -> Result<T, PipelineError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(records_error(line, format!("{name} is not finite")))
    }
}

fn ticker(record: &csv::StringRecord, line: u64) -> Result<String, PipelineError> {
    match record.get(0).map(str::trim) {
        Some(t) if !t.is_empty() => Ok(t.to_string()),
        _ => Err(records_error(line, "empty ticker")),
    }
}

/// Reads `ticker,volatility,return[,cluster]`.
pub fn parse_feature_rows<T: Scalar>(text: &str) -> Result<Vec<FeatureRow<T>>, PipelineError> {
    let (which, records) = rows(text, &[LABELS_HEADER, FEATURES_HEADER])?;
    records
        .into_iter()
        .map(|(line, r)| {
            Ok(FeatureRow {
                ticker: ticker(&r, line)?,
                volatility: finite(field(&r, 1, line, "volatility")?, line, "volatility")?,
                ret: finite(field(&r, 2, line, "return")?, line, "return")?,
                cluster: if which == 0 {
                    Some(field(&r, 3, line, "cluster")?)
                } else {
                    None
                },
            })
        })
        .collect()
}

/// Reads `ticker,volatility,return,cluster`.
pub fn parse_labels_csv<T: Scalar>(text: &str) -> Result<Vec<LabeledRecord<T>>, PipelineError> {
    let (_, records) = rows(text, &[LABELS_HEADER])?;
    records
        .into_iter()
        .map(|(line, r)| {
            Ok(LabeledRecord {
                ticker: ticker(&r, line)?,
                volatility: finite(field(&r, 1, line, "volatility")?, line, "volatility")?,
                ret: finite(field(&r, 2, line, "return")?, line, "return")?,
                cluster: field(&r, 3, line, "cluster")?,
            })
        })
        .collect()
}

pub fn parse_evaluation_csv<T: Scalar>(text: &str) -> Result<Vec<EvaluationRow<T>>, PipelineError> {
    let (_, records) = rows(text, &[EVALUATION_HEADER])?;
    records
        .into_iter()
        .map(|(line, r)| {
            let row = EvaluationRow {
                ticker: ticker(&r, line)?,
                volatility: field(&r, 1, line, "volatility")?,
                ret: field(&r, 2, line, "return")?,
                raw_output: field(&r, 3, line, "raw_output")?,
                predicted: field(&r, 4, line, "predicted")?,
                kmeans: field(&r, 5, line, "kmeans")?,
            };
            let missed: u8 = field(&r, 6, line, "missed")?;
            if (missed == 1) != row.missed() {
                return Err(records_error(line, "missed flag disagrees with labels"));
            }
            Ok(row)
        })
        .collect()
}

/// Reads a `k,silhouette` sweep table.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<(usize, f64)>, PipelineError> {
    let (_, records) = rows(text, &["k,silhouette"])?;
    records
        .into_iter()
        .map(|(line, r)| Ok((field(&r, 0, line, "k")?, field(&r, 1, line, "silhouette")?)))
        .collect()
}

/// Reads an `epoch,loss` history.
pub fn parse_loss_csv(text: &str) -> Result<Vec<(usize, f64)>, PipelineError> {
    let (_, records) = rows(text, &["epoch,loss"])?;
    records
        .into_iter()
        .map(|(line, r)| Ok((field(&r, 0, line, "epoch")?, field(&r, 1, line, "loss")?)))
        .collect()
}
