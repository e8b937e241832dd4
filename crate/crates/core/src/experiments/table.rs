//! CSV tables. Floats are written with 17 significant digits so a parse
//! recovers them bit for bit; absent values are empty fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const RESULTS_HEADER: [&str; 10] = [
    "sigma",
    "M",
    "lambda",
    "trial",
    "tv_error",
    "node_error",
    "iters",
    "K",
    "L",
    "kappa",
];

pub const BOUND_HEADER: [&str; 3] = ["eta", "empirical_freq", "bound"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sigma: f64,
    pub m: usize,
    pub lambda: f64,
    pub trial: usize,
    pub tv_error: f64,
    pub node_error: f64,
    pub iters: usize,
    pub k: f64,
    /// `None` when no positive `L` is certifiable for the training set.
    pub l: Option<f64>,
    /// `None` when `L ≤ 3`.
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub eta: f64,
    pub empirical_freq: f64,
    /// `None` when the bound's hypotheses fail for the cell.
    pub bound: Option<f64>,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn csv_error(path: &str, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.to_string(),
        reason: e.to_string(),
    }
}

pub fn results_to_csv(records: &[TrialRecord]) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| csv_error("results", e);
    w.write_record(RESULTS_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            float(r.sigma),
            r.m.to_string(),
            float(r.lambda),
            r.trial.to_string(),
            float(r.tv_error),
            float(r.node_error),
            r.iters.to_string(),
            float(r.k),
            opt_float(r.l),
            opt_float(r.kappa),
        ])
        .map_err(io)?;
    }
    w.into_inner().map_err(|e| csv_error("results", e))
}

/// Writes the results table atomically. Nothing is written for an empty
/// record list.
pub fn emit_results(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_atomic(path, &results_to_csv(records)?)
}

pub fn bound_table_to_csv(rows: &[BoundRow]) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| csv_error("bound table", e);
    w.write_record(BOUND_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([float(r.eta), float(r.empirical_freq), opt_float(r.bound)])
            .map_err(io)?;
    }
    w.into_inner().map_err(|e| csv_error("bound table", e))
}

pub fn emit_bound_table(rows: &[BoundRow], path: &Path) -> Result<()> {
    write_atomic(path, &bound_table_to_csv(rows)?)
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    line: u64,
    source: &str,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|e| {
        csv_error(
            source,
            format!(
                "line {line}, column {}: {e} in {raw:?}",
                RESULTS_HEADER[idx]
            ),
        )
    })
}

fn opt_field(rec: &csv::StringRecord, idx: usize, line: u64, source: &str) -> Result<Option<f64>> {
    match rec.get(idx) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, idx, line, source).map(Some),
    }
}

/// Parses a results table produced by [`emit_results`]. `source` names
/// the input in error messages.
pub fn parse_results(bytes: &[u8], source: &str) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().map_err(|e| csv_error(source, e))?;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(csv_error(
            source,
            format!("expected header {}", RESULTS_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(source, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push(TrialRecord {
            sigma: field(&rec, 0, line, source)?,
            m: field(&rec, 1, line, source)?,
            lambda: field(&rec, 2, line, source)?,
            trial: field(&rec, 3, line, source)?,
            tv_error: field(&rec, 4, line, source)?,
            node_error: field(&rec, 5, line, source)?,
            iters: field(&rec, 6, line, source)?,
            k: field(&rec, 7, line, source)?,
            l: opt_field(&rec, 8, line, source)?,
            kappa: opt_field(&rec, 9, line, source)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> TrialRecord {
        TrialRecord {
            sigma: 0.1,
            m: 8,
            lambda: 1.0 / 3.0,
            trial: 0,
            tv_error: std::f64::consts::PI * 1e-7,
            node_error: 2.0f64.sqrt(),
            iters: 1234,
            k: 4.0,
            l: None,
            kappa: Some(7.000000000000001),
        }
    }

    #[test]
    fn one_record_two_lines() {
        let bytes = results_to_csv(&[record()]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(
            text.lines().next().unwrap(),
            "sigma,M,lambda,trial,tv_error,node_error,iters,K,L,kappa"
        );
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut b = record();
        b.l = Some(f64::INFINITY);
        b.trial = 1;
        let recs = [record(), b];
        let back = parse_results(&results_to_csv(&recs).unwrap(), "mem").unwrap();
        assert_eq!(back, recs);
        for (x, y) in back.iter().zip(&recs) {
            assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
            assert_eq!(x.tv_error.to_bits(), y.tv_error.to_bits());
        }
    }

    #[test]
    fn empty_records_write_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        assert!(matches!(emit_results(&[], &p), Err(Error::EmptyRecords)));
        assert!(!p.exists());
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_results(b"a,b\n1,2\n", "x.csv").is_err());
    }

    #[test]
    fn bound_table_blank_for_missing_bound() {
        let rows = [
            BoundRow {
                eta: 0.5,
                empirical_freq: 0.25,
                bound: None,
            },
            BoundRow {
                eta: 1.0,
                empirical_freq: 0.0,
                bound: Some(1.0),
            },
        ];
        let text = String::from_utf8(bound_table_to_csv(&rows).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "eta,empirical_freq,bound");
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("1.0000000000000000e0"));
    }
}
