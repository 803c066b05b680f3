//! Time series with a missing-value mask, and CSV ingestion.
//!
//! Accepted CSV layouts (header row optional):
//!
//! ```text
//! 1.5            timestamp,value        date,a,b
//! 2.0            2020-01,1.5            2020-01,1.0,7
//! NaN            2020-02,               2020-02,NaN,8
//! ```
//!
//! An empty field or a literal `NaN` marks a missing observation. A leading
//! column is treated as timestamps when its header is a time-like name or
//! its first data cell is not numeric.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered observations with a missingness mask.
///
/// Missing entries always hold `NaN` in `values`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    missing: Vec<bool>,
    timestamps: Option<Vec<String>>,
}

impl TimeSeries {
    /// Builds a series from raw values; non-finite values become missing.
    pub fn from_values(values: Vec<f64>) -> Self {
        let missing: Vec<bool> = values.iter().map(|v| !v.is_finite()).collect();
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { f64::NAN })
            .collect();
        Self {
            values,
            missing,
            timestamps: None,
        }
    }

    /// Builds a series from values and an explicit mask.
    pub fn with_mask(values: Vec<f64>, missing: Vec<bool>) -> Result<Self> {
        if values.len() != missing.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                actual: missing.len(),
            });
        }
        let mut out = Vec::with_capacity(values.len());
        for (i, (&v, &m)) in values.iter().zip(&missing).enumerate() {
            if m {
                out.push(f64::NAN);
            } else if v.is_finite() {
                out.push(v);
            } else {
                return Err(Error::InvalidSeries(format!(
                    "non-finite value at index {i} is not marked missing"
                )));
            }
        }
        Ok(Self {
            values: out,
            missing,
            timestamps: None,
        })
    }

    pub fn empty() -> Self {
        Self::from_values(Vec::new())
    }

    /// Attaches timestamps (metadata only).
    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.values.len() {
            return Err(Error::LengthMismatch {
                expected: self.values.len(),
                actual: timestamps.len(),
            });
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn is_missing(&self, i: usize) -> bool {
        self.missing[i]
    }

    /// Value at `i`, or `None` when missing.
    pub fn get(&self, i: usize) -> Option<f64> {
        if self.missing[i] {
            None
        } else {
            Some(self.values[i])
        }
    }

    /// Observed (non-missing) values in order.
    pub fn observed(&self) -> Vec<f64> {
        self.iter().flatten().collect()
    }

    pub fn observed_count(&self) -> usize {
        self.missing.iter().filter(|m| !**m).count()
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.observed_count()
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Sub-series over an index range, keeping timestamps.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            values: self.values[range.clone()].to_vec(),
            missing: self.missing[range.clone()].to_vec(),
            timestamps: self.timestamps.as_ref().map(|t| t[range].to_vec()),
        }
    }

    /// Concatenation of two series. Timestamps are kept only if both have them.
    pub fn concat(&self, other: &TimeSeries) -> Self {
        let timestamps = match (&self.timestamps, &other.timestamps) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Self {
            values: self.values.iter().chain(&other.values).copied().collect(),
            missing: self.missing.iter().chain(&other.missing).copied().collect(),
            timestamps,
        }
    }

    /// Applies `f` to every observed value; missing entries pass through.
    pub fn map_observed(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.missing)
            .map(|(&v, &m)| if m { f64::NAN } else { f(v) })
            .collect();
        Self {
            values,
            missing: self.missing.clone(),
            timestamps: self.timestamps.clone(),
        }
    }
}

// Missing slots hold NaN, so equality compares the mask and observed values.
impl PartialEq for TimeSeries {
    fn eq(&self, other: &Self) -> bool {
        self.missing == other.missing
            && self.timestamps == other.timestamps
            && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }
}

/// A parsed CSV file: optional shared timestamps plus one named series per
/// value column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub timestamps: Option<Vec<String>>,
    pub columns: Vec<(String, TimeSeries)>,
}

const TIME_HEADERS: &[&str] = &["timestamp", "time", "date", "datetime", "ds", "t"];

fn parse_cell(cell: &str) -> Option<Option<f64>> {
    let cell = cell.trim();
    if cell.is_empty() || cell.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
}

fn is_value_cell(cell: &str) -> bool {
    parse_cell(cell).is_some()
}

/// Reads a series table from CSV text.
pub fn read_csv_from<R: Read>(reader: R, origin: &Path) -> Result<Table> {
    let parse_err = |message: String| Error::Parse {
        path: origin.to_path_buf(),
        message,
    };
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let mut rows: Vec<Vec<String>> = text
        .lines()
        .map(|line| line.split(',').map(|c| c.trim().to_string()).collect())
        .collect();
    // Trailing blank lines are file padding, interior ones are missing values.
    while rows.last().is_some_and(|r: &Vec<String>| r.len() == 1 && r[0].is_empty()) {
        rows.pop();
    }
    if rows.is_empty() {
        return Ok(Table {
            timestamps: None,
            columns: vec![("value".to_string(), TimeSeries::empty())],
        });
    }

    let width = rows[0].len();
    let header = if rows[0].iter().skip(1).any(|c| !is_value_cell(c))
        || (width == 1 && !is_value_cell(&rows[0][0]))
        || (width > 1
            && TIME_HEADERS.contains(&rows[0][0].to_ascii_lowercase().as_str())
            && !is_value_cell(&rows[0][1]))
    {
        Some(rows.remove(0))
    } else {
        None
    };

    let has_time = width > 1
        && match &header {
            Some(h) => {
                TIME_HEADERS.contains(&h[0].to_ascii_lowercase().as_str())
                    || rows.first().is_some_and(|r| !is_value_cell(&r[0]))
            }
            None => rows.first().is_some_and(|r| !is_value_cell(&r[0])),
        };
    let first_value_col = usize::from(has_time);
    let names: Vec<String> = (first_value_col..width)
        .map(|c| match &header {
            Some(h) => h[c].clone(),
            None if width - first_value_col == 1 => "value".to_string(),
            None => format!("col{}", c - first_value_col),
        })
        .collect();

    let mut timestamps = has_time.then(Vec::new);
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(rows.len()); names.len()];
    for (line, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(parse_err(format!(
                "row {} has {} fields, expected {width}",
                line + 1,
                row.len()
            )));
        }
        if let Some(ts) = timestamps.as_mut() {
            ts.push(row[0].clone());
        }
        for (c, cell) in row[first_value_col..].iter().enumerate() {
            let v = parse_cell(cell)
                .ok_or_else(|| parse_err(format!("row {}: {cell:?} is not a number", line + 1)))?;
            cols[c].push(v.unwrap_or(f64::NAN));
        }
    }
    let columns = names
        .into_iter()
        .zip(cols)
        .map(|(name, values)| {
            let mut ts = TimeSeries::from_values(values);
            if let Some(t) = &timestamps {
                ts = ts.with_timestamps(t.clone())?;
            }
            Ok((name, ts))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        timestamps,
        columns,
    })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path)?;
    read_csv_from(file, path)
}

/// Formats a value for CSV output; missing values are written as `NaN`.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "NaN".to_string(),
    }
}

/// Writes a single series as `timestamp,value` (or `value` without timestamps).
pub fn write_csv<W: Write>(mut w: W, ts: &TimeSeries) -> Result<()> {
    match ts.timestamps() {
        Some(stamps) => {
            writeln!(w, "timestamp,value")?;
            for (t, v) in stamps.iter().zip(ts.iter()) {
                writeln!(w, "{t},{}", format_value(v))?;
            }
        }
        None => {
            writeln!(w, "value")?;
            for v in ts.iter() {
                writeln!(w, "{}", format_value(v))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Table {
        read_csv_from(text.as_bytes(), Path::new("<test>")).unwrap()
    }

    #[test]
    fn one_value_per_line() {
        let t = parse("1\n2.5\nNaN\n\n4\n");
        assert_eq!(t.columns.len(), 1);
        let ts = &t.columns[0].1;
        assert_eq!(ts.len(), 5);
        assert_eq!(ts.missing(), &[false, false, true, true, false]);
        assert!(t.timestamps.is_none());
    }

    #[test]
    fn timestamp_value_with_header() {
        let t = parse("timestamp,value\n2020-01,1.5\n2020-02,\n2020-03,3\n");
        assert_eq!(t.timestamps.as_ref().unwrap().len(), 3);
        let (name, ts) = &t.columns[0];
        assert_eq!(name, "value");
        assert_eq!(ts.get(0), Some(1.5));
        assert_eq!(ts.get(1), None);
    }

    #[test]
    fn numeric_timestamps_with_header() {
        let t = parse("t,value\n0.5,1\n0.6,2\n");
        assert_eq!(t.timestamps.unwrap(), vec!["0.5", "0.6"]);
        assert_eq!(t.columns[0].1.values(), &[1.0, 2.0]);
    }

    #[test]
    fn multivariate_columns() {
        let t = parse("date,a,b\nx,1,7\ny,NaN,8\n");
        assert_eq!(t.columns.len(), 2);
        assert_eq!(t.columns[1].0, "b");
        assert_eq!(t.columns[0].1.missing(), &[false, true]);
    }

    #[test]
    fn headerless_two_numeric_columns_are_two_series() {
        let t = parse("1,2\n3,4\n");
        assert!(t.timestamps.is_none());
        assert_eq!(t.columns.len(), 2);
    }

    #[test]
    fn garbage_cell_is_an_error() {
        let err = read_csv_from("1\nabc\n".as_bytes(), Path::new("x")).unwrap_err();
        assert_eq!(err.category(), "parse");
    }

    #[test]
    fn write_then_read_round_trips() {
        let ts = TimeSeries::from_values(vec![1.25, f64::NAN, -3.0])
            .with_timestamps(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &ts).unwrap();
        let back = parse(std::str::from_utf8(&buf).unwrap());
        assert_eq!(back.columns[0].1, ts);
    }

    #[test]
    fn mask_rejects_unmarked_nan() {
        assert!(TimeSeries::with_mask(vec![f64::NAN], vec![false]).is_err());
        assert!(TimeSeries::with_mask(vec![1.0], vec![false, true]).is_err());
    }
}
