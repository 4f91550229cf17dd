//! Weekly count series and their CSV representation.
//!
//! The CSV layout is one row per observation with the header
//! `series_id,date,count`. Rows may arrive in any order; within a series the
//! dates must be distinct and exactly one week apart once sorted.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::Serialize;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 3] = ["series_id", "date", "count"];
pub const DATE_FORMAT: &str = "%Y-%m-%d";
/// Minimum series length accepted for evaluation.
pub const MIN_SERIES_LEN: usize = 3;

/// First week used when a series is built from bare counts.
pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 1, 8).expect("valid date")
}

/// A complete weekly series of non-negative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountSeries {
    id: String,
    timestamps: Vec<NaiveDate>,
    counts: Vec<u64>,
}

impl CountSeries {
    /// Validates that timestamps are weekly, strictly increasing and aligned
    /// with `counts`.
    pub fn new(id: impl Into<String>, timestamps: Vec<NaiveDate>, counts: Vec<u64>) -> Result<Self> {
        let id = id.into();
        if timestamps.len() != counts.len() {
            return Err(Error::LengthMismatch {
                expected: timestamps.len(),
                actual: counts.len(),
            });
        }
        if counts.is_empty() {
            return Err(Error::SeriesTooShort { id, len: 0, min: 1 });
        }
        for pair in timestamps.windows(2) {
            let gap = pair[1] - pair[0];
            if gap <= Duration::zero() {
                return Err(Error::Data(format!(
                    "series {id:?}: dates not strictly increasing at {}",
                    pair[1]
                )));
            }
            if gap != Duration::weeks(1) {
                return Err(Error::Data(format!(
                    "series {id:?}: missing weeks between {} and {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { id, timestamps, counts })
    }

    /// Weekly series starting at 2023-01-08.
    pub fn from_counts(id: impl Into<String>, counts: Vec<u64>) -> Result<Self> {
        Self::from_counts_at(id, default_start(), counts)
    }

    pub fn from_counts_at(id: impl Into<String>, start: NaiveDate, counts: Vec<u64>) -> Result<Self> {
        let timestamps = (0..counts.len()).map(|i| start + Duration::weeks(i as i64)).collect();
        Self::new(id, timestamps, counts)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Number of training points for a series of `len` points.
///
/// `floor(fraction * len)`, at least one, and strictly less than `len`.
pub fn train_len(len: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    // The small offset keeps products such as 0.29 * 100 from flooring to 28.
    let train = ((fraction * len as f64) + 1e-9).floor() as usize;
    let train = train.max(1);
    if train >= len {
        return Err(Error::EmptyTestWindow { len, train });
    }
    Ok(train)
}

/// Parses a CSV corpus, requiring at least [`MIN_SERIES_LEN`] points per series.
pub fn parse_series_csv(content: &[u8]) -> Result<Vec<CountSeries>> {
    parse_series_csv_with_min(content, MIN_SERIES_LEN)
}

/// Parses a CSV corpus with a caller-chosen minimum series length.
/// Series are returned sorted by id.
pub fn parse_series_csv_with_min(content: &[u8], min_len: usize) -> Result<Vec<CountSeries>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content);

    let headers = reader.headers().map_err(|e| csv_error(&e, 1))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header {:?}, found {:?}",
                CSV_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    // series id -> (date, count, line)
    let mut grouped: BTreeMap<String, Vec<(NaiveDate, u64, usize)>> = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(&e, 0))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let id = &row[0];
        if id.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty series_id".into(),
            });
        }
        let date = NaiveDate::parse_from_str(&row[1], DATE_FORMAT).map_err(|e| Error::Parse {
            line,
            message: format!("invalid date {:?}: {e}", &row[1]),
        })?;
        let count = parse_count(&row[2]).ok_or_else(|| Error::Parse {
            line,
            message: format!("count {:?} is not a non-negative integer", &row[2]),
        })?;
        grouped.entry(id.to_string()).or_default().push((date, count, line));
    }

    let mut out = Vec::with_capacity(grouped.len());
    for (id, mut rows) in grouped {
        rows.sort_by_key(|&(date, _, _)| date);
        if let Some(pair) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Parse {
                line: pair[1].2,
                message: format!("duplicate date {} for series {id:?}", pair[1].0),
            });
        }
        if rows.len() < min_len {
            return Err(Error::SeriesTooShort {
                id,
                len: rows.len(),
                min: min_len,
            });
        }
        let (timestamps, counts) = rows.iter().map(|&(d, c, _)| (d, c)).unzip();
        out.push(CountSeries::new(id, timestamps, counts)?);
    }
    Ok(out)
}

fn parse_count(field: &str) -> Option<u64> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    field.parse().ok()
}

fn csv_error(e: &csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Writes series in the canonical CSV layout, in the order given.
pub fn write_series_csv(series: &[CountSeries]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for s in series {
        for (date, count) in s.timestamps.iter().zip(&s.counts) {
            out.push_str(&format!("{},{},{}\n", s.id, date.format(DATE_FORMAT), count));
        }
    }
    out
}

/// Descriptive statistics of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub id: String,
    pub size: usize,
    pub max: u64,
    pub min: u64,
    pub mean: f64,
    /// Sample standard deviation (divisor `n - 1`).
    pub std_dev: f64,
}

impl SeriesSummary {
    pub fn of(series: &CountSeries) -> Self {
        let values = series.values();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        let std_dev = if values.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 };
        Self {
            id: series.id.clone(),
            size: values.len(),
            max: series.counts.iter().copied().max().unwrap_or(0),
            min: series.counts.iter().copied().min().unwrap_or(0),
            mean,
            std_dev,
        }
    }
}
