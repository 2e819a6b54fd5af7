//! File-based price ingestion.
//!
//! Two inputs are understood: a ticker list (one symbol per line or
//! comma-separated) and a long-format prices CSV with the exact header
//! `ticker,date,adj_close`. Gaps in the trading calendar are allowed; only
//! date ordering is enforced. Duplicate `(ticker, date)` rows keep the last
//! occurrence.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use crate::Scalar;

pub const PRICES_HEADER: [&str; 3] = ["ticker", "date", "adj_close"];
pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("no ticker symbol found")]
    EmptyList,
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("no ticker has enough usable rows")]
    NoData,
    #[error("invalid price series for {ticker}: {message}")]
    InvalidSeries { ticker: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn format_error(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Format {
        line,
        message: message.into(),
    }
}

/// One ticker's adjusted closes, strictly increasing by date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries<T> {
    ticker: String,
    dates: Vec<NaiveDate>,
    closes: Vec<T>,
}

impl<T: Scalar> PriceSeries<T> {
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<T>) -> Result<Self, IngestError> {
        let ticker = ticker.into();
        let invalid = |message: &str| IngestError::InvalidSeries {
            ticker: ticker.clone(),
            message: message.to_string(),
        };
        if ticker.trim().is_empty() {
            return Err(invalid("empty ticker"));
        }
        if dates.len() != closes.len() {
            return Err(invalid("dates and closes differ in length"));
        }
        if dates.len() < 2 {
            return Err(invalid("fewer than 2 observations"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("dates not strictly increasing"));
        }
        if closes.iter().any(|c| !(c.is_finite() && *c > T::zero())) {
            return Err(invalid("non-positive or non-finite close"));
        }
        Ok(Self { ticker, dates, closes })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[T] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// Price series keyed by ticker; iterates in ascending ticker order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable<T> {
    entries: BTreeMap<String, PriceSeries<T>>,
}

impl<T> Default for PriceTable<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> PriceTable<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a series, replacing any previous one for the same ticker.
    pub fn insert(&mut self, series: PriceSeries<T>) -> Option<PriceSeries<T>> {
        self.entries.insert(series.ticker.clone(), series)
    }

    pub fn get(&self, ticker: &str) -> Option<&PriceSeries<T>> {
        self.entries.get(ticker)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PriceSeries<T>> {
        self.entries.values()
    }

    pub fn tickers(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serializes into the prices CSV format. Values use the shortest
    /// round-tripping decimal form, so reloading is bitwise exact.
    pub fn to_csv(&self) -> String {
        let mut out = PRICES_HEADER.join(",");
        out.push('\n');
        for series in self.iter() {
            for (date, close) in series.dates.iter().zip(&series.closes) {
                out.push_str(&format!("{},{},{}\n", series.ticker, date.format(DATE_FORMAT), close));
            }
        }
        out
    }
}

impl<'a, T> IntoIterator for &'a PriceTable<T> {
    type Item = &'a PriceSeries<T>;
    type IntoIter = std::collections::btree_map::Values<'a, String, PriceSeries<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.values()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WarningReason {
    /// Present in the file but not in the requested ticker filter.
    NotRequested,
    /// Requested but absent from the file.
    Missing,
    /// Fewer than two rows on or after the start date.
    TooFewRows { rows: usize },
    /// A later row replaced an earlier one with the same date.
    DuplicateDate { date: NaiveDate },
    /// Too few returns to compute a sample standard deviation.
    TooFewReturns { returns: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub ticker: String,
    pub reason: WarningReason,
}

impl Warning {
    pub fn new(ticker: impl Into<String>, reason: WarningReason) -> Self {
        Self {
            ticker: ticker.into(),
            reason,
        }
    }

    /// True when the warning means the ticker is absent from the output.
    pub fn is_exclusion(&self) -> bool {
        !matches!(self.reason, WarningReason::DuplicateDate { .. })
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            WarningReason::NotRequested => write!(f, "{}: not in ticker list, skipped", self.ticker),
            WarningReason::Missing => write!(f, "{}: no rows in prices file", self.ticker),
            WarningReason::TooFewRows { rows } => {
                write!(f, "{}: excluded, {rows} usable row(s)", self.ticker)
            }
            WarningReason::DuplicateDate { date } => write!(
                f,
                "{}: duplicate row for {}, kept last",
                self.ticker,
                date.format(DATE_FORMAT)
            ),
            WarningReason::TooFewReturns { returns } => {
                write!(f, "{}: excluded, {returns} return(s)", self.ticker)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedPrices<T> {
    pub table: PriceTable<T>,
    pub warnings: Vec<Warning>,
}

/// Parses a ticker list. Symbols are separated by newlines and/or commas;
/// duplicates keep their first position.
pub fn parse_ticker_list(text: &str) -> Result<Vec<String>, IngestError> {
    let mut seen = HashSet::new();
    let tickers: Vec<String> = text
        .split(['\n', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .filter(|s| seen.insert(s.to_string()))
        .map(str::to_string)
        .collect();
    if tickers.is_empty() {
        return Err(IngestError::EmptyList);
    }
    Ok(tickers)
}

pub fn read_ticker_list(path: &Path) -> Result<Vec<String>, IngestError> {
    parse_ticker_list(&read_to_string(path)?)
}

fn read_to_string(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_price_table<T: Scalar>(
    path: &Path,
    tickers: Option<&[String]>,
    start_date: Option<NaiveDate>,
) -> Result<LoadedPrices<T>, IngestError> {
    parse_price_csv(&read_to_string(path)?, tickers, start_date)
}

/// Parses prices CSV text into a validated table.
///
/// Rows dated before `start_date` are dropped. Tickers left with fewer than
/// two rows are excluded and reported in `warnings`.
pub fn parse_price_csv<T: Scalar>(
    text: &str,
    tickers: Option<&[String]>,
    start_date: Option<NaiveDate>,
) -> Result<LoadedPrices<T>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());

    let header = reader.headers().map_err(|e| format_error(1, e.to_string()))?;
    if header.iter().ne(PRICES_HEADER) {
        return Err(format_error(
            1,
            format!("expected header `{}`", PRICES_HEADER.join(",")),
        ));
    }

    let wanted: Option<HashSet<&str>> = tickers.map(|t| t.iter().map(String::as_str).collect());
    let mut rows: HashMap<String, BTreeMap<NaiveDate, T>> = HashMap::new();
    let mut seen_in_file: BTreeMap<String, ()> = BTreeMap::new();
    let mut warnings = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            format_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(format_error(line, "expected 3 fields"));
        }
        let ticker = record[0].trim();
        if ticker.is_empty() {
            return Err(format_error(line, "empty ticker"));
        }
        let date = NaiveDate::parse_from_str(record[1].trim(), DATE_FORMAT)
            .map_err(|e| format_error(line, format!("bad date `{}`: {e}", &record[1])))?;
        let close: T = record[2]
            .trim()
            .parse()
            .map_err(|_| format_error(line, format!("bad adj_close `{}`", &record[2])))?;
        if !(close.is_finite() && close > T::zero()) {
            return Err(format_error(
                line,
                format!("adj_close must be positive, got `{}`", &record[2]),
            ));
        }

        seen_in_file.insert(ticker.to_string(), ());
        if wanted.as_ref().is_some_and(|w| !w.contains(ticker)) {
            continue;
        }
        if start_date.is_some_and(|start| date < start) {
            continue;
        }
        let series = rows.entry(ticker.to_string()).or_default();
        if series.insert(date, close).is_some() {
            warnings.push(Warning::new(ticker, WarningReason::DuplicateDate { date }));
        }
    }

    let mut table = PriceTable::new();
    for ticker in seen_in_file.keys() {
        if wanted.as_ref().is_some_and(|w| !w.contains(ticker.as_str())) {
            warnings.push(Warning::new(ticker.clone(), WarningReason::NotRequested));
            continue;
        }
        let series = rows.remove(ticker).unwrap_or_default();
        if series.len() < 2 {
            warnings.push(Warning::new(
                ticker.clone(),
                WarningReason::TooFewRows { rows: series.len() },
            ));
            continue;
        }
        let (dates, closes) = series.into_iter().unzip();
        table.insert(PriceSeries::new(ticker.clone(), dates, closes)?);
    }
    if let Some(requested) = tickers {
        for ticker in requested {
            if !seen_in_file.contains_key(ticker) {
                warnings.push(Warning::new(ticker.clone(), WarningReason::Missing));
            }
        }
    }

    if table.is_empty() {
        return Err(IngestError::NoData);
    }
    Ok(LoadedPrices { table, warnings })
}
