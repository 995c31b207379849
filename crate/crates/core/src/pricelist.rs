//! Daily price-list ingestion: line-oriented parsing, panel assembly, and
//! coverage validation.
//!
//! Input grammar, one record per line:
//!
//! ```text
//! TICKER,YYYY-MM-DD,CLOSE[,VOLUME]
//! ```
//!
//! `TICKER` is 2–6 uppercase letters, `CLOSE` a plain positive decimal (no
//! thousands separators, no exponent), `VOLUME` an optional non-negative
//! integer. Lines beginning with `#` and blank lines are skipped. The
//! original exchange layout is not recoverable, so this CSV grammar is the
//! canonical post-conversion form; see the repository README.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dates::YearMonth;

/// Exchange ticker symbol: 2–6 uppercase ASCII letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Ticker(String);

impl Ticker {
    pub fn new(s: &str) -> Result<Self, TickerError> {
        if !(2..=6).contains(&s.len()) || !s.bytes().all(|b| b.is_ascii_uppercase()) {
            return Err(TickerError(s.to_string()));
        }
        Ok(Self(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Ticker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid ticker `{0}`, expected 2-6 uppercase letters")]
pub struct TickerError(String);

impl TryFrom<String> for Ticker {
    type Error = TickerError;
    fn try_from(s: String) -> Result<Self, TickerError> {
        Ticker::new(&s)
    }
}

impl From<Ticker> for String {
    fn from(t: Ticker) -> String {
        t.0
    }
}

impl FromStr for Ticker {
    type Err = TickerError;
    fn from_str(s: &str) -> Result<Self, TickerError> {
        Ticker::new(s)
    }
}

/// One validated daily closing-price observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceRecord {
    pub ticker: Ticker,
    pub date: NaiveDate,
    pub close: f64,
    pub volume: Option<u64>,
}

/// Outcome of a lenient parse: what was kept, what was dropped and why.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    /// Number of data lines accepted as records.
    pub accepted: usize,
    /// (1-based line number, reason) for every line that failed to parse.
    pub rejected: Vec<(usize, String)>,
    /// (ticker, date) pairs that appeared more than once in the input.
    pub duplicates: Vec<(Ticker, NaiveDate)>,
}

/// Parse failure in strict mode, pointing at the offending field.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

struct Field<'a> {
    text: &'a str,
    /// 1-based character column where the field starts.
    column: usize,
}

fn split_fields(line: &str) -> Vec<Field<'_>> {
    let mut fields = Vec::new();
    let mut start = 0usize;
    for (idx, ch) in line.char_indices() {
        if ch == ',' {
            fields.push(Field {
                text: &line[start..idx],
                column: start + 1,
            });
            start = idx + 1;
        }
    }
    fields.push(Field {
        text: &line[start..],
        column: start + 1,
    });
    fields
}

/// Plain positive decimal: digits with at most one dot. Rejects thousands
/// separators, exponents, signs, and the inf/nan spellings `f64` would accept.
fn parse_close(s: &str) -> Result<f64, String> {
    if s.is_empty() {
        return Err("empty price field".to_string());
    }
    let mut dots = 0;
    for ch in s.chars() {
        match ch {
            '0'..='9' => {}
            '.' => dots += 1,
            '-' => return Err("non-positive price".to_string()),
            _ => return Err(format!("invalid price `{s}`")),
        }
    }
    if dots > 1 || s == "." {
        return Err(format!("invalid price `{s}`"));
    }
    let value: f64 = s.parse().map_err(|_| format!("invalid price `{s}`"))?;
    if value <= 0.0 {
        return Err("non-positive price".to_string());
    }
    Ok(value)
}

fn parse_line(line: &str) -> Result<PriceRecord, (usize, String)> {
    let fields = split_fields(line);
    if fields.len() < 3 || fields.len() > 4 {
        return Err((
            1,
            format!("expected 3 or 4 fields, found {}", fields.len()),
        ));
    }
    let ticker = Ticker::new(fields[0].text.trim())
        .map_err(|e| (fields[0].column, e.to_string()))?;
    let date = NaiveDate::parse_from_str(fields[1].text.trim(), "%Y-%m-%d")
        .map_err(|_| (fields[1].column, format!("invalid date `{}`", fields[1].text)))?;
    let close = parse_close(fields[2].text.trim()).map_err(|e| (fields[2].column, e))?;
    let volume = match fields.get(3) {
        None => None,
        Some(f) => {
            let t = f.text.trim();
            if t.is_empty() {
                None
            } else {
                Some(
                    t.parse::<u64>()
                        .map_err(|_| (f.column, format!("invalid volume `{t}`")))?,
                )
            }
        }
    };
    Ok(PriceRecord {
        ticker,
        date,
        close,
        volume,
    })
}

/// Parse a price-list text into records.
///
/// Lenient mode never fails: malformed lines are logged in the report and
/// skipped, and `accepted + rejected` accounts for every non-comment,
/// non-blank line. Strict mode returns the first malformed line as an error.
pub fn parse_price_list(
    text: &str,
    strict: bool,
) -> Result<(Vec<PriceRecord>, ParseReport), ParseError> {
    let mut records = Vec::new();
    let mut report = ParseReport::default();
    let mut seen: BTreeMap<(Ticker, NaiveDate), ()> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(record) => {
                let key = (record.ticker.clone(), record.date);
                if seen.insert(key.clone(), ()).is_some() {
                    report.duplicates.push(key);
                }
                records.push(record);
                report.accepted += 1;
            }
            Err((column, reason)) => {
                if strict {
                    return Err(ParseError {
                        line: line_no,
                        column,
                        reason,
                    });
                }
                report.rejected.push((line_no, reason));
            }
        }
    }
    Ok((records, report))
}

/// Render records back into the canonical line grammar, volume included
/// whenever the record carries one.
pub fn serialize_records(records: &[PriceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&r.ticker.0);
        out.push(',');
        out.push_str(&r.date.format("%Y-%m-%d").to_string());
        out.push(',');
        out.push_str(&format!("{}", r.close));
        if let Some(v) = r.volume {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// One cell of the assembled panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelCell {
    pub close: f64,
    pub volume: Option<u64>,
}

/// Date-by-ticker grid of daily closes. Missing trades are absent cells,
/// never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    tickers: Vec<Ticker>,
    dates: Vec<NaiveDate>,
    /// Row-major over tickers: `cells[ticker_idx * dates.len() + date_idx]`.
    cells: Vec<Option<PanelCell>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PanelError {
    #[error("conflicting closes for {ticker} on {date}: {first} vs {second}")]
    ConflictingClose {
        ticker: Ticker,
        date: NaiveDate,
        first: f64,
        second: f64,
    },
    #[error("conflicting volumes for {ticker} on {date}: {first} vs {second}")]
    ConflictingVolume {
        ticker: Ticker,
        date: NaiveDate,
        first: u64,
        second: u64,
    },
}

impl PricePanel {
    pub fn tickers(&self) -> &[Ticker] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn cell(&self, ticker: &Ticker, date: NaiveDate) -> Option<PanelCell> {
        let ti = self.tickers.iter().position(|t| t == ticker)?;
        let di = self.dates.binary_search(&date).ok()?;
        self.cells[ti * self.dates.len() + di]
    }

    /// The (date, close) series for one ticker, dates ascending.
    pub fn series(&self, ticker: &Ticker) -> Vec<(NaiveDate, f64)> {
        let Some(ti) = self.tickers.iter().position(|t| t == ticker) else {
            return Vec::new();
        };
        self.dates
            .iter()
            .enumerate()
            .filter_map(|(di, &d)| {
                self.cells[ti * self.dates.len() + di].map(|c| (d, c.close))
            })
            .collect()
    }

    /// Restrict the panel to dates within `[from, to]` (either bound optional).
    pub fn clipped(&self, from: Option<NaiveDate>, to: Option<NaiveDate>) -> PricePanel {
        let keep: Vec<usize> = self
            .dates
            .iter()
            .enumerate()
            .filter(|(_, &d)| from.is_none_or(|f| d >= f) && to.is_none_or(|t| d <= t))
            .map(|(i, _)| i)
            .collect();
        let dates: Vec<NaiveDate> = keep.iter().map(|&i| self.dates[i]).collect();
        let mut cells = Vec::with_capacity(self.tickers.len() * dates.len());
        for ti in 0..self.tickers.len() {
            for &di in &keep {
                cells.push(self.cells[ti * self.dates.len() + di]);
            }
        }
        PricePanel {
            tickers: self.tickers.clone(),
            dates,
            cells,
        }
    }

    /// All records present in the panel, ordered by ticker then date.
    pub fn records(&self) -> Vec<PriceRecord> {
        let mut out = Vec::new();
        for (ti, ticker) in self.tickers.iter().enumerate() {
            for (di, &date) in self.dates.iter().enumerate() {
                if let Some(cell) = self.cells[ti * self.dates.len() + di] {
                    out.push(PriceRecord {
                        ticker: ticker.clone(),
                        date,
                        close: cell.close,
                        volume: cell.volume,
                    });
                }
            }
        }
        out
    }
}

/// Assemble records into a panel sorted by date, merging identical duplicates
/// and rejecting conflicting ones.
pub fn build_panel(records: &[PriceRecord]) -> Result<PricePanel, PanelError> {
    // Sorted maps keep the result (and any conflict report) independent of
    // input order.
    let mut grid: BTreeMap<Ticker, BTreeMap<NaiveDate, PanelCell>> = BTreeMap::new();
    for r in records {
        let per_ticker = grid.entry(r.ticker.clone()).or_default();
        match per_ticker.get_mut(&r.date) {
            None => {
                per_ticker.insert(
                    r.date,
                    PanelCell {
                        close: r.close,
                        volume: r.volume,
                    },
                );
            }
            Some(cell) => {
                if cell.close != r.close {
                    let (first, second) = if cell.close <= r.close {
                        (cell.close, r.close)
                    } else {
                        (r.close, cell.close)
                    };
                    return Err(PanelError::ConflictingClose {
                        ticker: r.ticker.clone(),
                        date: r.date,
                        first,
                        second,
                    });
                }
                match (cell.volume, r.volume) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(PanelError::ConflictingVolume {
                            ticker: r.ticker.clone(),
                            date: r.date,
                            first: a.min(b),
                            second: a.max(b),
                        });
                    }
                    (None, Some(b)) => cell.volume = Some(b),
                    _ => {}
                }
            }
        }
    }

    let tickers: Vec<Ticker> = grid.keys().cloned().collect();
    let mut dates: Vec<NaiveDate> = grid
        .values()
        .flat_map(|m| m.keys().copied())
        .collect();
    dates.sort_unstable();
    dates.dedup();

    let mut cells = vec![None; tickers.len() * dates.len()];
    for (ti, ticker) in tickers.iter().enumerate() {
        for (date, cell) in &grid[ticker] {
            let di = dates.binary_search(date).expect("date collected above");
            cells[ti * dates.len() + di] = Some(*cell);
        }
    }
    Ok(PricePanel {
        tickers,
        dates,
        cells,
    })
}

/// Per-ticker gap months plus overall and per-month coverage fractions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Present cells divided by the full ticker × date grid size.
    pub coverage: f64,
    /// Coverage fraction over the dates of each month in the panel span.
    pub monthly_coverage: Vec<(YearMonth, f64)>,
    /// Months (within the panel span) where a ticker has no price at all.
    pub gaps: Vec<(Ticker, Vec<YearMonth>)>,
}

pub fn validate_panel(panel: &PricePanel) -> ValidationReport {
    let n_tickers = panel.tickers.len();
    let n_dates = panel.dates.len();
    if n_tickers == 0 || n_dates == 0 {
        return ValidationReport {
            coverage: 0.0,
            monthly_coverage: Vec::new(),
            gaps: Vec::new(),
        };
    }

    let present = panel.cells.iter().filter(|c| c.is_some()).count();
    let coverage = present as f64 / (n_tickers * n_dates) as f64;

    let span = YearMonth::range_inclusive(
        YearMonth::of(panel.dates[0]),
        YearMonth::of(*panel.dates.last().expect("nonempty")),
    );

    let mut monthly_coverage = Vec::with_capacity(span.len());
    let mut gaps: Vec<(Ticker, Vec<YearMonth>)> = Vec::new();
    for (ti, ticker) in panel.tickers.iter().enumerate() {
        let mut ticker_gaps = Vec::new();
        for &ym in &span {
            let has_price = panel
                .dates
                .iter()
                .enumerate()
                .any(|(di, &d)| YearMonth::of(d) == ym && panel.cells[ti * n_dates + di].is_some());
            if !has_price {
                ticker_gaps.push(ym);
            }
        }
        if !ticker_gaps.is_empty() {
            gaps.push((ticker.clone(), ticker_gaps));
        }
    }
    for &ym in &span {
        let date_idxs: Vec<usize> = panel
            .dates
            .iter()
            .enumerate()
            .filter(|(_, &d)| YearMonth::of(d) == ym)
            .map(|(i, _)| i)
            .collect();
        let frac = if date_idxs.is_empty() {
            0.0
        } else {
            let month_present: usize = (0..n_tickers)
                .map(|ti| {
                    date_idxs
                        .iter()
                        .filter(|&&di| panel.cells[ti * n_dates + di].is_some())
                        .count()
                })
                .sum();
            month_present as f64 / (n_tickers * date_idxs.len()) as f64
        };
        monthly_coverage.push((ym, frac));
    }

    ValidationReport {
        coverage,
        monthly_coverage,
        gaps,
    }
}
