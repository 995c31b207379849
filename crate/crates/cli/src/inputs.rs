//! Readers for the toolkit's input files. All inputs are UTF-8 text with
//! `#` comment lines and blank lines skipped.

use std::path::Path;

use capmkit::{DividendEvent, RiskFreeSeries, Ticker, YearMonth};
use chrono::NaiveDate;

use crate::error::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(err) if err.kind() == std::io::ErrorKind::NotFound => {
            Err(CliError::MissingFile(path.to_path_buf()))
        }
        Err(err) => Err(CliError::Io(format!("{}: {err}", path.display()))),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim_end_matches('\r')))
        .filter(|(_, line)| !line.trim().is_empty() && !line.trim_start().starts_with('#'))
}

fn bad(path: &Path, line_no: usize, message: impl Into<String>) -> CliError {
    CliError::BadInput {
        path: path.to_path_buf(),
        message: format!("line {line_no}: {}", message.into()),
    }
}

/// Daily index levels: `YYYY-MM-DD,level` with positive levels.
pub fn load_index_series(path: &Path) -> Result<Vec<(NaiveDate, f64)>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let (date_str, level_str) = line
            .split_once(',')
            .ok_or_else(|| bad(path, line_no, "expected YYYY-MM-DD,level"))?;
        let date = NaiveDate::parse_from_str(date_str.trim(), "%Y-%m-%d")
            .map_err(|_| bad(path, line_no, format!("invalid date `{date_str}`")))?;
        let level: f64 = level_str
            .trim()
            .parse()
            .map_err(|_| bad(path, line_no, format!("invalid level `{level_str}`")))?;
        if level.is_nan() || level <= 0.0 {
            return Err(bad(path, line_no, format!("non-positive level {level}")));
        }
        out.push((date, level));
    }
    out.sort_by_key(|(d, _)| *d);
    Ok(out)
}

/// Monthly risk-free annual yields: `YYYY-MM,annual_yield` as fractions.
pub fn load_riskfree(path: &Path) -> Result<RiskFreeSeries, CliError> {
    let text = read_text(path)?;
    let mut pairs = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let (month_str, yield_str) = line
            .split_once(',')
            .ok_or_else(|| bad(path, line_no, "expected YYYY-MM,annual_yield"))?;
        let month: YearMonth = month_str
            .trim()
            .parse()
            .map_err(|_| bad(path, line_no, format!("invalid month `{month_str}`")))?;
        let annual: f64 = yield_str
            .trim()
            .parse()
            .map_err(|_| bad(path, line_no, format!("invalid yield `{yield_str}`")))?;
        pairs.push((month, annual));
    }
    RiskFreeSeries::from_annual(&pairs).map_err(CliError::from)
}

/// Dividend events: `TICKER,YYYY-MM,amount` with non-negative amounts.
pub fn load_dividends(path: &Path) -> Result<Vec<DividendEvent>, CliError> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (line_no, line) in data_lines(&text) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(path, line_no, "expected TICKER,YYYY-MM,amount"));
        }
        let ticker = Ticker::new(fields[0].trim())
            .map_err(|e| bad(path, line_no, e.to_string()))?;
        let ex_month: YearMonth = fields[1]
            .trim()
            .parse()
            .map_err(|_| bad(path, line_no, format!("invalid month `{}`", fields[1])))?;
        let amount: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| bad(path, line_no, format!("invalid amount `{}`", fields[2])))?;
        if amount < 0.0 {
            return Err(bad(path, line_no, format!("negative dividend {amount}")));
        }
        out.push(DividendEvent {
            ticker,
            ex_month,
            amount,
        });
    }
    Ok(out)
}
