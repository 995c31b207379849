//! Monthly return construction: first-of-month sampling, dividend
//! adjustment, log returns, de-annualized risk-free rates, excess returns,
//! and the equal-weighted portfolio series.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dates::YearMonth;
use crate::pricelist::{PricePanel, Ticker};

/// Which series a return belongs to: a stock, the pooled portfolio, or the
/// market index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesLabel {
    Stock(Ticker),
    Portfolio,
    Market,
}

impl fmt::Display for SeriesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesLabel::Stock(t) => f.write_str(t.as_str()),
            SeriesLabel::Portfolio => f.write_str("PORTFOLIO"),
            SeriesLabel::Market => f.write_str("MARKET"),
        }
    }
}

/// Monthly log returns for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub label: SeriesLabel,
    pub periods: Vec<YearMonth>,
    pub values: Vec<f64>,
}

/// Monthly excess returns (return minus the risk-free rate of the same month).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcessReturnSeries {
    pub label: SeriesLabel,
    pub periods: Vec<YearMonth>,
    pub values: Vec<f64>,
}

/// Risk-free series: annual effective yields with their monthly equivalents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskFreeSeries {
    pub periods: Vec<YearMonth>,
    pub annual_yield: Vec<f64>,
    pub monthly_rate: Vec<f64>,
}

/// Cash dividend going ex in a given month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DividendEvent {
    pub ticker: Ticker,
    pub ex_month: YearMonth,
    pub amount: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReturnsError {
    #[error("annual yield {0} is at or below -1, monthly rate undefined")]
    YieldOutOfDomain(f64),
    #[error("dividend amount {0} is negative")]
    NegativeDividend(f64),
}

/// Price entering a month: the observed close plus any dividend added back
/// for the return into that month.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthlyPrice {
    pub close: f64,
    /// close + dividend of the month; equals `close` when no dividend.
    pub with_dividend: f64,
}

/// Per-ticker monthly price table keyed by month.
pub type MonthlyPrices = BTreeMap<Ticker, BTreeMap<YearMonth, MonthlyPrice>>;

/// First available price in each month of a dated series.
///
/// The sampling convention is the close on the first trading day on or after
/// the 1st; months with no observation are absent.
pub fn monthly_first(series: &[(chrono::NaiveDate, f64)]) -> BTreeMap<YearMonth, f64> {
    let mut out = BTreeMap::new();
    let mut sorted: Vec<_> = series.to_vec();
    sorted.sort_by_key(|(d, _)| *d);
    for (date, price) in sorted {
        out.entry(YearMonth::of(date)).or_insert(price);
    }
    out
}

/// Sample the panel down to one price per ticker per month.
pub fn monthly_sample(panel: &PricePanel) -> MonthlyPrices {
    let mut out = MonthlyPrices::new();
    for ticker in panel.tickers() {
        let per_month = monthly_first(&panel.series(ticker));
        let table: BTreeMap<YearMonth, MonthlyPrice> = per_month
            .into_iter()
            .map(|(ym, close)| {
                (
                    ym,
                    MonthlyPrice {
                        close,
                        with_dividend: close,
                    },
                )
            })
            .collect();
        out.insert(ticker.clone(), table);
    }
    out
}

/// Add dividends back to the price of their ex-month, so the return into
/// that month is `log(P_t + D_t) - log(P_{t-1})`. The return out of the
/// ex-month keeps the raw close. Dividends for unknown tickers are returned
/// as warnings and ignored.
pub fn dividend_adjust(
    mut prices: MonthlyPrices,
    dividends: &[DividendEvent],
) -> Result<(MonthlyPrices, Vec<String>), ReturnsError> {
    let mut warnings = Vec::new();
    for event in dividends {
        if event.amount < 0.0 {
            return Err(ReturnsError::NegativeDividend(event.amount));
        }
        match prices.get_mut(&event.ticker) {
            None => warnings.push(format!(
                "dividend for unknown ticker {} ignored",
                event.ticker
            )),
            Some(table) => match table.get_mut(&event.ex_month) {
                None => warnings.push(format!(
                    "dividend for {} in {} falls outside the sampled months, ignored",
                    event.ticker, event.ex_month
                )),
                Some(price) => price.with_dividend += event.amount,
            },
        }
    }
    Ok((prices, warnings))
}

/// Monthly log returns for one ticker's price table.
///
/// `r_t = log(P_t^adj) - log(P_{t-1})` for consecutive calendar months only;
/// a missing month breaks the chain and no return spans the gap. Fewer than
/// two prices yield an empty series.
pub fn log_returns(ticker: &Ticker, prices: &BTreeMap<YearMonth, MonthlyPrice>) -> ReturnSeries {
    let mut periods = Vec::new();
    let mut values = Vec::new();
    for (&month, price) in prices {
        if let Some(prev) = prices.get(&month.prev()) {
            periods.push(month);
            values.push(price.with_dividend.ln() - prev.close.ln());
        }
    }
    ReturnSeries {
        label: SeriesLabel::Stock(ticker.clone()),
        periods,
        values,
    }
}

/// Log returns over a plain month→price map (used for the market index).
pub fn log_returns_from_levels(
    label: SeriesLabel,
    levels: &BTreeMap<YearMonth, f64>,
) -> ReturnSeries {
    let mut periods = Vec::new();
    let mut values = Vec::new();
    for (&month, &level) in levels {
        if let Some(&prev) = levels.get(&month.prev()) {
            periods.push(month);
            values.push(level.ln() - prev.ln());
        }
    }
    ReturnSeries {
        label,
        periods,
        values,
    }
}

/// Monthly rate equivalent to an annual effective yield:
/// `(1 + y)^(1/12) - 1`.
pub fn deannualize(annual_yield: f64) -> Result<f64, ReturnsError> {
    if annual_yield <= -1.0 {
        return Err(ReturnsError::YieldOutOfDomain(annual_yield));
    }
    Ok((1.0 + annual_yield).powf(1.0 / 12.0) - 1.0)
}

/// Inverse of [`deannualize`]: `(1 + m)^12 - 1`.
pub fn annualize(monthly_rate: f64) -> f64 {
    (1.0 + monthly_rate).powi(12) - 1.0
}

impl RiskFreeSeries {
    /// Build from (month, annual yield) pairs, de-annualizing each yield.
    pub fn from_annual(pairs: &[(YearMonth, f64)]) -> Result<Self, ReturnsError> {
        let mut sorted: Vec<_> = pairs.to_vec();
        sorted.sort_by_key(|(m, _)| *m);
        let mut periods = Vec::with_capacity(sorted.len());
        let mut annual = Vec::with_capacity(sorted.len());
        let mut monthly = Vec::with_capacity(sorted.len());
        for (month, y) in sorted {
            periods.push(month);
            annual.push(y);
            monthly.push(deannualize(y)?);
        }
        Ok(Self {
            periods,
            annual_yield: annual,
            monthly_rate: monthly,
        })
    }

    pub fn monthly_rate_for(&self, month: YearMonth) -> Option<f64> {
        self.periods
            .iter()
            .position(|&m| m == month)
            .map(|i| self.monthly_rate[i])
    }
}

/// Return minus risk-free, joined on the months both series cover.
///
/// An empty intersection yields an empty series plus a warning.
pub fn excess_returns(
    returns: &ReturnSeries,
    rf: &RiskFreeSeries,
) -> (ExcessReturnSeries, Option<String>) {
    let mut periods = Vec::new();
    let mut values = Vec::new();
    for (i, &month) in returns.periods.iter().enumerate() {
        if let Some(rate) = rf.monthly_rate_for(month) {
            periods.push(month);
            values.push(returns.values[i] - rate);
        }
    }
    let warning = if periods.is_empty() {
        Some(format!(
            "no overlapping months between {} returns and the risk-free series",
            returns.label
        ))
    } else {
        None
    };
    (
        ExcessReturnSeries {
            label: returns.label.clone(),
            periods,
            values,
        },
        warning,
    )
}

/// Portfolio membership of one month: which stocks carried a value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioMonth {
    pub month: YearMonth,
    pub tickers: Vec<SeriesLabel>,
    pub count: usize,
}

/// Equal-weighted portfolio: `R_t` is the mean of the stock excess returns
/// present in month t, divided by the number of stocks present that month.
/// Months with no stocks are absent. Membership is recorded per month.
pub fn portfolio_excess(series: &[ExcessReturnSeries]) -> (ExcessReturnSeries, Vec<PortfolioMonth>) {
    let mut by_month: BTreeMap<YearMonth, Vec<(SeriesLabel, f64)>> = BTreeMap::new();
    for s in series {
        for (i, &month) in s.periods.iter().enumerate() {
            by_month
                .entry(month)
                .or_default()
                .push((s.label.clone(), s.values[i]));
        }
    }
    let mut periods = Vec::new();
    let mut values = Vec::new();
    let mut membership = Vec::new();
    for (month, mut entries) in by_month {
        if entries.is_empty() {
            continue;
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let count = entries.len();
        let sum: f64 = entries.iter().map(|(_, v)| v).sum();
        periods.push(month);
        values.push(sum / count as f64);
        membership.push(PortfolioMonth {
            month,
            tickers: entries.into_iter().map(|(l, _)| l).collect(),
            count,
        });
    }
    (
        ExcessReturnSeries {
            label: SeriesLabel::Portfolio,
            periods,
            values,
        },
        membership,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricelist::{build_panel, PriceRecord};
    use chrono::NaiveDate;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn tk(s: &str) -> Ticker {
        Ticker::new(s).unwrap()
    }

    fn panel_from(entries: &[(&str, &str, f64)]) -> PricePanel {
        let records: Vec<PriceRecord> = entries
            .iter()
            .map(|(t, date, close)| PriceRecord {
                ticker: tk(t),
                date: d(date),
                close: *close,
                volume: None,
            })
            .collect();
        build_panel(&records).unwrap()
    }

    #[test]
    fn samples_first_of_month_verbatim() {
        let panel = panel_from(&[
            ("AB", "2007-03-01", 100.0),
            ("AB", "2007-03-15", 105.0),
            ("AB", "2007-04-01", 110.0),
        ]);
        let prices = monthly_sample(&panel);
        let table = &prices[&tk("AB")];
        assert_eq!(table[&ym("2007-03")].close, 100.0);
        assert_eq!(table[&ym("2007-04")].close, 110.0);
    }

    #[test]
    fn samples_first_trading_day_after_the_first() {
        let panel = panel_from(&[("AB", "2007-03-03", 102.0), ("AB", "2007-03-20", 99.0)]);
        let prices = monthly_sample(&panel);
        assert_eq!(prices[&tk("AB")][&ym("2007-03")].close, 102.0);
    }

    #[test]
    fn month_without_prices_is_absent() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0), ("AB", "2007-05-02", 120.0)]);
        let prices = monthly_sample(&panel);
        assert!(!prices[&tk("AB")].contains_key(&ym("2007-04")));
    }

    #[test]
    fn dividend_adds_to_ex_month_price_only() {
        let panel = panel_from(&[
            ("AB", "2007-03-01", 100.0),
            ("AB", "2007-04-02", 99.0),
            ("AB", "2007-05-01", 99.0),
        ]);
        let (prices, warnings) = dividend_adjust(
            monthly_sample(&panel),
            &[DividendEvent {
                ticker: tk("AB"),
                ex_month: ym("2007-04"),
                amount: 2.0,
            }],
        )
        .unwrap();
        assert!(warnings.is_empty());
        let series = log_returns(&tk("AB"), &prices[&tk("AB")]);
        // Into the ex-month: log(101/100); out of it: log(99/99).
        assert!((series.values[0] - (101.0_f64 / 100.0).ln()).abs() < 1e-12);
        assert!(series.values[1].abs() < 1e-12);
    }

    #[test]
    fn zero_dividend_is_identity() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0), ("AB", "2007-04-02", 110.0)]);
        let base = monthly_sample(&panel);
        let (adjusted, _) = dividend_adjust(
            base.clone(),
            &[DividendEvent {
                ticker: tk("AB"),
                ex_month: ym("2007-04"),
                amount: 0.0,
            }],
        )
        .unwrap();
        assert_eq!(base, adjusted);
    }

    #[test]
    fn unknown_ticker_dividend_warns_and_is_ignored() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0)]);
        let base = monthly_sample(&panel);
        let (adjusted, warnings) = dividend_adjust(
            base.clone(),
            &[DividendEvent {
                ticker: tk("ZZ"),
                ex_month: ym("2007-03"),
                amount: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(base, adjusted);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("ZZ"));
    }

    #[test]
    fn log_return_of_equal_prices_is_zero() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0), ("AB", "2007-04-02", 100.0)]);
        let series = log_returns(&tk("AB"), &monthly_sample(&panel)[&tk("AB")]);
        assert_eq!(series.values, vec![0.0]);
        assert_eq!(series.periods, vec![ym("2007-04")]);
    }

    #[test]
    fn log_return_matches_ln_ratio() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0), ("AB", "2007-04-02", 110.0)]);
        let series = log_returns(&tk("AB"), &monthly_sample(&panel)[&tk("AB")]);
        assert!((series.values[0] - 0.0953102).abs() < 1e-6);
    }

    #[test]
    fn gap_month_breaks_the_chain() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0), ("AB", "2007-05-02", 120.0)]);
        let series = log_returns(&tk("AB"), &monthly_sample(&panel)[&tk("AB")]);
        assert!(series.values.is_empty());
    }

    #[test]
    fn fewer_than_two_prices_yield_empty_series() {
        let panel = panel_from(&[("AB", "2007-03-01", 100.0)]);
        let series = log_returns(&tk("AB"), &monthly_sample(&panel)[&tk("AB")]);
        assert!(series.values.is_empty());
    }

    #[test]
    fn deannualize_known_values() {
        assert_eq!(deannualize(0.0).unwrap(), 0.0);
        assert!((deannualize(0.126825).unwrap() - 0.01).abs() < 1e-6);
        assert!((deannualize(-0.5).unwrap() - (-0.056126)).abs() < 1e-6);
        assert!(deannualize(-1.0).is_err());
        assert!(deannualize(-1.5).is_err());
    }

    #[test]
    fn excess_is_valuewise_subtraction() {
        let returns = ReturnSeries {
            label: SeriesLabel::Stock(tk("AB")),
            periods: vec![ym("2007-04")],
            values: vec![0.02],
        };
        let rf = RiskFreeSeries {
            periods: vec![ym("2007-04")],
            annual_yield: vec![0.126825],
            monthly_rate: vec![0.01],
        };
        let (excess, warning) = excess_returns(&returns, &rf);
        assert!(warning.is_none());
        assert!((excess.values[0] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn excess_joins_on_common_months() {
        let returns = ReturnSeries {
            label: SeriesLabel::Stock(tk("AB")),
            periods: vec![ym("2007-01"), ym("2007-02")],
            values: vec![0.02, 0.03],
        };
        let rf = RiskFreeSeries {
            periods: vec![ym("2007-02"), ym("2007-03")],
            annual_yield: vec![0.0, 0.0],
            monthly_rate: vec![0.0, 0.0],
        };
        let (excess, _) = excess_returns(&returns, &rf);
        assert_eq!(excess.periods, vec![ym("2007-02")]);
        assert_eq!(excess.values, vec![0.03]);
    }

    #[test]
    fn empty_intersection_warns() {
        let returns = ReturnSeries {
            label: SeriesLabel::Market,
            periods: vec![ym("2007-01")],
            values: vec![0.02],
        };
        let rf = RiskFreeSeries {
            periods: vec![ym("2008-01")],
            annual_yield: vec![0.0],
            monthly_rate: vec![0.0],
        };
        let (excess, warning) = excess_returns(&returns, &rf);
        assert!(excess.values.is_empty());
        assert!(warning.is_some());
    }

    fn excess(t: &str, months: &[&str], values: &[f64]) -> ExcessReturnSeries {
        ExcessReturnSeries {
            label: SeriesLabel::Stock(tk(t)),
            periods: months.iter().map(|m| ym(m)).collect(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn portfolio_averages_per_month() {
        let a = excess("AB", &["2007-01", "2007-02"], &[0.01, 0.03]);
        let b = excess("CD", &["2007-01", "2007-02"], &[0.03, 0.01]);
        let (portfolio, membership) = portfolio_excess(&[a, b]);
        assert_eq!(portfolio.values, vec![0.02, 0.02]);
        assert_eq!(membership[0].count, 2);
    }

    #[test]
    fn portfolio_of_identical_series_is_that_series() {
        let series: Vec<_> = (0..10)
            .map(|_| excess("AB", &["2007-01", "2007-02"], &[0.015, -0.02]))
            .collect();
        let (portfolio, _) = portfolio_excess(&series);
        assert!((portfolio.values[0] - 0.015).abs() < 1e-15);
        assert!((portfolio.values[1] - (-0.02)).abs() < 1e-15);
    }

    #[test]
    fn portfolio_divides_by_stocks_present() {
        let a = excess("AB", &["2007-01", "2007-02"], &[0.01, 0.02]);
        let b = excess("CD", &["2007-01"], &[0.03]);
        let c = excess("EF", &["2007-01"], &[0.05]);
        let (portfolio, membership) = portfolio_excess(&[a, b, c]);
        // Hand-computed means: Jan (0.01+0.03+0.05)/3, Feb 0.02/1.
        assert!((portfolio.values[0] - 0.03).abs() < 1e-12);
        assert!((portfolio.values[1] - 0.02).abs() < 1e-12);
        assert_eq!(membership[0].count, 3);
        assert_eq!(membership[1].count, 1);
    }
}
