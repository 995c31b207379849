//! Synthetic markets with known ground truth, used both to validate the
//! estimator (confidence-interval coverage, bias) and to generate parser
//! fixtures whose true returns are known exactly.
//!
//! All randomness comes from ChaCha8 seeded from the spec, so every series,
//! fixture, and report is reproducible bit-for-bit across platforms. The
//! generator algorithm is part of the fixture contract and must not change
//! silently.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capm::{estimate_stock_capm, student_t_critical, RegressionError};
use crate::dates::YearMonth;
use crate::numfmt::format_sig;
use crate::pricelist::Ticker;
use crate::returns::{deannualize, ExcessReturnSeries, ReturnsError, SeriesLabel};

/// First month of every synthetic panel.
const BASE_YEAR: i32 = 2000;
const BASE_MONTH: u32 = 1;

/// Seed offset for the intra-month price wiggle stream, so daily noise never
/// perturbs the monthly return draws.
const WIGGLE_STREAM: u64 = 0xD1B5_4A32_D192_ED03;
/// Seed offset for the index-level wiggle stream.
const INDEX_WIGGLE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;
/// Daily log-step standard deviation of the intra-month wiggle.
const WIGGLE_SD: f64 = 0.002;

/// Ground-truth parameters of a synthetic market.
///
/// `n_months` counts monthly price observations; the generated return series
/// are one shorter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n_stocks: usize,
    pub n_months: usize,
    pub true_betas: Vec<f64>,
    pub true_alphas: Vec<f64>,
    pub market_mean: f64,
    pub market_sd: f64,
    pub idio_sd: f64,
    pub rf_annual: f64,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimulationError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("recovery experiment needs at least {required} trials, got {got}")]
    TooFewTrials { required: usize, got: usize },
    #[error(transparent)]
    Returns(#[from] ReturnsError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let fail = |msg: String| Err(SimulationError::InvalidSpec(msg));
        if self.n_stocks == 0 {
            return fail("n_stocks must be positive".into());
        }
        if self.n_months < 3 {
            return fail(format!("n_months must be at least 3, got {}", self.n_months));
        }
        if self.market_sd.is_nan() || self.market_sd <= 0.0 {
            return fail(format!("market_sd must be positive, got {}", self.market_sd));
        }
        if self.idio_sd.is_nan() || self.idio_sd < 0.0 {
            return fail(format!("idio_sd must be non-negative, got {}", self.idio_sd));
        }
        if self.true_betas.len() != self.n_stocks {
            return fail(format!(
                "true_betas has {} entries for {} stocks",
                self.true_betas.len(),
                self.n_stocks
            ));
        }
        if self.true_alphas.len() != self.n_stocks {
            return fail(format!(
                "true_alphas has {} entries for {} stocks",
                self.true_alphas.len(),
                self.n_stocks
            ));
        }
        if self.rf_annual <= -1.0 {
            return fail(format!("rf_annual must exceed -1, got {}", self.rf_annual));
        }
        Ok(())
    }

    /// Months carrying a price observation: n_months from the base month.
    pub fn price_months(&self) -> Vec<YearMonth> {
        let start = YearMonth::new(BASE_YEAR, BASE_MONTH).expect("base month");
        let mut out = Vec::with_capacity(self.n_months);
        let mut m = start;
        for _ in 0..self.n_months {
            out.push(m);
            m = m.next();
        }
        out
    }

    /// Months carrying a return observation (one fewer than price months).
    pub fn return_months(&self) -> Vec<YearMonth> {
        self.price_months()[1..].to_vec()
    }
}

/// Starting prices used for fixture generation: spaced so the stocks trade
/// at visibly different magnitudes.
pub fn default_base_prices(n_stocks: usize) -> Vec<f64> {
    (0..n_stocks).map(|i| 80.0 + 40.0 * i as f64).collect()
}

/// Starting level of the simulated market index.
pub const DEFAULT_INDEX_BASE: f64 = 1000.0;

/// Deterministic ticker for simulated stock `i`: S followed by two base-26
/// letters (SAA, SAB, ...).
pub fn simulated_ticker(i: usize) -> Ticker {
    let hi = (i / 26) as u8;
    let lo = (i % 26) as u8;
    let name = format!("S{}{}", (b'A' + hi) as char, (b'A' + lo) as char);
    Ticker::new(&name).expect("generated ticker is valid")
}

/// Draw the market and stock excess-return series for a spec.
///
/// The market is iid normal; each stock is `alpha + beta * market + noise`
/// with iid normal noise of standard deviation `idio_sd`. Identical specs
/// produce identical output.
pub fn generate_market(
    spec: &SimulationSpec,
) -> Result<(ExcessReturnSeries, Vec<ExcessReturnSeries>), SimulationError> {
    spec.validate()?;
    let months = spec.return_months();
    let n = months.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let market_dist = Normal::new(spec.market_mean, spec.market_sd)
        .map_err(|e| SimulationError::InvalidSpec(e.to_string()))?;
    let market_values: Vec<f64> = (0..n).map(|_| market_dist.sample(&mut rng)).collect();

    let noise_dist = if spec.idio_sd > 0.0 {
        Some(Normal::new(0.0, spec.idio_sd).map_err(|e| SimulationError::InvalidSpec(e.to_string()))?)
    } else {
        None
    };

    let mut stocks = Vec::with_capacity(spec.n_stocks);
    for i in 0..spec.n_stocks {
        let values: Vec<f64> = market_values
            .iter()
            .map(|&m| {
                let noise = noise_dist.as_ref().map_or(0.0, |d| d.sample(&mut rng));
                spec.true_alphas[i] + spec.true_betas[i] * m + noise
            })
            .collect();
        stocks.push(ExcessReturnSeries {
            label: SeriesLabel::Stock(simulated_ticker(i)),
            periods: months.clone(),
            values,
        });
    }

    Ok((
        ExcessReturnSeries {
            label: SeriesLabel::Market,
            periods: months,
            values: market_values,
        },
        stocks,
    ))
}

/// Weekdays among days 1..=28 of a month — the synthetic trading calendar.
fn trading_days(ym: YearMonth) -> Vec<NaiveDate> {
    (1..=28)
        .filter_map(|day| NaiveDate::from_ymd_opt(ym.year(), ym.month(), day))
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect()
}

/// Monthly price path from a base price and a raw log-return series.
fn price_path(base: f64, raw_returns: &[f64]) -> Vec<f64> {
    let mut prices = Vec::with_capacity(raw_returns.len() + 1);
    prices.push(base);
    for &r in raw_returns {
        let last = *prices.last().expect("nonempty");
        prices.push(last * r.exp());
    }
    prices
}

fn daily_lines(
    out: &mut Vec<(NaiveDate, String, f64)>,
    name: &str,
    months: &[YearMonth],
    monthly_prices: &[f64],
    wiggle: &mut ChaCha8Rng,
) {
    let wiggle_dist = Normal::new(0.0, WIGGLE_SD).expect("constant sd");
    for (mi, &ym) in months.iter().enumerate() {
        let mut price = monthly_prices[mi];
        for (di, date) in trading_days(ym).into_iter().enumerate() {
            if di > 0 {
                price *= wiggle_dist.sample(wiggle).exp();
            }
            out.push((date, name.to_string(), price));
        }
    }
}

/// Lay a simulated market out as a daily price list in the parser grammar.
///
/// The first trading day of each month carries the exact monthly price, so
/// sampling the parsed panel recovers the generating returns; later days in
/// the month wiggle around it. `base_prices` holds one positive starting
/// price per stock.
pub fn generate_pricelist(
    spec: &SimulationSpec,
    base_prices: &[f64],
) -> Result<String, SimulationError> {
    spec.validate()?;
    if base_prices.len() != spec.n_stocks {
        return Err(SimulationError::InvalidSpec(format!(
            "{} base prices for {} stocks",
            base_prices.len(),
            spec.n_stocks
        )));
    }
    if base_prices.iter().any(|&p| p.is_nan() || p <= 0.0) {
        return Err(SimulationError::InvalidSpec(
            "base prices must be positive".into(),
        ));
    }

    let (_, stocks) = generate_market(spec)?;
    let rf_monthly = deannualize(spec.rf_annual)?;
    let months = spec.price_months();
    let mut wiggle = ChaCha8Rng::seed_from_u64(spec.seed ^ WIGGLE_STREAM);

    let mut lines: Vec<(NaiveDate, String, f64)> = Vec::new();
    for (i, stock) in stocks.iter().enumerate() {
        let raw_returns: Vec<f64> = stock.values.iter().map(|&x| x + rf_monthly).collect();
        let monthly_prices = price_path(base_prices[i], &raw_returns);
        daily_lines(
            &mut lines,
            simulated_ticker(i).as_str(),
            &months,
            &monthly_prices,
            &mut wiggle,
        );
    }

    lines.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut text = String::new();
    for (date, name, price) in lines {
        text.push_str(&format!(
            "{},{},{}\n",
            name,
            date.format("%Y-%m-%d"),
            format_sig(price, 12)
        ));
    }
    Ok(text)
}

/// Everything the pipeline needs to run end to end on synthetic data.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureBundle {
    /// Daily stock prices in the parser grammar.
    pub pricelist: String,
    /// Daily index levels, `YYYY-MM-DD,level` lines.
    pub index_csv: String,
    /// Monthly risk-free annual yields, `YYYY-MM,annual_yield` lines.
    pub riskfree_csv: String,
}

/// Generate the price list together with matching index and risk-free files.
pub fn generate_fixture_bundle(
    spec: &SimulationSpec,
    base_prices: &[f64],
    base_index_level: f64,
) -> Result<FixtureBundle, SimulationError> {
    if base_index_level.is_nan() || base_index_level <= 0.0 {
        return Err(SimulationError::InvalidSpec(
            "base index level must be positive".into(),
        ));
    }
    let pricelist = generate_pricelist(spec, base_prices)?;

    let (market, _) = generate_market(spec)?;
    let rf_monthly = deannualize(spec.rf_annual)?;
    let months = spec.price_months();
    let raw_returns: Vec<f64> = market.values.iter().map(|&x| x + rf_monthly).collect();
    let levels = price_path(base_index_level, &raw_returns);

    let mut wiggle = ChaCha8Rng::seed_from_u64(spec.seed ^ INDEX_WIGGLE_STREAM);
    let mut lines: Vec<(NaiveDate, String, f64)> = Vec::new();
    daily_lines(&mut lines, "INDEX", &months, &levels, &mut wiggle);
    let mut index_csv = String::from("# date,level\n");
    for (date, _, level) in lines {
        index_csv.push_str(&format!(
            "{},{}\n",
            date.format("%Y-%m-%d"),
            format_sig(level, 12)
        ));
    }

    let mut riskfree_csv = String::from("# month,annual_yield\n");
    for ym in &months {
        riskfree_csv.push_str(&format!("{},{}\n", ym, format_sig(spec.rf_annual, 10)));
    }

    Ok(FixtureBundle {
        pricelist,
        index_csv,
        riskfree_csv,
    })
}

/// Coverage and bias of the estimator over repeated draws from one spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub trials: usize,
    /// Fraction of fits whose 95% CI contained the true beta.
    pub beta_coverage: f64,
    /// Fraction of fits whose 95% CI contained the true alpha.
    pub alpha_coverage: f64,
    /// Mean of (estimate - truth) over all fits.
    pub beta_mean_bias: f64,
    pub alpha_mean_bias: f64,
    /// Mean reported standard error of the beta estimate.
    pub beta_mean_se: f64,
}

/// Repeatedly draw markets and refit, reporting 95% CI coverage and bias.
///
/// Trial `k` runs on seed `spec.seed + k`, so a run is reproducible and can
/// be partitioned deterministically.
pub fn recovery_experiment(
    spec: &SimulationSpec,
    trials: usize,
) -> Result<RecoveryReport, SimulationError> {
    spec.validate()?;
    if trials < 100 {
        return Err(SimulationError::TooFewTrials {
            required: 100,
            got: trials,
        });
    }
    let n_returns = spec.n_months - 1;
    let df = (n_returns - 2) as u32;
    let t_crit = student_t_critical(0.025, df).map_err(RegressionError::from)?;

    let mut beta_covered = 0usize;
    let mut alpha_covered = 0usize;
    let mut beta_bias_sum = 0.0;
    let mut alpha_bias_sum = 0.0;
    let mut beta_se_sum = 0.0;
    let mut fits = 0usize;

    for trial in 0..trials {
        let trial_spec = SimulationSpec {
            seed: spec.seed.wrapping_add(trial as u64),
            ..spec.clone()
        };
        let (market, stocks) = generate_market(&trial_spec)?;
        for (i, stock) in stocks.iter().enumerate() {
            let fit = estimate_stock_capm(stock, &market)?;
            let beta_margin = t_crit * fit.se_slope;
            if (fit.slope - spec.true_betas[i]).abs() <= beta_margin {
                beta_covered += 1;
            }
            let alpha_margin = t_crit * fit.se_intercept;
            if (fit.intercept - spec.true_alphas[i]).abs() <= alpha_margin {
                alpha_covered += 1;
            }
            beta_bias_sum += fit.slope - spec.true_betas[i];
            alpha_bias_sum += fit.intercept - spec.true_alphas[i];
            beta_se_sum += fit.se_slope;
            fits += 1;
        }
    }

    let fits_f = fits as f64;
    Ok(RecoveryReport {
        trials,
        beta_coverage: beta_covered as f64 / fits_f,
        alpha_coverage: alpha_covered as f64 / fits_f,
        beta_mean_bias: beta_bias_sum / fits_f,
        alpha_mean_bias: alpha_bias_sum / fits_f,
        beta_mean_se: beta_se_sum / fits_f,
    })
}
