//! Simple OLS estimation of the excess-return market model, with the
//! inference statistics and the two hypothesis tests applied to it.
//!
//! The regression is `R_t = intercept + slope * R_mt + e_t`, fitted per stock
//! and for the pooled portfolio. Standard errors use the residual variance
//! with n-2 degrees of freedom; p-values come from the Student-t
//! distribution.

use serde::Serialize;
use thiserror::Error;

use crate::returns::ExcessReturnSeries;
use crate::special::{student_t_sf, SpecialError};

pub use crate::special::student_t_critical;

/// Full inference output of a simple (one-regressor) OLS fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub t_slope: f64,
    pub t_intercept: f64,
    pub p_slope_two_sided: f64,
    pub p_intercept_two_sided: f64,
    pub r_squared: f64,
    pub n: usize,
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn degrees_of_freedom(&self) -> u32 {
        (self.n - 2) as u32
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RegressionError {
    #[error("need at least {required} observations, found {available}")]
    InsufficientData { required: usize, available: usize },
    #[error("regressor is constant, slope undefined")]
    DegenerateRegressor,
    #[error("x has {x} values but y has {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

fn two_sided_p(t: f64, df: u32) -> Result<f64, SpecialError> {
    if t.is_nan() {
        return Ok(f64::NAN);
    }
    Ok(2.0 * student_t_sf(t.abs(), df)?)
}

/// Least-squares fit of y on x with an intercept.
///
/// Requires n >= 3 and a non-constant regressor. A perfect fit yields zero
/// standard errors and infinite t statistics.
pub fn ols_simple(x: &[f64], y: &[f64]) -> Result<RegressionResult, RegressionError> {
    if x.len() != y.len() {
        return Err(RegressionError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(RegressionError::InsufficientData {
            required: 3,
            available: n,
        });
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - x_mean;
        let dy = y[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(RegressionError::DegenerateRegressor);
    }

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| yi - intercept - slope * xi)
        .collect();
    let sse: f64 = residuals.iter().map(|e| e * e).sum();

    let df = (n - 2) as u32;
    let sigma2 = sse / df as f64;
    let se_slope = (sigma2 / sxx).sqrt();
    let se_intercept = (sigma2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();

    let t_slope = slope / se_slope;
    let t_intercept = intercept / se_intercept;

    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };

    Ok(RegressionResult {
        slope,
        intercept,
        se_slope,
        se_intercept,
        t_slope,
        t_intercept,
        p_slope_two_sided: two_sided_p(t_slope, df)?,
        p_intercept_two_sided: two_sided_p(t_intercept, df)?,
        r_squared,
        n,
        residuals,
    })
}

/// Inner-join two excess series on their months, returning aligned values as
/// (market, other).
fn align(other: &ExcessReturnSeries, market: &ExcessReturnSeries) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, &month) in other.periods.iter().enumerate() {
        if let Some(j) = market.periods.iter().position(|&m| m == month) {
            x.push(market.values[j]);
            y.push(other.values[i]);
        }
    }
    (x, y)
}

/// Regress a stock's excess return on the market excess return.
pub fn estimate_stock_capm(
    stock: &ExcessReturnSeries,
    market: &ExcessReturnSeries,
) -> Result<RegressionResult, RegressionError> {
    let (x, y) = align(stock, market);
    ols_simple(&x, &y)
}

/// Regress the portfolio excess return on the market excess return.
pub fn estimate_portfolio_capm(
    portfolio: &ExcessReturnSeries,
    market: &ExcessReturnSeries,
) -> Result<RegressionResult, RegressionError> {
    let (x, y) = align(portfolio, market);
    ols_simple(&x, &y)
}

/// The two hypotheses examined on a fitted regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Two-sided test of a nonzero intercept (zero-beta rate).
    ZeroBetaNonzero,
    /// One-sided upper-tail test of a positive slope.
    PositivePriceOfRisk,
}

impl std::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Hypothesis::ZeroBetaNonzero => f.write_str("zero_beta_nonzero"),
            Hypothesis::PositivePriceOfRisk => f.write_str("positive_price_of_risk"),
        }
    }
}

/// Conventional significance levels, as fractions.
pub const SIGNIFICANCE_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisOutcome {
    pub name: Hypothesis,
    pub t_value: f64,
    pub df: u32,
    pub p_value: f64,
    /// Levels from [`SIGNIFICANCE_LEVELS`] at which the null is rejected.
    /// Rejection at 1% implies 5% and 10%, so the set is downward closed.
    pub rejected_at: Vec<f64>,
}

/// Run one of the two hypothesis tests on a fitted regression.
pub fn hypothesis_test(
    result: &RegressionResult,
    which: Hypothesis,
) -> Result<HypothesisOutcome, RegressionError> {
    let df = result.degrees_of_freedom();
    let (t_value, p_value) = match which {
        Hypothesis::ZeroBetaNonzero => (result.t_intercept, result.p_intercept_two_sided),
        Hypothesis::PositivePriceOfRisk => {
            let t = result.t_slope;
            let p = if t.is_nan() {
                f64::NAN
            } else {
                student_t_sf(t, df)?
            };
            (t, p)
        }
    };
    let rejected_at = SIGNIFICANCE_LEVELS
        .iter()
        .copied()
        .filter(|&level| p_value < level)
        .collect();
    Ok(HypothesisOutcome {
        name: which,
        t_value,
        df,
        p_value,
        rejected_at,
    })
}

/// The frictionless pricing relation `mu_v = r_f + (mu_m - r_f) * beta_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapmPrediction {
    pub mu_v: f64,
    pub r_f: f64,
    pub mu_m: f64,
    pub beta_v: f64,
}

pub fn sharpe_lintner_prediction(r_f: f64, mu_m: f64, beta_v: f64) -> CapmPrediction {
    CapmPrediction {
        mu_v: r_f + (mu_m - r_f) * beta_v,
        r_f,
        mu_m,
        beta_v,
    }
}

/// Slope-side table row: `name, beta, t_beta, se_beta, r2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaRow {
    pub name: String,
    pub beta: f64,
    pub t_beta: f64,
    pub se_beta: f64,
    pub r2: f64,
}

impl BetaRow {
    pub fn from_result(name: impl Into<String>, r: &RegressionResult) -> Self {
        Self {
            name: name.into(),
            beta: r.slope,
            t_beta: r.t_slope,
            se_beta: r.se_slope,
            r2: r.r_squared,
        }
    }
}

/// Intercept-side table row: `name, alpha, t_alpha, se_alpha, p_alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRow {
    pub name: String,
    pub alpha: f64,
    pub t_alpha: f64,
    pub se_alpha: f64,
    pub p_alpha: f64,
}

impl AlphaRow {
    pub fn from_result(name: impl Into<String>, r: &RegressionResult) -> Self {
        Self {
            name: name.into(),
            alpha: r.intercept,
            t_alpha: r.t_intercept,
            se_alpha: r.se_intercept,
            p_alpha: r.p_intercept_two_sided,
        }
    }
}
