//! Estimation toolkit for the single-factor market model on thin equity
//! markets: ingest daily price lists, build monthly dividend-adjusted log
//! returns and excess returns, regress stocks and the pooled equal-weighted
//! portfolio on the market index, and judge the fit with hypothesis tests
//! and residual diagnostics. A simulation module supplies synthetic markets
//! with known ground truth for validating the whole pipeline.

pub mod capm;
pub mod dates;
pub mod diagnostics;
pub mod numfmt;
pub mod pricelist;
pub mod returns;
pub mod simulation;
pub mod special;

pub use capm::{
    estimate_portfolio_capm, estimate_stock_capm, hypothesis_test, ols_simple,
    sharpe_lintner_prediction, AlphaRow, BetaRow, CapmPrediction, Hypothesis, HypothesisOutcome,
    RegressionError, RegressionResult,
};
pub use dates::YearMonth;
pub use diagnostics::{
    acf, durbin_watson, trend_regression, white_noise_check, AcfResult, DiagnosticsError, TrendFit,
};
pub use pricelist::{
    build_panel, parse_price_list, serialize_records, validate_panel, PanelError, ParseError,
    ParseReport, PricePanel, PriceRecord, Ticker, ValidationReport,
};
pub use returns::{
    annualize, deannualize, dividend_adjust, excess_returns, log_returns, log_returns_from_levels,
    monthly_first, monthly_sample, portfolio_excess, DividendEvent, ExcessReturnSeries,
    MonthlyPrice, MonthlyPrices, PortfolioMonth, ReturnSeries, ReturnsError, RiskFreeSeries,
    SeriesLabel,
};
pub use simulation::{
    default_base_prices, generate_fixture_bundle, generate_market, generate_pricelist,
    recovery_experiment, simulated_ticker, FixtureBundle, RecoveryReport, SimulationError,
    SimulationSpec, DEFAULT_INDEX_BASE,
};
pub use special::{student_t_critical, student_t_sf, SpecialError};
