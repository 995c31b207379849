//! Implementations of the six subcommands, sharing one estimation pipeline.

use std::path::Path;

use capmkit::{
    acf, build_panel, dividend_adjust, durbin_watson, estimate_portfolio_capm,
    estimate_stock_capm, excess_returns, hypothesis_test, log_returns, log_returns_from_levels,
    monthly_first, parse_price_list, portfolio_excess, serialize_records, trend_regression,
    validate_panel, DiagnosticsError, ExcessReturnSeries, Hypothesis, HypothesisOutcome,
    MonthlyPrices, ParseReport, PricePanel, RegressionError, RegressionResult, ReturnSeries,
    SeriesLabel, SimulationSpec, ValidationReport,
};
use chrono::NaiveDate;
use serde_json::json;

use crate::error::CliError;
use crate::inputs;
use crate::output::{data_num, table_num, write_table, OutputFormat, Table};
use crate::{DiagnoseArgs, EstimateArgs, ParseArgs, ReportArgs, ReturnsArgs, SimulateArgs};

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn load_panel(
    input: &Path,
    strict: bool,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<(PricePanel, ParseReport), CliError> {
    let text = inputs::read_text(input)?;
    let (records, report) = parse_price_list(&text, strict).map_err(|source| {
        CliError::StrictParse {
            path: input.to_path_buf(),
            source,
        }
    })?;
    let panel = build_panel(&records)?.clipped(from, to);
    Ok((panel, report))
}

fn write_parse_report(
    dir: &Path,
    report: &ParseReport,
    format: OutputFormat,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => {
            let value = serde_json::to_value(report).map_err(|e| CliError::Io(e.to_string()))?;
            crate::output::write_json_value(dir, "parse_report", &value)?;
        }
        OutputFormat::Csv => {
            let mut text = String::from("metric,value\n");
            text.push_str(&format!("accepted,{}\n", report.accepted));
            text.push_str(&format!("rejected,{}\n", report.rejected.len()));
            text.push_str(&format!("duplicates,{}\n", report.duplicates.len()));
            std::fs::write(dir.join("parse_report.csv"), text)?;

            let mut rejections = String::from("line,reason\n");
            for (line, reason) in &report.rejected {
                rejections.push_str(&format!("{line},{}\n", csv_escape(reason)));
            }
            std::fs::write(dir.join("rejections.csv"), rejections)?;

            let mut duplicates = String::from("ticker,date\n");
            for (ticker, date) in &report.duplicates {
                duplicates.push_str(&format!("{ticker},{}\n", date.format("%Y-%m-%d")));
            }
            std::fs::write(dir.join("duplicates.csv"), duplicates)?;
        }
    }
    Ok(())
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn write_validation_report(
    dir: &Path,
    report: &ValidationReport,
    format: OutputFormat,
) -> Result<(), CliError> {
    match format {
        OutputFormat::Json => {
            let value = serde_json::to_value(report).map_err(|e| CliError::Io(e.to_string()))?;
            crate::output::write_json_value(dir, "validation", &value)?;
        }
        OutputFormat::Csv => {
            let mut text = String::from("month,coverage\n");
            for (month, frac) in &report.monthly_coverage {
                text.push_str(&format!("{month},{}\n", data_num(*frac)));
            }
            text.push_str(&format!("TOTAL,{}\n", data_num(report.coverage)));
            std::fs::write(dir.join("validation.csv"), text)?;

            let mut gaps = String::from("ticker,month\n");
            for (ticker, months) in &report.gaps {
                for month in months {
                    gaps.push_str(&format!("{ticker},{month}\n"));
                }
            }
            std::fs::write(dir.join("gaps.csv"), gaps)?;
        }
    }
    Ok(())
}

pub fn cmd_parse(args: &ParseArgs) -> Result<(), CliError> {
    args.range.validate()?;
    ensure_out_dir(&args.out.out)?;
    let (panel, report) = load_panel(&args.input, args.strict, args.range.from, args.range.to)?;

    std::fs::write(
        args.out.out.join("panel.csv"),
        serialize_records(&panel.records()),
    )?;
    write_parse_report(&args.out.out, &report, args.out.format)?;
    write_validation_report(&args.out.out, &validate_panel(&panel), args.out.format)?;
    Ok(())
}

fn adjusted_monthly_prices(
    panel: &PricePanel,
    dividends_path: Option<&Path>,
) -> Result<MonthlyPrices, CliError> {
    let sampled = capmkit::monthly_sample(panel);
    match dividends_path {
        None => Ok(sampled),
        Some(path) => {
            let events = inputs::load_dividends(path)?;
            let (adjusted, warnings) = dividend_adjust(sampled, &events)?;
            for warning in warnings {
                eprintln!("warning: {warning}");
            }
            Ok(adjusted)
        }
    }
}

fn stock_return_series(prices: &MonthlyPrices) -> Vec<ReturnSeries> {
    prices
        .iter()
        .map(|(ticker, table)| log_returns(ticker, table))
        .collect()
}

fn market_return_series(
    path: &Path,
    from: Option<NaiveDate>,
    to: Option<NaiveDate>,
) -> Result<(Vec<(NaiveDate, f64)>, ReturnSeries), CliError> {
    let mut levels = inputs::load_index_series(path)?;
    levels.retain(|(d, _)| from.is_none_or(|f| *d >= f) && to.is_none_or(|t| *d <= t));
    let monthly = monthly_first(&levels);
    let series = log_returns_from_levels(SeriesLabel::Market, &monthly);
    Ok((levels, series))
}

fn returns_table(series: &[&ReturnSeries]) -> Table {
    let mut rows = Vec::new();
    for s in series {
        for (month, value) in s.periods.iter().zip(&s.values) {
            rows.push(vec![
                s.label.to_string(),
                month.to_string(),
                data_num(*value),
            ]);
        }
    }
    Table {
        headers: vec!["ticker", "month", "log_return"],
        field_names: vec!["ticker", "month", "log_return"],
        rows,
    }
}

fn excess_table(series: &[&ExcessReturnSeries]) -> Table {
    let mut rows = Vec::new();
    for s in series {
        for (month, value) in s.periods.iter().zip(&s.values) {
            rows.push(vec![
                s.label.to_string(),
                month.to_string(),
                data_num(*value),
            ]);
        }
    }
    Table {
        headers: vec!["ticker", "month", "excess_return"],
        field_names: vec!["ticker", "month", "excess_return"],
        rows,
    }
}

pub fn cmd_returns(args: &ReturnsArgs) -> Result<(), CliError> {
    args.range.validate()?;
    ensure_out_dir(&args.out.out)?;
    let (panel, _) = load_panel(&args.input, args.strict, args.range.from, args.range.to)?;
    let prices = adjusted_monthly_prices(&panel, args.dividends.as_deref())?;
    let stock_returns = stock_return_series(&prices);

    let market = match &args.index {
        Some(path) => Some(market_return_series(path, args.range.from, args.range.to)?.1),
        None => None,
    };

    let mut all: Vec<&ReturnSeries> = stock_returns.iter().collect();
    if let Some(m) = &market {
        all.push(m);
    }
    write_table(&args.out.out, "returns", &returns_table(&all), args.out.format)?;

    if let Some(rf_path) = &args.riskfree {
        let rf = inputs::load_riskfree(rf_path)?;
        let mut excess_series = Vec::new();
        for s in &stock_returns {
            let (excess, warning) = excess_returns(s, &rf);
            if let Some(w) = warning {
                eprintln!("warning: {w}");
            }
            excess_series.push(excess);
        }
        let (portfolio, _) = portfolio_excess(&excess_series);
        let mut refs: Vec<&ExcessReturnSeries> = excess_series.iter().collect();
        let market_excess = market.as_ref().map(|m| excess_returns(m, &rf).0);
        if let Some(me) = &market_excess {
            refs.push(me);
        }
        refs.push(&portfolio);
        write_table(&args.out.out, "excess", &excess_table(&refs), args.out.format)?;
    }
    Ok(())
}

/// Everything the estimate/diagnose/report commands need, computed once.
pub struct Pipeline {
    pub panel: PricePanel,
    pub parse_report: ParseReport,
    pub index_levels: Vec<(NaiveDate, f64)>,
    pub stock_excess: Vec<ExcessReturnSeries>,
    pub market_excess: ExcessReturnSeries,
    pub portfolio: ExcessReturnSeries,
    pub stock_fits: Vec<(String, RegressionResult)>,
    pub portfolio_fit: RegressionResult,
    pub hypotheses: Vec<HypothesisOutcome>,
}

pub fn run_pipeline(args: &EstimateArgs) -> Result<Pipeline, CliError> {
    args.validate()?;
    let (panel, parse_report) =
        load_panel(&args.input, args.strict, args.range.from, args.range.to)?;
    let prices = adjusted_monthly_prices(&panel, args.dividends.as_deref())?;
    let stock_returns = stock_return_series(&prices);
    let (index_levels, market_returns) =
        market_return_series(&args.index, args.range.from, args.range.to)?;
    let rf = inputs::load_riskfree(&args.riskfree)?;

    let (market_excess, market_warning) = excess_returns(&market_returns, &rf);
    if market_warning.is_some() || market_excess.values.is_empty() {
        return Err(CliError::EmptyOverlap(
            "the index series and the risk-free series share no months".into(),
        ));
    }

    let mut stock_excess = Vec::new();
    for s in &stock_returns {
        let (excess, warning) = excess_returns(s, &rf);
        if let Some(w) = warning {
            eprintln!("warning: {w}");
        }
        stock_excess.push(excess);
    }
    let (portfolio, _) = portfolio_excess(&stock_excess);
    if portfolio.values.is_empty() {
        return Err(CliError::EmptyOverlap(
            "no stock has months overlapping the risk-free series".into(),
        ));
    }

    let mut stock_fits = Vec::new();
    for s in &stock_excess {
        match estimate_stock_capm(s, &market_excess) {
            Ok(fit) => stock_fits.push((s.label.to_string(), fit)),
            Err(RegressionError::InsufficientData { available, .. }) => {
                eprintln!(
                    "warning: skipping {}: only {available} months overlap the market series",
                    s.label
                );
            }
            Err(err) => return Err(err.into()),
        }
    }

    let portfolio_fit = match estimate_portfolio_capm(&portfolio, &market_excess) {
        Ok(fit) => fit,
        Err(RegressionError::InsufficientData { available, .. }) => {
            return Err(CliError::EmptyOverlap(format!(
                "portfolio and market series share only {available} months"
            )));
        }
        Err(err) => return Err(err.into()),
    };

    let hypotheses = vec![
        hypothesis_test(&portfolio_fit, Hypothesis::PositivePriceOfRisk)?,
        hypothesis_test(&portfolio_fit, Hypothesis::ZeroBetaNonzero)?,
    ];

    Ok(Pipeline {
        panel,
        parse_report,
        index_levels,
        stock_excess,
        market_excess,
        portfolio,
        stock_fits,
        portfolio_fit,
        hypotheses,
    })
}

fn stock_beta_table(fits: &[(String, RegressionResult)]) -> Table {
    Table {
        headers: vec![
            "Stock Name",
            "Estimated Beta",
            "t-value",
            "Std. Error",
            "R-squared",
        ],
        field_names: vec!["name", "beta", "t_beta", "se_beta", "r2"],
        rows: fits
            .iter()
            .map(|(name, fit)| {
                vec![
                    name.clone(),
                    table_num(fit.slope),
                    table_num(fit.t_slope),
                    table_num(fit.se_slope),
                    table_num(fit.r_squared),
                ]
            })
            .collect(),
    }
}

fn stock_alpha_table(fits: &[(String, RegressionResult)]) -> Table {
    Table {
        headers: vec![
            "Stock Name",
            "Estimated zero beta",
            "t-value",
            "Std. Error",
            "p-value",
        ],
        field_names: vec!["name", "alpha", "t_alpha", "se_alpha", "p_alpha"],
        rows: fits
            .iter()
            .map(|(name, fit)| {
                vec![
                    name.clone(),
                    table_num(fit.intercept),
                    table_num(fit.t_intercept),
                    table_num(fit.se_intercept),
                    table_num(fit.p_intercept_two_sided),
                ]
            })
            .collect(),
    }
}

fn portfolio_beta_table(fit: &RegressionResult) -> Table {
    Table {
        headers: vec!["Estimated Beta", "t-value", "Std. Error", "R-squared"],
        field_names: vec!["beta", "t_beta", "se_beta", "r2"],
        rows: vec![vec![
            table_num(fit.slope),
            table_num(fit.t_slope),
            table_num(fit.se_slope),
            table_num(fit.r_squared),
        ]],
    }
}

fn portfolio_alpha_table(fit: &RegressionResult) -> Table {
    Table {
        headers: vec!["Est.zero beta rate", "t-value", "Std. Error"],
        field_names: vec!["alpha", "t_alpha", "se_alpha"],
        rows: vec![vec![
            table_num(fit.intercept),
            table_num(fit.t_intercept),
            table_num(fit.se_intercept),
        ]],
    }
}

fn hypotheses_table(outcomes: &[HypothesisOutcome], levels: &[u32]) -> Table {
    let rows = outcomes
        .iter()
        .map(|o| {
            let rejected: Vec<String> = o
                .rejected_at
                .iter()
                .map(|l| format!("{}%", (l * 100.0).round() as u32))
                .filter(|l| {
                    levels
                        .iter()
                        .any(|cfg| format!("{cfg}%") == *l)
                })
                .collect();
            vec![
                o.name.to_string(),
                table_num(o.t_value),
                o.df.to_string(),
                table_num(o.p_value),
                rejected.join(";"),
            ]
        })
        .collect();
    Table {
        headers: vec!["hypothesis", "t-value", "df", "p-value", "rejected_at"],
        field_names: vec!["hypothesis", "t_value", "df", "p_value", "rejected_at"],
        rows,
    }
}

fn write_estimate_tables(
    dir: &Path,
    pipeline: &Pipeline,
    levels: &[u32],
    format: OutputFormat,
) -> Result<(), CliError> {
    write_table(dir, "stock_beta", &stock_beta_table(&pipeline.stock_fits), format)?;
    write_table(dir, "stock_alpha", &stock_alpha_table(&pipeline.stock_fits), format)?;
    write_table(
        dir,
        "portfolio_beta",
        &portfolio_beta_table(&pipeline.portfolio_fit),
        format,
    )?;
    write_table(
        dir,
        "portfolio_alpha",
        &portfolio_alpha_table(&pipeline.portfolio_fit),
        format,
    )?;
    write_table(
        dir,
        "hypotheses",
        &hypotheses_table(&pipeline.hypotheses, levels),
        format,
    )?;
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out.out)?;
    let pipeline = run_pipeline(args)?;
    write_estimate_tables(&args.out.out, &pipeline, &args.levels, args.out.format)
}

/// Residual series of every fitted regression, stocks first then PORTFOLIO.
fn residual_series(pipeline: &Pipeline) -> Vec<(String, Vec<f64>)> {
    let mut out: Vec<(String, Vec<f64>)> = pipeline
        .stock_fits
        .iter()
        .map(|(name, fit)| (name.clone(), fit.residuals.clone()))
        .collect();
    out.push((
        "PORTFOLIO".to_string(),
        pipeline.portfolio_fit.residuals.clone(),
    ));
    out
}

fn write_diagnostics(
    dir: &Path,
    pipeline: &Pipeline,
    max_lag: usize,
    format: OutputFormat,
) -> Result<(), CliError> {
    let mut dw_rows = Vec::new();
    for (name, residuals) in residual_series(pipeline) {
        match durbin_watson(&residuals) {
            Ok(dw) => {
                let status = if dw < 1.0 { "alarm" } else { "ok" };
                dw_rows.push(vec![name.clone(), data_num(dw), status.to_string()]);
            }
            Err(DiagnosticsError::AllZeroResiduals) => {
                dw_rows.push(vec![name.clone(), "NA".to_string(), "undefined".to_string()]);
            }
            Err(err) => return Err(err.into()),
        }

        match acf(&residuals, max_lag) {
            Ok(result) => {
                let rows = result
                    .lags
                    .iter()
                    .zip(&result.correlations)
                    .map(|(lag, corr)| {
                        vec![lag.to_string(), data_num(*corr), data_num(result.band)]
                    })
                    .collect();
                let table = Table {
                    headers: vec!["lag", "correlation", "band"],
                    field_names: vec!["lag", "correlation", "band"],
                    rows,
                };
                write_table(dir, &format!("acf_{name}"), &table, format)?;
            }
            Err(DiagnosticsError::ConstantSeries) => {
                eprintln!("warning: {name}: residuals are constant, no autocorrelation output");
            }
            Err(err) => return Err(err.into()),
        }
    }
    let dw_table = Table {
        headers: vec!["series", "durbin_watson", "status"],
        field_names: vec!["series", "durbin_watson", "status"],
        rows: dw_rows,
    };
    write_table(dir, "durbin_watson", &dw_table, format)?;

    // Trend of the index level on a 1-based time index.
    let points: Vec<(f64, f64)> = pipeline
        .index_levels
        .iter()
        .enumerate()
        .map(|(i, (_, level))| ((i + 1) as f64, *level))
        .collect();
    let trend = trend_regression(&points)?;
    let trend_table = Table {
        headers: vec!["", "Estimate", "Std. Error", "t value", "Pr(>|t|)"],
        field_names: vec!["term", "estimate", "std_error", "t_value", "p_value"],
        rows: vec![
            vec![
                "(Intercept)".to_string(),
                table_num(trend.regression.intercept),
                table_num(trend.regression.se_intercept),
                table_num(trend.regression.t_intercept),
                table_num(trend.regression.p_intercept_two_sided),
            ],
            vec![
                "t".to_string(),
                table_num(trend.regression.slope),
                table_num(trend.regression.se_slope),
                table_num(trend.regression.t_slope),
                table_num(trend.regression.p_slope_two_sided),
            ],
        ],
    };
    write_table(dir, "trend", &trend_table, format)?;

    let stats_table = Table {
        headers: vec!["metric", "value"],
        field_names: vec!["metric", "value"],
        rows: vec![
            vec!["r_squared".to_string(), data_num(trend.regression.r_squared)],
            vec!["adj_r_squared".to_string(), data_num(trend.adj_r_squared)],
            vec!["n".to_string(), trend.regression.n.to_string()],
        ],
    };
    write_table(dir, "trend_stats", &stats_table, format)?;
    Ok(())
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    if args.max_lag < 1 {
        return Err(CliError::InvalidConfig("--max-lag must be at least 1".into()));
    }
    ensure_out_dir(&args.estimate.out.out)?;
    let pipeline = run_pipeline(&args.estimate)?;
    write_diagnostics(
        &args.estimate.out.out,
        &pipeline,
        args.max_lag,
        args.estimate.out.format,
    )
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out.out)?;
    let text = inputs::read_text(&args.spec)?;
    let mut spec: SimulationSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::InvalidSimSpec(format!("{}: {e}", args.spec.display())))?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate().map_err(CliError::from)?;

    let shape = format!("{}x{}", spec.n_stocks, spec.n_months);
    let bundle = capmkit::generate_fixture_bundle(
        &spec,
        &capmkit::default_base_prices(spec.n_stocks),
        capmkit::DEFAULT_INDEX_BASE,
    )?;
    std::fs::write(
        args.out.out.join(format!("pricelist_{shape}.txt")),
        &bundle.pricelist,
    )?;
    std::fs::write(args.out.out.join(format!("index_{shape}.csv")), &bundle.index_csv)?;
    std::fs::write(
        args.out.out.join(format!("riskfree_{shape}.csv")),
        &bundle.riskfree_csv,
    )?;

    let report = capmkit::recovery_experiment(&spec, args.trials)?;
    let table = Table {
        headers: vec![
            "trials",
            "beta_coverage",
            "alpha_coverage",
            "beta_mean_bias",
            "alpha_mean_bias",
            "beta_mean_se",
        ],
        field_names: vec![
            "trials",
            "beta_coverage",
            "alpha_coverage",
            "beta_mean_bias",
            "alpha_mean_bias",
            "beta_mean_se",
        ],
        rows: vec![vec![
            report.trials.to_string(),
            data_num(report.beta_coverage),
            data_num(report.alpha_coverage),
            data_num(report.beta_mean_bias),
            data_num(report.alpha_mean_bias),
            data_num(report.beta_mean_se),
        ]],
    };
    write_table(
        &args.out.out,
        &format!("recovery_{shape}"),
        &table,
        args.out.format,
    )?;
    Ok(())
}

pub fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let est = &args.diagnose.estimate;
    ensure_out_dir(&est.out.out)?;
    let pipeline = run_pipeline(est)?;
    let dir = &est.out.out;
    let format = est.out.format;

    // parse artifacts
    std::fs::write(dir.join("panel.csv"), serialize_records(&pipeline.panel.records()))?;
    write_parse_report(dir, &pipeline.parse_report, format)?;
    write_validation_report(dir, &validate_panel(&pipeline.panel), format)?;

    // returns artifacts (excess series; raw returns are recoverable from the panel)
    let mut refs: Vec<&ExcessReturnSeries> = pipeline.stock_excess.iter().collect();
    refs.push(&pipeline.market_excess);
    refs.push(&pipeline.portfolio);
    write_table(dir, "excess", &excess_table(&refs), format)?;

    // estimation and diagnostics
    write_estimate_tables(dir, &pipeline, &est.levels, format)?;
    write_diagnostics(dir, &pipeline, args.diagnose.max_lag, format)?;

    // run summary, free of paths and timestamps so identical inputs give
    // identical trees
    let summary = json!({
        "tickers": pipeline.panel.tickers().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "dates": pipeline.panel.dates().len(),
        "accepted_records": pipeline.parse_report.accepted,
        "rejected_lines": pipeline.parse_report.rejected.len(),
        "regression_sample_size": pipeline.portfolio_fit.n,
        "portfolio_beta": crate::output::json_num(&table_num(pipeline.portfolio_fit.slope)),
        "portfolio_zero_beta": crate::output::json_num(&table_num(pipeline.portfolio_fit.intercept)),
        "levels": est.levels,
    });
    match format {
        OutputFormat::Json => {
            crate::output::write_json_value(dir, "summary", &summary)?;
        }
        OutputFormat::Csv => {
            let mut text = String::from("metric,value\n");
            text.push_str(&format!("tickers,{}\n", pipeline.panel.tickers().len()));
            text.push_str(&format!("dates,{}\n", pipeline.panel.dates().len()));
            text.push_str(&format!(
                "accepted_records,{}\n",
                pipeline.parse_report.accepted
            ));
            text.push_str(&format!(
                "rejected_lines,{}\n",
                pipeline.parse_report.rejected.len()
            ));
            text.push_str(&format!(
                "regression_sample_size,{}\n",
                pipeline.portfolio_fit.n
            ));
            text.push_str(&format!(
                "portfolio_beta,{}\n",
                table_num(pipeline.portfolio_fit.slope)
            ));
            text.push_str(&format!(
                "portfolio_zero_beta,{}\n",
                table_num(pipeline.portfolio_fit.intercept)
            ));
            std::fs::write(dir.join("summary.csv"), text)?;
        }
    }
    Ok(())
}
