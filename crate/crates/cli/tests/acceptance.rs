//! Acceptance suite: one test per release criterion, each printing a
//! PASS line when it holds. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the PASS lines).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use capmkit::{
    acf, annualize, build_panel, deannualize, default_base_prices, durbin_watson,
    generate_market, generate_pricelist, log_returns, monthly_sample, ols_simple,
    parse_price_list, recovery_experiment, simulated_ticker, student_t_sf, SimulationSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn passed(n: usize, what: &str) {
    println!("[PASS] criterion {n}: {what}");
}

/// Closed-form normal-equation oracle on raw sums, independent of the
/// centered implementation in the library.
fn oracle(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let dxx = n * sxx - sx * sx;
    let dyy = n * syy - sy * sy;
    let dxy = n * sxy - sx * sy;
    let slope = dxy / dxx;
    let intercept = (sy - slope * sx) / n;
    let r2 = if dyy == 0.0 { 1.0 } else { dxy * dxy / (dxx * dyy) };
    (slope, intercept, r2)
}

#[test]
fn criterion_1_ols_matches_oracle_on_1000_instances() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x015_0C1E);
    for case in 0..1000 {
        let n = rng.random_range(3..=50);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let fit = ols_simple(&x, &y).unwrap();
        let (slope, intercept, r2) = oracle(&x, &y);
        assert!((fit.slope - slope).abs() < 1e-10, "case {case}: slope");
        assert!(
            (fit.intercept - intercept).abs() < 1e-10,
            "case {case}: intercept"
        );
        assert!((fit.r_squared - r2).abs() < 1e-10, "case {case}: r2");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    passed(1, "1000 random fits match the normal-equation oracle to 1e-10");
}

#[test]
fn criterion_2_estimator_recovery_coverage_and_bias() {
    let start = Instant::now();
    let spec = SimulationSpec {
        n_stocks: 1,
        n_months: 33, // 32 return observations per regression
        true_betas: vec![0.6832],
        true_alphas: vec![0.0],
        market_mean: 0.01,
        market_sd: 0.05,
        idio_sd: 0.04,
        rf_annual: 0.10,
        seed: 99,
    };
    let report = recovery_experiment(&spec, 1000).unwrap();
    assert!(
        (0.92..=0.98).contains(&report.beta_coverage),
        "beta coverage {}",
        report.beta_coverage
    );
    assert!(
        report.beta_mean_bias.abs() < 0.01,
        "beta bias {}",
        report.beta_mean_bias
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    passed(
        2,
        "95% CI coverage of beta in [0.92, 0.98] and |bias| < 0.01 over 1000 trials",
    );
}

#[test]
fn criterion_3_pricelist_pipeline_round_trip() {
    let text = std::fs::read_to_string(fixtures().join("sim_spec_10x33.json")).unwrap();
    let spec: SimulationSpec = serde_json::from_str(&text).unwrap();
    assert_eq!((spec.n_stocks, spec.n_months), (10, 33));

    let pricelist = generate_pricelist(&spec, &default_base_prices(spec.n_stocks)).unwrap();
    let (records, report) = parse_price_list(&pricelist, true).unwrap();
    assert!(report.rejected.is_empty());
    let panel = build_panel(&records).unwrap();
    let prices = monthly_sample(&panel);

    let (_, stocks) = generate_market(&spec).unwrap();
    let rf_monthly = deannualize(spec.rf_annual).unwrap();
    for (i, stock) in stocks.iter().enumerate() {
        let ticker = simulated_ticker(i);
        let recovered = log_returns(&ticker, &prices[&ticker]);
        assert_eq!(recovered.values.len(), 32);
        for (&got, &excess) in recovered.values.iter().zip(&stock.values) {
            assert!((got - (excess + rf_monthly)).abs() < 1e-9);
        }
    }
    passed(3, "generate -> parse -> sample -> returns recovers truth to 1e-9");
}

#[test]
fn criterion_4_hypothesis_test_anchors() {
    // One-sided slope test at 30 df
    let p_slope = student_t_sf(3.512, 30).unwrap();
    assert!(p_slope < 0.01, "one-sided p {p_slope}");
    // Two-sided intercept test at 30 df
    let p_intercept = 2.0 * student_t_sf(1.213_f64.abs(), 30).unwrap();
    assert!(p_intercept > 0.10, "two-sided p {p_intercept}");
    passed(
        4,
        "t=3.512 (df 30) rejects one-sided at 1%; t=-1.213 two-sided fails at 10%",
    );
}

#[test]
fn criterion_5_diagnostics_anchors() {
    assert_eq!(durbin_watson(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 3.0);

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let residuals: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
    let dw = durbin_watson(&residuals).unwrap();
    assert!((1.8..=2.2).contains(&dw), "dw {dw}");

    // AR(1) with phi = 0.4
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut prev = 0.0;
    let series: Vec<f64> = (0..2000)
        .map(|_| {
            prev = 0.4 * prev + normal.sample(&mut rng);
            prev
        })
        .collect();
    let rho1 = acf(&series, 1).unwrap().correlations[0];
    assert!((rho1 - 0.4).abs() < 0.05, "lag-1 acf {rho1}");

    // DW tracks 2(1 - rho1) at the finite-sample bound 40/n
    for n in [50usize, 200, 1000] {
        let e: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let dw = durbin_watson(&e).unwrap();
        let r1 = acf(&e, 1).unwrap().correlations[0];
        assert!(
            (dw - 2.0 * (1.0 - r1)).abs() <= 40.0 / n as f64,
            "n={n}: dw {dw}, rho1 {r1}"
        );
    }
    passed(5, "DW and ACF anchors hold (3.0 exact, iid near 2, AR(1) lag-1 near 0.4)");
}

#[test]
fn criterion_6_deannualization() {
    let monthly = deannualize(0.126825).unwrap();
    assert!((monthly - 0.01).abs() < 1e-6, "monthly {monthly}");

    let mut y = -0.899;
    while y < 1.0 {
        let round_trip = annualize(deannualize(y).unwrap());
        assert!((round_trip - y).abs() < 1e-12, "yield {y}");
        y += 0.001;
    }
    passed(6, "deannualize(0.126825) = 0.01 and the annualize round trip holds to 1e-12");
}

fn run_report(out: &Path) {
    let fx = fixtures();
    let status = Command::new(env!("CARGO_BIN_EXE_capmkit"))
        .args([
            "report",
            "--input",
            fx.join("pricelist_10x33.txt").to_str().unwrap(),
            "--index",
            fx.join("index_10x33.csv").to_str().unwrap(),
            "--riskfree",
            fx.join("riskfree_10x33.csv").to_str().unwrap(),
            "--max-lag",
            "12",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
}

fn tree_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.unwrap();
        if entry.file_type().is_file() {
            let rel = entry
                .path()
                .strip_prefix(root)
                .unwrap()
                .to_string_lossy()
                .into_owned();
            out.push((rel, std::fs::read(entry.path()).unwrap()));
        }
    }
    out
}

#[test]
fn criterion_7_report_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_report(a.path());
    run_report(b.path());
    let tree_a = tree_bytes(a.path());
    let tree_b = tree_bytes(b.path());
    assert!(!tree_a.is_empty());
    assert_eq!(
        tree_a.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        tree_b.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        "file sets differ"
    );
    for ((name, bytes_a), (_, bytes_b)) in tree_a.iter().zip(&tree_b) {
        assert_eq!(bytes_a, bytes_b, "{name} differs between runs");
    }
    passed(7, "two report runs on the same fixture produce byte-identical trees");
}

#[test]
fn criterion_8_table_headers_match_the_published_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let status = Command::new(env!("CARGO_BIN_EXE_capmkit"))
        .args([
            "estimate",
            "--input",
            fx.join("pricelist_10x33.txt").to_str().unwrap(),
            "--index",
            fx.join("index_10x33.csv").to_str().unwrap(),
            "--riskfree",
            fx.join("riskfree_10x33.csv").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());

    let expected = [
        (
            "stock_beta.csv",
            "Stock Name,Estimated Beta,t-value,Std. Error,R-squared",
        ),
        (
            "stock_alpha.csv",
            "Stock Name,Estimated zero beta,t-value,Std. Error,p-value",
        ),
        (
            "portfolio_beta.csv",
            "Estimated Beta,t-value,Std. Error,R-squared",
        ),
        ("portfolio_alpha.csv", "Est.zero beta rate,t-value,Std. Error"),
    ];
    for (file, header) in expected {
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{file}");
    }
    passed(8, "estimate output headers equal the published table column sets");
}
