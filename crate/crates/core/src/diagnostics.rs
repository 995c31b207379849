//! Residual and series diagnostics: Durbin-Watson, autocorrelation with
//! white-noise bands, and the linear trend fit on index levels.

use serde::Serialize;
use thiserror::Error;

use crate::capm::{ols_simple, RegressionError, RegressionResult};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("statistic undefined: residuals are all zero")]
    AllZeroResiduals,
    #[error("autocorrelation undefined: series is constant")]
    ConstantSeries,
    #[error("need series length n > max_lag >= 1, got n = {n}, max_lag = {max_lag}")]
    BadLag { n: usize, max_lag: usize },
    #[error(transparent)]
    Regression(#[from] RegressionError),
}

/// First-order serial-correlation statistic
/// `sum (e_t - e_{t-1})^2 / sum e_t^2`, in [0, 4] with 2 meaning none.
///
/// Values below 1.0 are conventionally treated as cause for alarm about the
/// OLS standard errors; that judgment is left to callers.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64, DiagnosticsError> {
    if residuals.len() < 2 {
        return Err(DiagnosticsError::BadLag {
            n: residuals.len(),
            max_lag: 1,
        });
    }
    let denom: f64 = residuals.iter().map(|e| e * e).sum();
    if denom == 0.0 {
        return Err(DiagnosticsError::AllZeroResiduals);
    }
    let num: f64 = residuals
        .windows(2)
        .map(|w| (w[1] - w[0]) * (w[1] - w[0]))
        .sum();
    Ok(num / denom)
}

/// Autocorrelations at lags 1..=max_lag with the +-1.96/sqrt(n) band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcfResult {
    pub lags: Vec<usize>,
    pub correlations: Vec<f64>,
    /// White-noise band half-width, 1.96/sqrt(n).
    pub band: f64,
    pub n: usize,
}

/// Sample autocorrelation function, biased (divide-by-n) estimator with a
/// common mean, matching standard statistical-package defaults:
/// `rho_k = sum_{t=1..n-k} (e_t - m)(e_{t+k} - m) / sum (e_t - m)^2`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult, DiagnosticsError> {
    let n = series.len();
    if max_lag < 1 || n <= max_lag {
        return Err(DiagnosticsError::BadLag { n, max_lag });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let denom: f64 = series.iter().map(|e| (e - mean) * (e - mean)).sum();
    if denom == 0.0 {
        return Err(DiagnosticsError::ConstantSeries);
    }
    let mut lags = Vec::with_capacity(max_lag);
    let mut correlations = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num: f64 = (0..n - k)
            .map(|t| (series[t] - mean) * (series[t + k] - mean))
            .sum();
        lags.push(k);
        correlations.push(num / denom);
    }
    Ok(AcfResult {
        lags,
        correlations,
        band: 1.96 / (n as f64).sqrt(),
        n,
    })
}

/// Count of lags outside the white-noise band, and the resulting judgment.
///
/// The series passes as white noise when at most 5% of the examined lags
/// (rounded up) exceed the band.
pub fn white_noise_check(acf: &AcfResult) -> (usize, bool) {
    let exceed = acf
        .correlations
        .iter()
        .filter(|c| c.abs() > acf.band)
        .count();
    let allowed = (0.05 * acf.lags.len() as f64).ceil() as usize;
    (exceed, exceed <= allowed)
}

/// OLS of level on time index, with the adjusted R² alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendFit {
    pub regression: RegressionResult,
    pub adj_r_squared: f64,
}

/// Fit a linear trend to (time index, level) pairs.
pub fn trend_regression(index: &[(f64, f64)]) -> Result<TrendFit, DiagnosticsError> {
    let x: Vec<f64> = index.iter().map(|(t, _)| *t).collect();
    let y: Vec<f64> = index.iter().map(|(_, level)| *level).collect();
    let regression = ols_simple(&x, &y)?;
    let n = regression.n as f64;
    let adj_r_squared = 1.0 - (1.0 - regression.r_squared) * (n - 1.0) / (n - 2.0);
    Ok(TrendFit {
        regression,
        adj_r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn constant_residuals_give_zero() {
        assert_eq!(durbin_watson(&[3.0, 3.0, 3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn alternating_residuals_give_three() {
        // sum of squared diffs 12 over sum of squares 4
        assert_eq!(durbin_watson(&[1.0, -1.0, 1.0, -1.0]).unwrap(), 3.0);
    }

    #[test]
    fn all_zero_residuals_are_undefined() {
        assert_eq!(
            durbin_watson(&[0.0, 0.0, 0.0]),
            Err(DiagnosticsError::AllZeroResiduals)
        );
    }

    #[test]
    fn iid_noise_sits_near_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let e: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
        let dw = durbin_watson(&e).unwrap();
        assert!((dw - 2.0).abs() < 0.2, "dw = {dw}");
    }

    #[test]
    fn dw_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let normal = Normal::new(0.0, 1.0).unwrap();
        for _ in 0..50 {
            let e: Vec<f64> = (0..30).map(|_| normal.sample(&mut rng)).collect();
            let dw = durbin_watson(&e).unwrap();
            assert!((0.0..=4.0).contains(&dw));
        }
    }

    #[test]
    fn acf_alternating_lag_one() {
        let r = acf(&[1.0, -1.0, 1.0, -1.0], 1).unwrap();
        assert!((r.correlations[0] - (-0.75)).abs() < 1e-12);
    }

    #[test]
    fn acf_of_ar1_recovers_phi() {
        // AR(1) with phi = 0.4; population lag-1 autocorrelation is phi.
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut series = Vec::with_capacity(2000);
        let mut prev = 0.0;
        for _ in 0..2000 {
            prev = 0.4 * prev + normal.sample(&mut rng);
            series.push(prev);
        }
        let r = acf(&series, 5).unwrap();
        assert!((r.correlations[0] - 0.4).abs() < 0.05, "{}", r.correlations[0]);
    }

    #[test]
    fn acf_rejects_constant_series() {
        assert_eq!(
            acf(&[2.0, 2.0, 2.0, 2.0], 1),
            Err(DiagnosticsError::ConstantSeries)
        );
    }

    #[test]
    fn acf_rejects_short_series() {
        assert!(matches!(
            acf(&[1.0, 2.0], 2),
            Err(DiagnosticsError::BadLag { .. })
        ));
    }

    #[test]
    fn dw_tracks_two_one_minus_rho() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        for n in [50usize, 200, 1000] {
            let e: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let dw = durbin_watson(&e).unwrap();
            let rho1 = acf(&e, 1).unwrap().correlations[0];
            assert!(
                (dw - 2.0 * (1.0 - rho1)).abs() <= 40.0 / n as f64,
                "n={n}"
            );
        }
    }

    #[test]
    fn white_noise_judgment() {
        let clean = AcfResult {
            lags: (1..=20).collect(),
            correlations: vec![0.0; 20],
            band: 0.1,
            n: 400,
        };
        assert_eq!(white_noise_check(&clean), (0, true));

        let mut one_exceed = clean.clone();
        one_exceed.correlations[3] = 0.5;
        assert_eq!(white_noise_check(&one_exceed), (1, true));

        let mut two_exceed = one_exceed.clone();
        two_exceed.correlations[7] = -0.3;
        assert_eq!(white_noise_check(&two_exceed), (2, false));
    }

    #[test]
    fn persistent_residuals_are_not_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut series = Vec::with_capacity(500);
        let mut prev = 0.0;
        for _ in 0..500 {
            prev = 0.8 * prev + normal.sample(&mut rng);
            series.push(prev);
        }
        let r = acf(&series, 20).unwrap();
        let (_, is_white) = white_noise_check(&r);
        assert!(!is_white);
    }

    #[test]
    fn perfect_trend_fit() {
        let points: Vec<(f64, f64)> = (0..20).map(|t| (t as f64, 10.0 + 2.0 * t as f64)).collect();
        let fit = trend_regression(&points).unwrap();
        assert!((fit.regression.slope - 2.0).abs() < 1e-10);
        assert!((fit.regression.intercept - 10.0).abs() < 1e-10);
        assert_eq!(fit.adj_r_squared, 1.0);
    }

    #[test]
    fn adj_r_squared_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let normal = Normal::new(0.0, 5.0).unwrap();
        let points: Vec<(f64, f64)> = (0..30)
            .map(|t| (t as f64, 100.0 + 1.5 * t as f64 + normal.sample(&mut rng)))
            .collect();
        let fit = trend_regression(&points).unwrap();
        let n = fit.regression.n as f64;
        let expect = 1.0 - (1.0 - fit.regression.r_squared) * (n - 1.0) / (n - 2.0);
        assert!((fit.adj_r_squared - expect).abs() < 1e-12);
    }

    #[test]
    fn two_regime_series_has_opposite_trend_slopes() {
        // Rises to a peak, then falls: the split fits recover the two signs.
        let up: Vec<(f64, f64)> = (0..50).map(|t| (t as f64, 800.0 + 1.1 * t as f64)).collect();
        let down: Vec<(f64, f64)> = (0..50)
            .map(|t| (t as f64, 855.0 - 1.5 * t as f64))
            .collect();
        let fit_up = trend_regression(&up).unwrap();
        let fit_down = trend_regression(&down).unwrap();
        assert!(fit_up.regression.slope > 0.0);
        assert!(fit_down.regression.slope < 0.0);
    }
}
