//! Shared input builders for the benchmark targets.

use capmkit::{default_base_prices, generate_pricelist, SimulationSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The panel shape the pipeline is sized for: 10 stocks, 33 months.
pub fn bench_spec() -> SimulationSpec {
    SimulationSpec {
        n_stocks: 10,
        n_months: 33,
        true_betas: (0..10).map(|i| 0.3 + 0.12 * i as f64).collect(),
        true_alphas: vec![0.0; 10],
        market_mean: 0.01,
        market_sd: 0.05,
        idio_sd: 0.04,
        rf_annual: 0.10,
        seed: 42,
    }
}

/// Daily price-list text for the bench spec.
pub fn bench_pricelist() -> String {
    let spec = bench_spec();
    generate_pricelist(&spec, &default_base_prices(spec.n_stocks)).unwrap()
}

/// Deterministic regression input of a given size.
pub fn regression_input(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.1..0.1)).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|&v| 0.02 + 0.7 * v + rng.random_range(-0.05..0.05))
        .collect();
    (x, y)
}

/// Deterministic residual-like series of a given size.
pub fn noise_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
