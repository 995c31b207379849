//! Special functions backing the regression inference: log-gamma, the
//! regularized incomplete beta function, and the Student-t upper tail.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpecialError {
    #[error("input outside function domain: {0}")]
    Domain(&'static str),
    #[error("continued fraction did not converge")]
    Convergence,
}

// Lanczos approximation, g = 7, n = 9 (Godfrey coefficients).
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision, clippy::inconsistent_digit_grouping)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos series in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
        sum += c / (z + (i + 1) as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

const MAX_CF_ITER: usize = 300;

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// I_x(a, b) = B(x; a, b) / B(a, b), evaluated via the continued fraction
/// of Numerical Recipes with the modified Lentz algorithm. The symmetry
/// I_x(a, b) = 1 − I_{1−x}(b, a) keeps the fraction in its fast-converging
/// region.
pub fn betainc_reg(a: f64, b: f64, x: f64) -> Result<f64, SpecialError> {
    if a <= 0.0 || b <= 0.0 {
        return Err(SpecialError::Domain("a and b must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(SpecialError::Domain("x must lie in [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - betainc_cf(b, a, 1.0 - x)?)
    } else {
        betainc_cf(a, b, x)
    }
}

fn betainc_cf(a: f64, b: f64, x: f64) -> Result<f64, SpecialError> {
    let tiny = 1e-300;
    let eps = f64::EPSILON;

    let prefix = (a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b)).exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut f = d;

    for m in 1..=MAX_CF_ITER {
        let fm = m as f64;
        let m2 = 2.0 * fm;

        let a_even = fm * (b - fm) * x / ((qam + m2) * (a + m2));
        d = 1.0 + a_even * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + a_even / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        f *= d * c;

        let a_odd = -((a + fm) * (qab + fm) * x) / ((a + m2) * (qap + m2));
        d = 1.0 + a_odd * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + a_odd / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        f *= delta;

        if (delta - 1.0).abs() < eps {
            return Ok(prefix * f);
        }
    }
    Err(SpecialError::Convergence)
}

/// Upper-tail probability P(T >= t) of the Student-t distribution with `df`
/// degrees of freedom.
///
/// For t >= 0 this is ½ I_x(df/2, ½) with x = df / (df + t²); negative t
/// follows from symmetry.
pub fn student_t_sf(t: f64, df: u32) -> Result<f64, SpecialError> {
    if df < 1 {
        return Err(SpecialError::Domain("df must be at least 1"));
    }
    if t.is_nan() {
        return Err(SpecialError::Domain("t must not be NaN"));
    }
    if t < 0.0 {
        return Ok(1.0 - student_t_sf(-t, df)?);
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dff = df as f64;
    let x = dff / (dff + t * t);
    Ok(0.5 * betainc_reg(dff / 2.0, 0.5, x)?)
}

/// Upper-tail critical value: the t with `student_t_sf(t, df) == alpha`.
///
/// Solved by bisection; the survival function is strictly decreasing in t.
pub fn student_t_critical(alpha: f64, df: u32) -> Result<f64, SpecialError> {
    if df < 1 {
        return Err(SpecialError::Domain("df must be at least 1"));
    }
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(SpecialError::Domain("alpha must lie in (0, 0.5)"));
    }
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while student_t_sf(hi, df)? > alpha {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(SpecialError::Convergence);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_sf(mid, df)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
