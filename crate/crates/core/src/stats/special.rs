//! Regularized incomplete gamma and beta functions and the distribution
//! tails built on them. Evaluation is delegated to `statrs`.

use statrs::function::{beta, gamma};

use super::StatsError;

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64, StatsError> {
    gamma::checked_gamma_lr(a, x).map_err(|e| StatsError::Domain(e.to_string()))
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64, StatsError> {
    gamma::checked_gamma_ur(a, x).map_err(|e| StatsError::Domain(e.to_string()))
}

/// Regularized incomplete beta I_x(a, b).
pub fn beta_reg(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    beta::checked_beta_reg(a, b, x).map_err(|e| StatsError::Domain(e.to_string()))
}

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn chi_square_cdf(x: f64, df: f64) -> Result<f64, StatsError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    gamma_p(df / 2.0, x / 2.0)
}

/// Upper tail P(X > x) of a central chi-square.
pub fn chi_square_sf(x: f64, df: f64) -> Result<f64, StatsError> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Upper tail of the F distribution with (d1, d2) degrees of freedom.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> Result<f64, StatsError> {
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Two-sided tail P(|T| > |t|) of Student's t.
pub fn t_two_sided(t: f64, df: f64) -> Result<f64, StatsError> {
    if t.is_infinite() {
        return Ok(0.0);
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Upper `alpha` quantile of the central chi-square, by bisection.
pub fn chi_square_critical(alpha: f64, df: f64) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while chi_square_sf(hi, df)? > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if chi_square_sf(mid, df)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
