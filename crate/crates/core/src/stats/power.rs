use super::special::{chi_square_critical, chi_square_sf, ln_gamma};
use super::{EffectSize, StatsError};

/// Relative truncation tolerance of the Poisson-mixture series.
pub const SERIES_TOL: f64 = 1e-14;

/// P(X > x) for X noncentral chi-square with `df` degrees of freedom and
/// noncentrality `lambda`, as a Poisson(lambda/2) mixture of central
/// chi-square tails. Summation starts at the Poisson mode and walks outward
/// in both directions. Past the mode consecutive Poisson weights shrink at
/// least geometrically, so the mass not yet summed is bounded by
/// `w_j r / (1 - r)` with `r` the current ratio; each direction stops once
/// that bound falls below `SERIES_TOL` times the running sum.
pub fn noncentral_chi_square_sf(x: f64, df: f64, lambda: f64) -> Result<f64, StatsError> {
    if !(df > 0.0 && lambda >= 0.0) {
        return Err(StatsError::Domain(format!("df {df}, lambda {lambda}")));
    }
    if lambda == 0.0 {
        return chi_square_sf(x, df);
    }
    let mu = lambda / 2.0;
    let log_w = |j: f64| -mu + j * mu.ln() - ln_gamma(j + 1.0);
    let term = |j: f64| -> Result<(f64, f64), StatsError> {
        let w = log_w(j).exp();
        Ok((w, w * chi_square_sf(x, df + 2.0 * j)?))
    };
    let mode = mu.floor();
    let (_, t0) = term(mode)?;
    let mut sum = t0;
    let mut j = mode + 1.0;
    loop {
        let (w, t) = term(j)?;
        sum += t;
        let r = mu / (j + 1.0);
        if w == 0.0 || w * r / (1.0 - r) < SERIES_TOL * sum.max(f64::MIN_POSITIVE) {
            break;
        }
        j += 1.0;
    }
    let mut j = mode - 1.0;
    while j >= 0.0 {
        let (w, t) = term(j)?;
        sum += t;
        let r = j / mu;
        if w * r / (1.0 - r) < SERIES_TOL * sum.max(f64::MIN_POSITIVE) {
            break;
        }
        j -= 1.0;
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Power of a chi-square test with effect size `w`, sample size `n`, `df`
/// degrees of freedom and level `alpha`; noncentrality is `n w^2`.
pub fn chi_square_power(w: EffectSize, n: u64, df: u32, alpha: f64) -> Result<f64, StatsError> {
    if df == 0 {
        return Err(StatsError::InvalidArgument("df must be positive".into()));
    }
    if !(w.cohens_w >= 0.0) {
        return Err(StatsError::InvalidArgument("effect size must be non-negative".into()));
    }
    let df = df as f64;
    let crit = chi_square_critical(alpha, df)?;
    noncentral_chi_square_sf(crit, df, n as f64 * w.cohens_w * w.cohens_w)
}
