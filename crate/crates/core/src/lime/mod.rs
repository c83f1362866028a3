//! Local linear surrogates around a single instance.
//!
//! Perturbations are drawn as `s = x + z * std` with `z` standard normal per
//! feature. Each sample is weighted by `exp(-|z|^2 / width^2)` and a weighted
//! ridge regression of the predictor output on `z` is solved in closed form,
//! with an unpenalized intercept. Weights are therefore per training
//! standard deviation.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::FeatureStats;
use crate::ensemble::{argmax_high, EnsembleError, TreeEnsemble};

/// Standard deviations at or below this are treated as constant features.
const CONSTANT_STD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LimeError {
    #[error("invalid LIME config: {0}")]
    InvalidConfig(String),
    #[error("instance has {got} features, statistics cover {expected}")]
    BadVectorLength { expected: usize, got: usize },
    #[error("all kernel weights are numerically zero; increase kernel_width")]
    DegenerateKernel,
    #[error(transparent)]
    Model(#[from] EnsembleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeConfig {
    pub n_samples: usize,
    pub kernel_width: f64,
    pub ridge_penalty: f64,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        Self {
            n_samples: 5000,
            kernel_width: 0.75 * 8f64.sqrt(),
            ridge_penalty: 1.0,
            top_k: 4,
            seed: 42,
        }
    }
}

impl LimeConfig {
    pub fn validate(&self, n_features: usize) -> Result<(), LimeError> {
        let bad = |m: String| Err(LimeError::InvalidConfig(m));
        if self.n_samples < 100 {
            return bad(format!("n_samples {} is below 100", self.n_samples));
        }
        if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
            return bad("kernel_width must be positive".into());
        }
        if !(self.ridge_penalty >= 0.0) {
            return bad("ridge_penalty must be non-negative".into());
        }
        if self.top_k > n_features {
            return bad(format!("top_k {} exceeds {n_features} features", self.top_k));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeExplanation {
    /// Class whose probability was explained, when known.
    pub class: Option<usize>,
    pub intercept: f64,
    /// Coefficient per feature in standardized units; zero for constant
    /// features.
    pub weights: Vec<f64>,
    /// Indices of the `top_k` largest |weight|, descending, ties by index.
    pub top_k: Vec<usize>,
    /// Weighted R^2 of the surrogate on its own samples, in [0, 1].
    pub local_fidelity: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub intercept: f64,
    pub coef: Vec<f64>,
    pub r_squared: f64,
}

/// Weighted ridge regression with an unpenalized intercept. Columns with
/// `active[j] == false` are left out and get coefficient 0.
pub fn fit_weighted_ridge(
    z: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    lambda: f64,
    active: &[bool],
) -> Result<RidgeFit, LimeError> {
    let wsum: f64 = w.iter().sum();
    if !(wsum > f64::MIN_POSITIVE) {
        return Err(LimeError::DegenerateKernel);
    }
    let cols: Vec<usize> = (0..active.len()).filter(|&j| active[j]).collect();
    let p = cols.len();
    let y_bar = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / wsum;
    let z_bar: Vec<f64> = cols
        .iter()
        .map(|&j| w.iter().zip(z).map(|(a, r)| a * r[j]).sum::<f64>() / wsum)
        .collect();

    let mut coef_active = vec![0.0; p];
    if p > 0 {
        let mut a = DMatrix::<f64>::zeros(p, p);
        let mut b = DVector::<f64>::zeros(p);
        for ((row, yi), wi) in z.iter().zip(y).zip(w) {
            let c: Vec<f64> = cols.iter().zip(&z_bar).map(|(&j, m)| row[j] - m).collect();
            for r in 0..p {
                b[r] += wi * c[r] * (yi - y_bar);
                for s in r..p {
                    a[(r, s)] += wi * c[r] * c[s];
                }
            }
        }
        for r in 0..p {
            for s in 0..r {
                a[(r, s)] = a[(s, r)];
            }
            a[(r, r)] += lambda;
        }
        let sol = match a.clone().cholesky() {
            Some(ch) => ch.solve(&b),
            None => a
                .svd(true, true)
                .solve(&b, 1e-12)
                .map_err(|e| LimeError::InvalidConfig(e.to_string()))?,
        };
        coef_active = sol.iter().copied().collect();
    }
    let intercept = y_bar - coef_active.iter().zip(&z_bar).map(|(c, m)| c * m).sum::<f64>();
    let mut coef = vec![0.0; active.len()];
    for (&j, c) in cols.iter().zip(&coef_active) {
        coef[j] = *c;
    }

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for ((row, yi), wi) in z.iter().zip(y).zip(w) {
        let pred = intercept + row.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>();
        ss_res += wi * (yi - pred).powi(2);
        ss_tot += wi * (yi - y_bar).powi(2);
    }
    let tiny = 1e-20 * wsum * (1.0 + y_bar * y_bar);
    let r_squared = if ss_tot <= tiny {
        if ss_res <= tiny { 1.0 } else { 0.0 }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RidgeFit {
        intercept,
        coef,
        r_squared,
    })
}

/// Perturbation samples in standardized units plus their kernel weights.
pub fn sample_neighbourhood(
    n_features: usize,
    active: &[bool],
    cfg: &LimeConfig,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let width2 = cfg.kernel_width * cfg.kernel_width;
    let mut zs = Vec::with_capacity(cfg.n_samples);
    let mut ws = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let z: Vec<f64> = (0..n_features)
            .map(|j| if active[j] { StandardNormal.sample(&mut rng) } else { 0.0 })
            .collect();
        let d2: f64 = z.iter().map(|v| v * v).sum();
        ws.push((-d2 / width2).exp());
        zs.push(z);
    }
    (zs, ws)
}

/// Fits a local surrogate to `predictor` around `x`.
pub fn explain_instance<F>(
    predictor: F,
    x: &[f64],
    stats: &FeatureStats,
    cfg: &LimeConfig,
) -> Result<LimeExplanation, LimeError>
where
    F: Fn(&[f64]) -> f64,
{
    let nf = stats.std.len();
    if x.len() != nf {
        return Err(LimeError::BadVectorLength { expected: nf, got: x.len() });
    }
    cfg.validate(nf)?;
    let active: Vec<bool> = stats.std.iter().map(|s| s.is_finite() && *s > CONSTANT_STD).collect();
    let (zs, ws) = sample_neighbourhood(nf, &active, cfg);
    let ys: Vec<f64> = zs
        .iter()
        .map(|z| {
            let s: Vec<f64> = (0..nf).map(|j| x[j] + z[j] * stats.std[j]).collect();
            predictor(&s)
        })
        .collect();
    let fit = fit_weighted_ridge(&zs, &ys, &ws, cfg.ridge_penalty, &active)?;
    let mut order: Vec<usize> = (0..nf).filter(|&j| active[j]).collect();
    order.sort_by(|&a, &b| fit.coef[b].abs().total_cmp(&fit.coef[a].abs()).then(a.cmp(&b)));
    order.truncate(cfg.top_k);
    Ok(LimeExplanation {
        class: None,
        intercept: fit.intercept,
        weights: fit.coef,
        top_k: order,
        local_fidelity: fit.r_squared,
        n_samples: cfg.n_samples,
    })
}

/// Explains the model's probability for its predicted class at `x`.
pub fn explain_prediction(
    m: &TreeEnsemble,
    x: &[f64],
    stats: &FeatureStats,
    cfg: &LimeConfig,
) -> Result<LimeExplanation, LimeError> {
    let class = argmax_high(&m.predict_proba(x)?);
    let predictor = |s: &[f64]| {
        m.predict_proba(s).map(|p| p[class]).unwrap_or(f64::NAN)
    };
    let mut e = explain_instance(predictor, x, stats, cfg)?;
    e.class = Some(class);
    Ok(e)
}
