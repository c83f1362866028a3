use super::special::t_two_sided;
use super::{Df, StatsError, TestResult};

/// Up to this many observations the Spearman p-value is an exact
/// permutation probability; above it the t approximation is used.
pub const EXACT_PERMUTATION_MAX_N: usize = 10;

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided permutation p-value: share of the n! rearrangements of `ry`
/// whose |r| is at least the observed one. Heap's algorithm.
fn exact_p(rx: &[f64], ry: &[f64], r_obs: f64) -> f64 {
    let n = rx.len();
    let mut perm = ry.to_vec();
    let mut c = vec![0usize; n];
    let threshold = r_obs.abs() - 1e-12;
    let mut total = 1u64;
    let mut hits = u64::from(r_obs.abs() >= threshold);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += 1;
            if pearson(rx, &perm).is_some_and(|r| r.abs() >= threshold) {
                hits += 1;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// Spearman rank correlation; the statistic is r and df is n - 2.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<TestResult, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::TooShort { min: 3, got: n });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("non-finite input".into()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let r = pearson(&rx, &ry).ok_or(StatsError::ConstantInput)?;
    let df = (n - 2) as f64;
    let p_value = if n <= EXACT_PERMUTATION_MAX_N {
        exact_p(&rx, &ry, r)
    } else if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        t_two_sided(t, df)?
    };
    Ok(TestResult {
        statistic: r,
        df: Df::One(df),
        p_value: p_value.clamp(0.0, 1.0),
    })
}
