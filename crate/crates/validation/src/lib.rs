//! Reference implementations used to check matrisk end to end.
//!
//! Each oracle here is written from the textbook definition and shares no
//! code with the library it checks.

use matrisk_core::ensemble::{Node, Tree, TreeEnsemble};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Expected output of `t` when only the features in the bitmask `known` are
/// fixed to their values in `x`; unknown splits average their children by
/// cover.
pub fn cond_expectation(t: &Tree, node: usize, x: &[f64], known: u32) -> f64 {
    match &t.nodes[node] {
        Node::Leaf { value, .. } => *value,
        Node::Split { feature, threshold, left, right, cover } => {
            if known & (1 << feature) != 0 {
                let next = if x[*feature] < *threshold { *left } else { *right };
                cond_expectation(t, next, x, known)
            } else {
                (t.nodes[*left].cover() * cond_expectation(t, *left, x, known)
                    + t.nodes[*right].cover() * cond_expectation(t, *right, x, known))
                    / cover
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Shapley values of the summed trees by enumerating all `2^m` coalitions.
pub fn brute_force_shapley(trees: &[&Tree], x: &[f64], m: usize) -> Vec<f64> {
    let v = |s: u32| trees.iter().map(|t| cond_expectation(t, 0, x, s)).sum::<f64>();
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        for s in 0u32..(1 << m) {
            if s & (1 << i) != 0 {
                continue;
            }
            let size = s.count_ones() as usize;
            let w = factorial(size) * factorial(m - size - 1) / factorial(m);
            *p += w * (v(s | (1 << i)) - v(s));
        }
    }
    phi
}

/// Random tree over `m` features, at most `depth` deep, with consistent
/// covers. Thresholds sit on a small integer grid so features repeat along
/// paths and instances land exactly on thresholds.
pub fn random_tree(rng: &mut ChaCha8Rng, m: usize, depth: usize) -> Tree {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, m: usize, depth: usize, cover: f64) -> usize {
        let idx = nodes.len();
        if depth == 0 || rng.random_bool(0.2) {
            nodes.push(Node::Leaf { value: rng.random_range(-2.0..2.0), cover });
            return idx;
        }
        nodes.push(Node::Leaf { value: 0.0, cover });
        let frac = rng.random_range(0.1..0.9);
        let feature = rng.random_range(0..m);
        let threshold = rng.random_range(0..5) as f64;
        let left = grow(rng, nodes, m, depth - 1, cover * frac);
        let right = grow(rng, nodes, m, depth - 1, cover * (1.0 - frac));
        nodes[idx] = Node::Split { feature, threshold, left, right, cover };
        idx
    }
    let mut nodes = Vec::new();
    let cover = rng.random_range(5.0..50.0);
    grow(rng, &mut nodes, m, depth, cover);
    Tree { nodes }
}

/// Three-class ensemble with up to `max_rounds` rounds of random trees.
pub fn random_ensemble(rng: &mut ChaCha8Rng, m: usize, max_rounds: usize, max_depth: usize) -> TreeEnsemble {
    let rounds = rng.random_range(1..=max_rounds);
    let trees = (0..rounds)
        .map(|_| {
            (0..3)
                .map(|_| {
                    let d = rng.random_range(0..=max_depth);
                    random_tree(rng, m, d)
                })
                .collect()
        })
        .collect();
    TreeEnsemble {
        feature_names: (0..m).map(|i| format!("f{i}")).collect(),
        classes: vec!["low".into(), "mid".into(), "high".into()],
        base_score: vec![rng.random_range(-1.0..1.0), 0.0, rng.random_range(-1.0..1.0)],
        learning_rate: rng.random_range(0.05..1.0),
        trees,
        train_config: None,
        feature_stats: None,
    }
}

/// Pearson chi-square statistic and degrees of freedom of a contingency
/// table, straight from the expected-count formula.
pub fn chi_square_by_hand(counts: &[Vec<u64>]) -> (f64, usize) {
    let rows: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..counts[0].len())
        .map(|j| counts.iter().map(|r| r[j]).sum::<u64>() as f64)
        .collect();
    let n: f64 = rows.iter().sum();
    let mut stat = 0.0;
    for (i, r) in counts.iter().enumerate() {
        for (j, &o) in r.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    (stat, (rows.len() - 1) * (cols.len() - 1))
}

/// 0.95 quantiles of the central chi-square distribution for 1 to 4 degrees
/// of freedom.
pub const CHI2_CRITICAL_05: [f64; 4] = [
    3.841458820694124,
    5.991464547107979,
    7.814727903251179,
    9.487729036781154,
];

/// Rejection rate of a level-`alpha` chi-square test with `df` degrees of
/// freedom when the statistic is a sum of squared normals with
/// noncentrality `n w^2`. `critical` is the null critical value.
pub fn monte_carlo_power(w: f64, n: u64, df: u32, critical: f64, draws: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    let shift = (n as f64 * w * w).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..draws {
        let z0: f64 = StandardNormal.sample(&mut rng);
        let mut s = (z0 + shift).powi(2);
        for _ in 1..df {
            let z: f64 = StandardNormal.sample(&mut rng);
            s += z * z;
        }
        if s > critical {
            hits += 1;
        }
    }
    hits as f64 / draws as f64
}
