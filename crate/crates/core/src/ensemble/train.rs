//! Second-order boosting of softmax cross-entropy.
//!
//! Each round computes per-sample gradients `w (p_k - y_k)` and diagonal
//! Hessians `w p_k (1 - p_k)` from the current margins, then grows one tree
//! per class. Splits are found by exact greedy search over the sorted
//! distinct values of every feature (threshold = midpoint), scored with
//!
//! ```text
//! gain = 1/2 [ S(G_L, H_L) + S(G_R, H_R) - S(G, H) ],  S(G, H) = T(G)^2 / (H + l2)
//! ```
//!
//! where `T` soft-thresholds by the L1 penalty. Leaves hold the raw Newton
//! step `-T(G) / (H + l2)`; the learning rate is applied at prediction time.
//! Trees grow level by level; at each level features are scanned in index
//! order and, for each node, the first strictly best split wins.

use crate::data::FeatureStats;

use super::{EnsembleError, Node, TrainConfig, Tree, TreeEnsemble, N_CLASSES};

const MIN_HESSIAN: f64 = 1e-16;
const MIN_GAIN: f64 = 1e-12;
const NONE: u32 = u32::MAX;

/// Result of [`train_with_history`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TreeEnsemble,
    /// Weighted mean log-loss before training and after each round.
    pub loss_history: Vec<f64>,
}

/// Per-sample weights from the config, or balanced inverse class frequency
/// (mean weight 1 over the training set) when none are given.
pub fn sample_weights(labels: &[usize], cfg: &TrainConfig) -> Vec<f64> {
    let class_w = match cfg.class_weights {
        Some(w) => w,
        None => balanced_class_weights(labels),
    };
    labels.iter().map(|&y| class_w[y]).collect()
}

pub fn balanced_class_weights(labels: &[usize]) -> [f64; N_CLASSES] {
    let mut counts = [0usize; N_CLASSES];
    for &y in labels {
        counts[y] += 1;
    }
    let present = counts.iter().filter(|c| **c > 0).count() as f64;
    let n = labels.len() as f64;
    counts.map(|c| if c == 0 { 0.0 } else { n / (present * c as f64) })
}

fn soft_threshold(g: f64, alpha: f64) -> f64 {
    if g > alpha {
        g - alpha
    } else if g < -alpha {
        g + alpha
    } else {
        0.0
    }
}

struct Scorer {
    l1: f64,
    l2: f64,
}

impl Scorer {
    fn score(&self, g: f64, h: f64) -> f64 {
        let t = soft_threshold(g, self.l1);
        t * t / (h + self.l2)
    }

    fn leaf(&self, g: f64, h: f64) -> f64 {
        -soft_threshold(g, self.l1) / (h + self.l2)
    }
}

fn softmax_into(margins: &[f64], out: &mut [f64]) {
    let max = margins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, m) in out.iter_mut().zip(margins) {
        *o = (m - max).exp();
        sum += *o;
    }
    out.iter_mut().for_each(|o| *o /= sum);
}

fn weighted_log_loss(margins: &[[f64; N_CLASSES]], labels: &[usize], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut wsum = 0.0;
    for ((m, &y), &w) in margins.iter().zip(labels).zip(weights) {
        let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + m.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += w * (lse - m[y]);
        wsum += w;
    }
    total / wsum
}

/// Column-major feature storage with per-feature sort orders.
struct Columns {
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Columns {
    fn new<R: AsRef<[f64]>>(rows: &[R], n_features: usize) -> Self {
        let cols: Vec<Vec<f64>> = (0..n_features)
            .map(|f| rows.iter().map(|r| r.as_ref()[f]).collect())
            .collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..c.len() as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Self { cols, order }
    }
}

#[derive(Clone, Copy)]
struct OpenNode {
    node: usize,
    g: f64,
    h: f64,
    cover: f64,
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
    g_left: f64,
    h_left: f64,
    cover_left: f64,
}

fn find_splits(
    cols: &Columns,
    assign: &[u32],
    open: &[OpenNode],
    grad: &[f64],
    hess: &[f64],
    weight: &[f64],
    scorer: &Scorer,
    min_child_weight: f64,
) -> Vec<Option<Candidate>> {
    let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
    let parent_score: Vec<f64> = open.iter().map(|o| scorer.score(o.g, o.h)).collect();
    for (f, order) in cols.order.iter().enumerate() {
        let col = &cols.cols[f];
        let mut acc = vec![(0.0f64, 0.0f64, 0.0f64); open.len()];
        let mut last = vec![f64::NAN; open.len()];
        for &i in order {
            let i = i as usize;
            let s = assign[i];
            if s == NONE {
                continue;
            }
            let s = s as usize;
            let v = col[i];
            if !last[s].is_nan() && v > last[s] {
                let (gl, hl, cl) = acc[s];
                let o = &open[s];
                let (gr, hr) = (o.g - gl, o.h - hl);
                if hl >= min_child_weight && hr >= min_child_weight {
                    let gain = 0.5
                        * (scorer.score(gl, hl) + scorer.score(gr, hr) - parent_score[s]);
                    if gain > MIN_GAIN && best[s].is_none_or(|b| gain > b.gain) {
                        best[s] = Some(Candidate {
                            feature: f,
                            threshold: 0.5 * (last[s] + v),
                            gain,
                            g_left: gl,
                            h_left: hl,
                            cover_left: cl,
                        });
                    }
                }
            }
            acc[s].0 += grad[i];
            acc[s].1 += hess[i];
            acc[s].2 += weight[i];
            last[s] = v;
        }
    }
    best
}

fn build_tree(
    cols: &Columns,
    grad: &[f64],
    hess: &[f64],
    weight: &[f64],
    cfg: &TrainConfig,
) -> Tree {
    let scorer = Scorer {
        l1: cfg.l1_penalty,
        l2: cfg.l2_penalty,
    };
    let n = grad.len();
    let mut assign = vec![0u32; n];
    let placeholder = Node::Leaf { value: 0.0, cover: 0.0 };
    let mut nodes = vec![placeholder.clone()];
    let mut open = vec![OpenNode {
        node: 0,
        g: grad.iter().sum(),
        h: hess.iter().sum(),
        cover: weight.iter().sum(),
    }];

    for depth in 0..=cfg.max_depth {
        if open.is_empty() {
            break;
        }
        let best = if depth < cfg.max_depth {
            find_splits(cols, &assign, &open, grad, hess, weight, &scorer, cfg.min_child_weight)
        } else {
            vec![None; open.len()]
        };
        let mut next = Vec::new();
        let mut routing: Vec<Option<(u32, usize, f64)>> = vec![None; open.len()];
        for (s, o) in open.iter().enumerate() {
            match best[s] {
                None => {
                    nodes[o.node] = Node::Leaf {
                        value: scorer.leaf(o.g, o.h),
                        cover: o.cover,
                    };
                }
                Some(c) => {
                    let left = nodes.len();
                    nodes.push(placeholder.clone());
                    nodes.push(placeholder.clone());
                    nodes[o.node] = Node::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left,
                        right: left + 1,
                        cover: o.cover,
                    };
                    routing[s] = Some((next.len() as u32, c.feature, c.threshold));
                    next.push(OpenNode {
                        node: left,
                        g: c.g_left,
                        h: c.h_left,
                        cover: c.cover_left,
                    });
                    next.push(OpenNode {
                        node: left + 1,
                        g: o.g - c.g_left,
                        h: o.h - c.h_left,
                        cover: o.cover - c.cover_left,
                    });
                }
            }
        }
        for (i, a) in assign.iter_mut().enumerate() {
            if *a == NONE {
                continue;
            }
            *a = match routing[*a as usize] {
                None => NONE,
                Some((slot, f, t)) => {
                    if cols.cols[f][i] < t {
                        slot
                    } else {
                        slot + 1
                    }
                }
            };
        }
        open = next;
    }
    Tree { nodes }
}

fn check_inputs<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[usize],
    n_features: usize,
    cfg: &TrainConfig,
) -> Result<(), EnsembleError> {
    cfg.validate()?;
    if rows.len() != labels.len() {
        return Err(EnsembleError::InvalidInput(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != n_features {
            return Err(EnsembleError::BadVectorLength {
                expected: n_features,
                got: r.len(),
            });
        }
        if let Some(col) = r.iter().position(|v| !v.is_finite()) {
            return Err(EnsembleError::NonFiniteFeature { row: i, column: col });
        }
    }
    if let Some(bad) = labels.iter().find(|&&y| y >= N_CLASSES) {
        return Err(EnsembleError::InvalidInput(format!("label {bad} out of range")));
    }
    let mut seen = [false; N_CLASSES];
    labels.iter().for_each(|&y| seen[y] = true);
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(EnsembleError::DegenerateLabels);
    }
    Ok(())
}

/// Trains an ensemble and records the training loss after every round.
pub fn train_with_history<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[usize],
    feature_names: &[&str],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, EnsembleError> {
    let n_features = feature_names.len();
    check_inputs(rows, labels, n_features, cfg)?;
    let n = rows.len();
    let cols = Columns::new(rows, n_features);
    let weight = sample_weights(labels, cfg);

    // Base margins: log of the weighted class priors.
    let mut class_mass = [0.0; N_CLASSES];
    for (&y, &w) in labels.iter().zip(&weight) {
        class_mass[y] += w;
    }
    let total: f64 = class_mass.iter().sum();
    let base_score = class_mass.map(|m| (m / total).max(1e-6).ln());

    let mut margins = vec![base_score; n];
    let mut history = vec![weighted_log_loss(&margins, labels, &weight)];
    let mut trees: Vec<Vec<Tree>> = Vec::with_capacity(cfg.rounds);
    let mut prob = [0.0; N_CLASSES];
    let mut grad = vec![[0.0; N_CLASSES]; n];
    let mut hess = vec![[0.0; N_CLASSES]; n];
    let mut g_k = vec![0.0; n];
    let mut h_k = vec![0.0; n];

    for _round in 0..cfg.rounds {
        for i in 0..n {
            softmax_into(&margins[i], &mut prob);
            for k in 0..N_CLASSES {
                let target = if labels[i] == k { 1.0 } else { 0.0 };
                grad[i][k] = weight[i] * (prob[k] - target);
                hess[i][k] = (weight[i] * prob[k] * (1.0 - prob[k])).max(MIN_HESSIAN);
            }
        }
        let mut round_trees = Vec::with_capacity(N_CLASSES);
        for k in 0..N_CLASSES {
            for i in 0..n {
                g_k[i] = grad[i][k];
                h_k[i] = hess[i][k];
            }
            round_trees.push(build_tree(&cols, &g_k, &h_k, &weight, cfg));
        }
        for (i, m) in margins.iter_mut().enumerate() {
            let x = rows[i].as_ref();
            for (k, t) in round_trees.iter().enumerate() {
                m[k] += cfg.learning_rate * t.predict(x);
            }
        }
        history.push(weighted_log_loss(&margins, labels, &weight));
        trees.push(round_trees);
    }

    let model = TreeEnsemble {
        feature_names: feature_names.iter().map(|s| s.to_string()).collect(),
        classes: super::CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
        base_score: base_score.to_vec(),
        learning_rate: cfg.learning_rate,
        trees,
        train_config: Some(cfg.clone()),
        feature_stats: FeatureStats::from_rows(rows),
    };
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}

/// Trains a multiclass ensemble; see the module docs for the algorithm.
pub fn train<R: AsRef<[f64]>>(
    rows: &[R],
    labels: &[usize],
    feature_names: &[&str],
    cfg: &TrainConfig,
) -> Result<TreeEnsemble, EnsembleError> {
    train_with_history(rows, labels, feature_names, cfg).map(|o| o.model)
}
