//! Exact path-dependent tree SHAP.
//!
//! Conditional expectations are taken over the training distribution as
//! recorded by node covers: when a feature is "absent", both children are
//! visited and weighted by their share of the parent's cover. The polynomial
//! algorithm tracks, along each root-to-leaf path, the proportion of subsets
//! of the path's unique features that reach the leaf.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensemble::{argmax_high, EnsembleError, Node, Tree, TreeEnsemble};

#[derive(Debug, Error)]
pub enum ShapError {
    #[error(transparent)]
    Model(#[from] EnsembleError),
    #[error("cannot compute importance over an empty dataset")]
    EmptyDataset,
}

/// Attributions of one instance's margins, one row per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapValues {
    pub feature_names: Vec<String>,
    pub instance: Vec<f64>,
    /// Expected margin per class under the cover distribution.
    pub base_values: Vec<f64>,
    /// `phi[k][j]`: contribution of feature `j` to the class-`k` margin.
    pub phi: Vec<Vec<f64>>,
}

impl ShapValues {
    /// `base + sum(phi)` for class `k`; equals the model margin.
    pub fn reconstructed_margin(&self, k: usize) -> f64 {
        self.base_values[k] + self.phi[k].iter().sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn extend_path(path: &mut Vec<PathElement>, zero: f64, one: f64, feature: Option<usize>) {
    let d = path.len();
    path.push(PathElement {
        feature,
        zero_fraction: zero,
        one_fraction: one,
        pweight: if d == 0 { 1.0 } else { 0.0 },
    });
    for i in (0..d).rev() {
        path[i + 1].pweight += one * path[i].pweight * (i + 1) as f64 / (d + 1) as f64;
        path[i].pweight = zero * path[i].pweight * (d - i) as f64 / (d + 1) as f64;
    }
}

fn unwind_path(path: &mut Vec<PathElement>, index: usize) {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let mut next_one = path[d].pweight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].pweight;
            path[i].pweight = next_one * (d + 1) as f64 / ((i + 1) as f64 * one);
            next_one = tmp - path[i].pweight * zero * (d - i) as f64 / (d + 1) as f64;
        } else {
            path[i].pweight = path[i].pweight * (d + 1) as f64 / (zero * (d - i) as f64);
        }
    }
    for i in index..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

fn unwound_path_sum(path: &[PathElement], index: usize) -> f64 {
    let d = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let mut next_one = path[d].pweight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next_one * (d + 1) as f64 / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].pweight - tmp * zero * ((d - i) as f64 / (d + 1) as f64);
        } else if zero != 0.0 {
            total += (path[i].pweight / zero) / ((d - i) as f64 / (d + 1) as f64);
        }
    }
    total
}

fn recurse(
    tree: &Tree,
    node: usize,
    x: &[f64],
    phi: &mut [f64],
    parent_path: &[PathElement],
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    let mut path = parent_path.to_vec();
    extend_path(&mut path, zero, one, feature);
    match &tree.nodes[node] {
        Node::Leaf { value, .. } => {
            for i in 1..path.len() {
                let w = unwound_path_sum(&path, i);
                let el = path[i];
                let f = el.feature.expect("only the root element has no feature");
                phi[f] += w * (el.one_fraction - el.zero_fraction) * value;
            }
        }
        Node::Split { feature: f, threshold, left, right, cover } => {
            let (hot, cold) = if x[*f] < *threshold { (*left, *right) } else { (*right, *left) };
            let hot_zero = tree.nodes[hot].cover() / cover;
            let cold_zero = tree.nodes[cold].cover() / cover;
            let mut incoming_zero = 1.0;
            let mut incoming_one = 1.0;
            if let Some(k) = (1..path.len()).find(|&k| path[k].feature == Some(*f)) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind_path(&mut path, k);
            }
            recurse(tree, hot, x, phi, &path, hot_zero * incoming_zero, incoming_one, Some(*f));
            recurse(tree, cold, x, phi, &path, cold_zero * incoming_zero, 0.0, Some(*f));
        }
    }
}

/// Adds the SHAP values of a single tree's raw output at `x` into `phi`.
pub fn tree_shap(tree: &Tree, x: &[f64], phi: &mut [f64]) {
    recurse(tree, 0, x, phi, &[], 1.0, 1.0, None);
}

/// Per-class attributions of the model margins at `x`.
pub fn explain_instance(m: &TreeEnsemble, x: &[f64]) -> Result<ShapValues, ShapError> {
    // Validates length and finiteness.
    m.predict_margin(x)?;
    let nf = m.n_features();
    let mut base_values = Vec::with_capacity(m.n_classes());
    let mut phi = Vec::with_capacity(m.n_classes());
    for k in 0..m.n_classes() {
        let mut raw = vec![0.0; nf];
        let mut expected = 0.0;
        for t in m.class_trees(k) {
            tree_shap(t, x, &mut raw);
            expected += t.expected_value();
        }
        base_values.push(m.base_score[k] + m.learning_rate * expected);
        phi.push(raw.into_iter().map(|v| v * m.learning_rate).collect());
    }
    Ok(ShapValues {
        feature_names: m.feature_names.clone(),
        instance: x.to_vec(),
        base_values,
        phi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub index: usize,
    pub mean_abs_phi: f64,
    /// 1-based position in the descending ranking.
    pub rank: usize,
}

/// Features sorted by descending mean |phi|, ties by feature index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub n_instances: usize,
    pub features: Vec<FeatureImportance>,
}

impl GlobalImportance {
    pub fn get(&self, feature: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.feature == feature)
    }

    /// Two-column CSV (`feature,mean_abs_shap`) in rank order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,mean_abs_shap\n");
        for f in &self.features {
            s.push_str(&format!("{},{}\n", f.feature, f.mean_abs_phi));
        }
        s
    }
}

/// Mean |phi| of each feature over `rows`, attributing each instance's
/// predicted-class margin. Sums run in row order.
pub fn global_importance<R: AsRef<[f64]>>(
    m: &TreeEnsemble,
    rows: &[R],
) -> Result<GlobalImportance, ShapError> {
    if rows.is_empty() {
        return Err(ShapError::EmptyDataset);
    }
    let mut sums = vec![0.0; m.n_features()];
    for r in rows {
        let x = r.as_ref();
        let cls = argmax_high(&m.predict_margin(x)?);
        let mut raw = vec![0.0; m.n_features()];
        for t in m.class_trees(cls) {
            tree_shap(t, x, &mut raw);
        }
        for (s, v) in sums.iter_mut().zip(raw) {
            *s += (v * m.learning_rate).abs();
        }
    }
    let n = rows.len() as f64;
    let mut features: Vec<FeatureImportance> = sums
        .into_iter()
        .enumerate()
        .map(|(i, s)| FeatureImportance {
            feature: m.feature_names[i].clone(),
            index: i,
            mean_abs_phi: s / n,
            rank: 0,
        })
        .collect();
    features.sort_by(|a, b| b.mean_abs_phi.total_cmp(&a.mean_abs_phi).then(a.index.cmp(&b.index)));
    for (i, f) in features.iter_mut().enumerate() {
        f.rank = i + 1;
    }
    Ok(GlobalImportance {
        n_instances: rows.len(),
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stump_with_equal_covers() {
        let t = Tree::stump(0, 5.0, (-1.0, 1.0), (1.0, 1.0));
        let mut phi = vec![0.0; 3];
        tree_shap(&t, &[7.0, 0.0, 0.0], &mut phi);
        assert!((phi[0] - 1.0).abs() < 1e-15);
        assert_eq!(&phi[1..], &[0.0, 0.0]);
    }

    #[test]
    fn single_leaf_has_no_attribution() {
        let t = Tree::leaf(0.3, 10.0);
        let mut phi = vec![0.0; 2];
        tree_shap(&t, &[1.0, 2.0], &mut phi);
        assert_eq!(phi, vec![0.0, 0.0]);
        assert_eq!(t.expected_value(), 0.3);
    }
}
