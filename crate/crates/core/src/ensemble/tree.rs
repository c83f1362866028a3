use serde::{Deserialize, Serialize};

/// A node of a binary regression tree. Samples with `x[feature] < threshold`
/// go left. `cover` is the total training instance weight that reached the
/// node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        cover: f64,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match self {
            Node::Split { cover, .. } | Node::Leaf { cover, .. } => *cover,
        }
    }
}

/// Flat tree; the root is `nodes[0]` and children always follow their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64, cover: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value, cover }],
        }
    }

    /// One split on `feature` at `threshold` with two leaves.
    pub fn stump(
        feature: usize,
        threshold: f64,
        left: (f64, f64),
        right: (f64, f64),
    ) -> Self {
        Self {
            nodes: vec![
                Node::Split {
                    feature,
                    threshold,
                    left: 1,
                    right: 2,
                    cover: left.1 + right.1,
                },
                Node::Leaf { value: left.0, cover: left.1 },
                Node::Leaf { value: right.0, cover: right.1 },
            ],
        }
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Raw leaf value reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if x[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    pub fn features_used(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }

    /// Cover-weighted mean leaf value: the tree's expectation over the
    /// training distribution.
    pub fn expected_value(&self) -> f64 {
        fn go(t: &Tree, i: usize) -> f64 {
            match &t.nodes[i] {
                Node::Leaf { value, .. } => *value,
                Node::Split { left, right, cover, .. } => {
                    let l = &t.nodes[*left];
                    let r = &t.nodes[*right];
                    (l.cover() * go(t, *left) + r.cover() * go(t, *right)) / cover
                }
            }
        }
        go(self, 0)
    }

    /// Structural problems: dangling or backward child links, feature indices
    /// out of range, non-positive covers.
    pub(crate) fn structural_error(&self, n_features: usize) -> Option<String> {
        if self.nodes.is_empty() {
            return Some("empty tree".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if !(n.cover() > 0.0 && n.cover().is_finite()) {
                return Some(format!("node {i} has cover {}", n.cover()));
            }
            match n {
                Node::Leaf { value, .. } if !value.is_finite() => {
                    return Some(format!("leaf {i} has non-finite value"))
                }
                Node::Split { feature, threshold, left, right, .. } => {
                    if *feature >= n_features {
                        return Some(format!("node {i} splits on feature {feature}"));
                    }
                    if !threshold.is_finite() {
                        return Some(format!("node {i} has non-finite threshold"));
                    }
                    for c in [*left, *right] {
                        if c <= i || c >= self.nodes.len() {
                            return Some(format!("node {i} has invalid child {c}"));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf { .. } => {}
            }
        }
        if parents[1..].iter().any(|p| *p != 1) {
            return Some("node reachable from zero or several parents".into());
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stump_routes_on_strict_less_than() {
        let t = Tree::stump(0, 5.0, (-1.0, 1.0), (1.0, 1.0));
        assert_eq!(t.predict(&[7.0]), 1.0);
        assert_eq!(t.predict(&[5.0]), 1.0);
        assert_eq!(t.predict(&[4.9]), -1.0);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.expected_value(), 0.0);
    }

    #[test]
    fn structural_checks() {
        let mut t = Tree::stump(0, 5.0, (-1.0, 1.0), (1.0, 1.0));
        assert!(t.structural_error(1).is_none());
        assert!(t.structural_error(0).is_some());
        if let Node::Split { right, .. } = &mut t.nodes[0] {
            *right = 1;
        }
        assert!(t.structural_error(1).is_some());
    }
}
