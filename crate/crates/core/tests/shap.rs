use matrisk_core::ensemble::{train, Node, TrainConfig, Tree, TreeEnsemble};
use matrisk_core::shap::{explain_instance, global_importance, tree_shap, ShapError};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cover-weighted expectation of a tree given only the features in `known`.
fn cond_expectation(t: &Tree, node: usize, x: &[f64], known: u32) -> f64 {
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

/// Shapley values by enumerating every subset of the `m` features.
fn brute_force(trees: &[&Tree], x: &[f64], m: usize) -> Vec<f64> {
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

/// Random tree over `m` features with positive covers; thresholds on a
/// coarse grid so repeated features and shared thresholds occur.
fn random_tree(rng: &mut ChaCha8Rng, m: usize, depth: usize) -> Tree {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>, m: usize, depth: usize, cover: f64) -> usize {
        let idx = nodes.len();
        if depth == 0 || rng.random_bool(0.2) {
            nodes.push(Node::Leaf {
                value: rng.random_range(-2.0..2.0),
                cover,
            });
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

fn ensemble_of(trees: Vec<Vec<Tree>>, m: usize, lr: f64) -> TreeEnsemble {
    TreeEnsemble {
        feature_names: (0..m).map(|i| format!("f{i}")).collect(),
        classes: vec!["low".into(), "mid".into(), "high".into()],
        base_score: vec![-0.3, 0.0, 0.2],
        learning_rate: lr,
        trees,
        train_config: None,
        feature_stats: None,
    }
}

#[test]
fn stump_over_eight_features_matches_subset_oracle() {
    let t = Tree::stump(0, 5.0, (-1.0, 1.0), (1.0, 1.0));
    let leaf = Tree::leaf(0.0, 2.0);
    let m = ensemble_of(vec![vec![t.clone(), leaf.clone(), leaf]], 8, 0.05);
    let x = [7.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
    let s = explain_instance(&m, &x).unwrap();
    let oracle = brute_force(&[&t], &x, 8);
    assert!((s.phi[0][0] - 0.05).abs() < 1e-15);
    for j in 0..8 {
        assert!((s.phi[0][j] - 0.05 * oracle[j]).abs() < 1e-12);
    }
    assert!(s.phi[0][1..].iter().all(|v| *v == 0.0));
    assert!(s.phi[1].iter().chain(&s.phi[2]).all(|v| *v == 0.0));
    assert_eq!(s.base_values[1], 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn small_ensembles_match_subset_oracle(
        seed in any::<u64>(),
        m in 1usize..=4,
        n_trees in 1usize..=3,
        depth in 1usize..=3,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trees: Vec<Tree> = (0..n_trees).map(|_| random_tree(&mut rng, m, depth)).collect();
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(0..5) as f64 + 0.5 * rng.random_range(0..2) as f64).collect();
        let mut phi = vec![0.0; m];
        for t in &trees {
            tree_shap(t, &x, &mut phi);
        }
        let refs: Vec<&Tree> = trees.iter().collect();
        let oracle = brute_force(&refs, &x, m);
        for j in 0..m {
            prop_assert!((phi[j] - oracle[j]).abs() < 1e-9, "feature {}: {} vs {}", j, phi[j], oracle[j]);
        }
    }

    #[test]
    fn two_tree_attributions_add(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tree(&mut rng, 4, 3);
        let b = random_tree(&mut rng, 4, 3);
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..5.0)).collect();
        let (mut pa, mut pb, mut pab) = (vec![0.0; 4], vec![0.0; 4], vec![0.0; 4]);
        tree_shap(&a, &x, &mut pa);
        tree_shap(&b, &x, &mut pb);
        tree_shap(&a, &x, &mut pab);
        tree_shap(&b, &x, &mut pab);
        for j in 0..4 {
            prop_assert!((pab[j] - pa[j] - pb[j]).abs() < 1e-12);
        }
    }
}

fn trained() -> (TreeEnsemble, Vec<Vec<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let x: Vec<Vec<f64>> = (0..300)
        .map(|_| (0..5).map(|_| rng.random_range(0.0..10.0)).collect())
        .collect();
    let y: Vec<usize> = x
        .iter()
        .map(|r| {
            let s = r[0] + r[1] * 0.7 - r[3] * 0.3;
            if s < 4.0 { 0 } else if s < 8.0 { 1 } else { 2 }
        })
        .collect();
    let cfg = TrainConfig { rounds: 40, ..TrainConfig::default() };
    // Feature 4 is pure noise but may be used; feature 2 is pinned to a
    // constant so no tree can split on it.
    let x: Vec<Vec<f64>> = x.into_iter().map(|mut r| { r[2] = 1.0; r }).collect();
    let m = train(&x, &y, &["a", "b", "c", "d", "e"], &cfg).unwrap();
    (m, x)
}

#[test]
fn local_accuracy_on_trained_model() {
    let (m, x) = trained();
    for r in x.iter().take(100) {
        let s = explain_instance(&m, r).unwrap();
        let margin = m.predict_margin(r).unwrap();
        for k in 0..3 {
            assert!((s.reconstructed_margin(k) - margin[k]).abs() < 1e-6);
        }
        // Dummy feature never referenced by any tree.
        assert!(s.phi.iter().all(|p| p[2] == 0.0));
    }
}

#[test]
fn explain_is_deterministic_and_checks_length() {
    let (m, x) = trained();
    assert_eq!(explain_instance(&m, &x[0]).unwrap(), explain_instance(&m, &x[0]).unwrap());
    assert!(matches!(explain_instance(&m, &[1.0, 2.0]), Err(ShapError::Model(_))));
}

#[test]
fn global_importance_properties() {
    let (m, x) = trained();
    let gi = global_importance(&m, &x).unwrap();
    let mut ranks: Vec<usize> = gi.features.iter().map(|f| f.rank).collect();
    ranks.sort_unstable();
    assert_eq!(ranks, vec![1, 2, 3, 4, 5]);
    assert!(gi.features.iter().all(|f| f.mean_abs_phi >= 0.0));
    assert!(gi.features.windows(2).all(|w| w[0].mean_abs_phi >= w[1].mean_abs_phi));
    assert_eq!(gi.get("c").unwrap().mean_abs_phi, 0.0);
    assert_eq!(gi.features[0].feature, "a");

    let doubled: Vec<Vec<f64>> = x.iter().chain(&x).cloned().collect();
    let gi2 = global_importance(&m, &doubled).unwrap();
    for (a, b) in gi.features.iter().zip(&gi2.features) {
        assert_eq!(a.feature, b.feature);
        assert!((a.mean_abs_phi - b.mean_abs_phi).abs() < 1e-12);
    }
    let empty: Vec<Vec<f64>> = Vec::new();
    assert!(matches!(global_importance(&m, &empty), Err(ShapError::EmptyDataset)));
    assert!(gi.to_csv().starts_with("feature,mean_abs_shap\na,"));
}

#[test]
fn single_feature_model_ranks_it_first_and_ties_by_index() {
    let t = Tree::stump(0, 5.0, (-1.0, 3.0), (1.0, 1.0));
    let m = ensemble_of(vec![vec![t.clone(), t.clone(), t]], 3, 0.1);
    let gi = global_importance(&m, &[[1.0, 0.0, 0.0], [9.0, 0.0, 0.0]]).unwrap();
    let order: Vec<&str> = gi.features.iter().map(|f| f.feature.as_str()).collect();
    assert_eq!(order, vec!["f0", "f1", "f2"]);
    assert!(gi.features[1..].iter().all(|f| f.mean_abs_phi == 0.0));
}
