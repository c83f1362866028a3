use matrisk_core::ensemble::{
    evaluate, roc_auc, softmax, train, train_with_history, EnsembleError, Node, TrainConfig,
    Tree, TreeEnsemble, FORMAT_NAME,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn names(n: usize) -> Vec<&'static str> {
    ["f0", "f1", "f2", "f3", "f4", "f5", "f6", "f7"][..n].to_vec()
}

fn hand_model(trees: Vec<Vec<Tree>>, n_features: usize) -> TreeEnsemble {
    TreeEnsemble {
        feature_names: names(n_features).iter().map(|s| s.to_string()).collect(),
        classes: vec!["low".into(), "mid".into(), "high".into()],
        base_score: vec![0.1, -0.2, 0.3],
        learning_rate: 0.5,
        trees,
        train_config: None,
        feature_stats: None,
    }
}

/// 40 points split by x0 + x1 > 0 into classes 0 and 2.
fn separable() -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut x = Vec::new();
    let mut y = Vec::new();
    while x.len() < 40 {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let s: f64 = p[0] + p[1];
        if s.abs() < 0.1 {
            continue;
        }
        y.push(if s > 0.0 { 2 } else { 0 });
        x.push(p);
    }
    (x, y)
}

fn random_rows(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| (rng.random_range(0.0..10.0f64) * 2.0).round() / 2.0).collect())
        .collect();
    let y = x
        .iter()
        .map(|r| {
            let s = r[0] + 0.5 * r[1] + rng.random_range(-2.0..2.0);
            if s < 5.0 {
                0
            } else if s < 9.0 {
                1
            } else {
                2
            }
        })
        .collect();
    (x, y)
}

#[test]
fn separable_toy_set_fits_perfectly() {
    let (x, y) = separable();
    let cfg = TrainConfig {
        rounds: 50,
        max_depth: 3,
        learning_rate: 0.3,
        min_child_weight: 0.0,
        ..TrainConfig::default()
    };
    let m = train(&x, &y, &names(2), &cfg).unwrap();
    let acc = x.iter().zip(&y).filter(|(r, &t)| m.predict(&r[..]).unwrap() == t).count();
    assert_eq!(acc, 40);
}

#[test]
fn first_split_matches_exhaustive_depth_one_search() {
    // Oracle: score every (feature, midpoint) directly from the round-0
    // gradients with the textbook gain formula.
    let (x, y) = random_rows(60, 3, 11);
    let cfg = TrainConfig {
        rounds: 1,
        max_depth: 1,
        l1_penalty: 0.0,
        ..TrainConfig::default()
    };
    let m = train(&x, &y, &names(3), &cfg).unwrap();
    let w = matrisk_core::ensemble::sample_weights(&y, &cfg);
    let mass: Vec<f64> = (0..3)
        .map(|k| y.iter().zip(&w).filter(|(c, _)| **c == k).map(|(_, v)| v).sum())
        .collect();
    let total: f64 = mass.iter().sum();
    let prior: Vec<f64> = mass.iter().map(|v| v / total).collect();
    for k in 0..3 {
        let g: Vec<f64> = (0..x.len())
            .map(|i| w[i] * (prior[k] - if y[i] == k { 1.0 } else { 0.0 }))
            .collect();
        let h: Vec<f64> = (0..x.len()).map(|i| w[i] * prior[k] * (1.0 - prior[k])).collect();
        let score = |gs: f64, hs: f64| gs * gs / (hs + cfg.l2_penalty);
        let (gt, ht): (f64, f64) = (g.iter().sum(), h.iter().sum());
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..3 {
            let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for pair in vals.windows(2) {
                let t = 0.5 * (pair[0] + pair[1]);
                let (mut gl, mut hl) = (0.0, 0.0);
                for i in 0..x.len() {
                    if x[i][f] < t {
                        gl += g[i];
                        hl += h[i];
                    }
                }
                if hl < 1.0 || ht - hl < 1.0 {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl) + score(gt - gl, ht - hl) - score(gt, ht));
                if best.is_none_or(|b| gain > b.0 + 1e-12) {
                    best = Some((gain, f, t));
                }
            }
        }
        let (_, bf, bt) = best.expect("some split exists");
        match &m.trees[0][k].nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!((*feature, *threshold), (bf, bt), "class {k}");
            }
            other => panic!("class {k}: expected a split, got {other:?}"),
        }
    }
}

#[test]
fn depth_zero_single_round_predicts_weighted_priors() {
    let (x, y) = random_rows(50, 2, 5);
    let cfg = TrainConfig {
        rounds: 1,
        max_depth: 0,
        ..TrainConfig::default()
    };
    let m = train(&x, &y, &names(2), &cfg).unwrap();
    assert!(m.trees[0].iter().all(|t| t.nodes.len() == 1));
    // Balanced weights make the weighted prior uniform.
    for r in x.iter().take(5) {
        let p = m.predict_proba(r).unwrap();
        for v in p {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }
    let explicit = TrainConfig {
        class_weights: Some([1.0, 1.0, 1.0]),
        ..cfg
    };
    let m = train(&x, &y, &names(2), &explicit).unwrap();
    let counts: Vec<f64> = (0..3).map(|k| y.iter().filter(|c| **c == k).count() as f64).collect();
    let p = m.predict_proba(&[0.0, 0.0]).unwrap();
    for k in 0..3 {
        assert!((p[k] - counts[k] / 50.0).abs() < 1e-9, "{p:?}");
    }
}

#[test]
fn rounds_zero_and_degenerate_labels_rejected() {
    let (x, y) = random_rows(10, 2, 1);
    let cfg = TrainConfig {
        rounds: 0,
        ..TrainConfig::default()
    };
    assert!(matches!(train(&x, &y, &names(2), &cfg), Err(EnsembleError::InvalidConfig(_))));
    let one_class = vec![1; x.len()];
    assert!(matches!(
        train(&x, &one_class, &names(2), &TrainConfig::default()),
        Err(EnsembleError::DegenerateLabels)
    ));
    let mut bad = x.clone();
    bad[3][1] = f64::NAN;
    assert!(matches!(
        train(&bad, &y, &names(2), &TrainConfig::default()),
        Err(EnsembleError::NonFiniteFeature { row: 3, column: 1 })
    ));
}

#[test]
fn all_leaf_and_stump_margins() {
    let leaves = vec![vec![Tree::leaf(1.0, 1.0), Tree::leaf(0.0, 1.0), Tree::leaf(-1.0, 1.0)]; 2];
    let m = hand_model(leaves, 1);
    let a = m.predict_margin(&[0.0]).unwrap();
    let b = m.predict_margin(&[100.0]).unwrap();
    assert_eq!(a, b);
    assert!((a[0] - (0.1 + 0.5 * 2.0)).abs() < 1e-15);

    let stump = Tree::stump(0, 5.0, (-1.0, 1.0), (1.0, 1.0));
    let m = hand_model(vec![vec![stump, Tree::leaf(0.0, 2.0), Tree::leaf(0.0, 2.0)]], 1);
    let margin = m.predict_margin(&[7.0]).unwrap();
    assert!((margin[0] - (0.1 + 0.5)).abs() < 1e-15);
    assert!(matches!(
        m.predict_margin(&[1.0, 2.0]),
        Err(EnsembleError::BadVectorLength { expected: 1, got: 2 })
    ));
}

#[test]
fn softmax_properties_and_tie_break() {
    assert_eq!(softmax(&[0.0, 0.0, 0.0]), vec![1.0 / 3.0; 3]);
    assert!(softmax(&[0.0, 0.0, 10.0])[2] > 0.9999);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let m: Vec<f64> = (0..3).map(|_| rng.random_range(-20.0..20.0)).collect();
        let p = softmax(&m);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = m.iter().map(|v| v + 7.5).collect();
        assert_eq!(
            matrisk_core::ensemble::argmax_high(&p),
            matrisk_core::ensemble::argmax_high(&softmax(&shifted))
        );
    }
    // Mid and High tied above Low.
    let m = hand_model(vec![vec![Tree::leaf(-1.0, 1.0), Tree::leaf(0.0, 1.0), Tree::leaf(0.0, 1.0)]], 1);
    let mut tied = m.clone();
    tied.base_score = vec![0.0, 0.0, 0.0];
    assert_eq!(tied.predict(&[0.0]).unwrap(), 2);
}

#[test]
fn evaluation_metrics() {
    // Perfect: leaves push the true class by feature value.
    let t = |k: f64| Tree::stump(0, k - 0.5, (0.0, 1.0), (20.0, 1.0));
    let mut perfect = hand_model(
        vec![vec![
            Tree { nodes: vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 2.0 },
                Node::Leaf { value: 20.0, cover: 1.0 },
                Node::Leaf { value: 0.0, cover: 1.0 },
            ] },
            Tree { nodes: vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 3.0 },
                Node::Leaf { value: 0.0, cover: 1.0 },
                Node::Split { feature: 0, threshold: 1.5, left: 3, right: 4, cover: 2.0 },
                Node::Leaf { value: 20.0, cover: 1.0 },
                Node::Leaf { value: 0.0, cover: 1.0 },
            ] },
            t(2.0),
        ]],
        1,
    );
    perfect.base_score = vec![0.0; 3];
    let x = vec![[0.0], [1.0], [2.0], [0.0], [2.0], [1.0]];
    let y = vec![0, 1, 2, 0, 2, 1];
    let m = evaluate(&perfect, &x, &y).unwrap();
    assert_eq!(m.accuracy, 1.0);
    assert_eq!(m.macro_auc, 1.0);
    assert_eq!(m.confusion, [[2, 0, 0], [0, 2, 0], [0, 0, 2]]);

    let constant = hand_model(vec![vec![Tree::leaf(0.0, 1.0); 3]], 1);
    let m = evaluate(&constant, &x, &y).unwrap();
    assert_eq!(m.per_class_auc, [Some(0.5); 3]);
    for (k, row) in m.confusion.iter().enumerate() {
        assert_eq!(row.iter().sum::<usize>(), y.iter().filter(|c| **c == k).count());
    }
    let empty: Vec<[f64; 1]> = Vec::new();
    assert!(matches!(evaluate(&constant, &empty, &[]), Err(EnsembleError::EmptyTestSet)));
}

#[test]
fn six_point_auc_by_hand() {
    // Positives 0.9, 0.6, 0.4; negatives 0.7, 0.4, 0.1.
    // Pairs won: 0.9 beats 3; 0.6 beats 0.4 and 0.1; 0.4 ties 0.4 and beats 0.1.
    // (3 + 2 + 1.5) / 9.
    let s = [0.9, 0.7, 0.6, 0.4, 0.4, 0.1];
    let p = [true, false, true, true, false, false];
    assert!((roc_auc(&s, &p).unwrap() - 6.5 / 9.0).abs() < 1e-15);
}

fn check_tree(t: &Tree, max_depth: usize) {
    assert!(t.depth() <= max_depth);
    for n in &t.nodes {
        if let Node::Split { left, right, cover, .. } = n {
            let sum = t.nodes[*left].cover() + t.nodes[*right].cover();
            assert!((sum - cover).abs() < 1e-9, "{sum} vs {cover}");
        }
    }
}

#[test]
fn trained_trees_conserve_cover_and_respect_depth() {
    let (x, y) = random_rows(200, 4, 21);
    let cfg = TrainConfig {
        rounds: 30,
        max_depth: 4,
        ..TrainConfig::default()
    };
    let out = train_with_history(&x, &y, &names(4), &cfg).unwrap();
    assert_eq!(out.model.trees.len(), 30);
    for round in &out.model.trees {
        assert_eq!(round.len(), 3);
        round.iter().for_each(|t| check_tree(t, 4));
    }
    assert_eq!(out.loss_history.len(), 31);
    assert!(out.loss_history.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

#[test]
fn training_is_deterministic() {
    let (x, y) = random_rows(120, 3, 8);
    let cfg = TrainConfig {
        rounds: 20,
        ..TrainConfig::default()
    };
    let a = train(&x, &y, &names(3), &cfg).unwrap();
    let b = train(&x, &y, &names(3), &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn save_load_round_trip_is_bit_exact() {
    let (x, y) = random_rows(150, 4, 13);
    let cfg = TrainConfig {
        rounds: 25,
        ..TrainConfig::default()
    };
    let m = train(&x, &y, &names(4), &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    m.save(&path).unwrap();
    let back = TreeEnsemble::load(&path).unwrap();
    assert_eq!(back, m);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..15.0)).collect();
        let a = m.predict_margin(&v).unwrap();
        let b = back.predict_margin(&v).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}

#[test]
fn corrupt_and_future_files_rejected() {
    let (x, y) = random_rows(40, 2, 2);
    let cfg = TrainConfig {
        rounds: 3,
        ..TrainConfig::default()
    };
    let json = train(&x, &y, &names(2), &cfg).unwrap().to_json();
    let truncated = &json[..json.len() / 2];
    assert!(matches!(TreeEnsemble::from_json(truncated), Err(EnsembleError::CorruptFile(_))));
    let future = json.replacen("\"version\": 1", "\"version\": 999", 1);
    assert!(matches!(
        TreeEnsemble::from_json(&future),
        Err(EnsembleError::VersionMismatch { found: 999, expected: 1 })
    ));
    let wrong = json.replacen(FORMAT_NAME, "something-else", 1);
    assert!(matches!(TreeEnsemble::from_json(&wrong), Err(EnsembleError::CorruptFile(_))));
    let bad_feature = json.replacen("\"feature\": ", "\"feature\": 9", 1);
    assert!(TreeEnsemble::from_json(&bad_feature).is_err());
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        TreeEnsemble::load(dir.path().join("missing.json")),
        Err(EnsembleError::Io { .. })
    ));
}
