use serde::{Deserialize, Serialize};

use super::{EnsembleError, TreeEnsemble, N_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub accuracy: f64,
    /// Unweighted mean of the per-class one-vs-rest AUCs that are defined.
    pub macro_auc: f64,
    /// `None` when the class has no positives or no negatives in the set.
    pub per_class_auc: [Option<f64>; N_CLASSES],
    /// Zero when nothing was predicted as the class.
    pub precision: [f64; N_CLASSES],
    pub recall: [f64; N_CLASSES],
    /// Rows are true classes, columns predicted classes.
    pub confusion: [[usize; N_CLASSES]; N_CLASSES],
}

/// Area under the ROC curve by the rank-sum formula; tied scores count one
/// half. `None` if either group is empty.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|p| **p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += idx[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * avg_rank;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

/// Accuracy, one-vs-rest AUCs, per-class precision and recall, and the
/// confusion matrix of `model` on a labelled set.
pub fn evaluate<R: AsRef<[f64]>>(
    model: &TreeEnsemble,
    rows: &[R],
    labels: &[usize],
) -> Result<Metrics, EnsembleError> {
    if rows.is_empty() {
        return Err(EnsembleError::EmptyTestSet);
    }
    if rows.len() != labels.len() {
        return Err(EnsembleError::InvalidInput("rows and labels differ in length".into()));
    }
    let probs: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| model.predict_proba(r.as_ref()))
        .collect::<Result<_, _>>()?;
    let mut confusion = [[0usize; N_CLASSES]; N_CLASSES];
    for (p, &y) in probs.iter().zip(labels) {
        confusion[y][super::argmax_high(p)] += 1;
    }
    let n = rows.len();
    let correct: usize = (0..N_CLASSES).map(|k| confusion[k][k]).sum();
    let mut per_class_auc = [None; N_CLASSES];
    let mut precision = [0.0; N_CLASSES];
    let mut recall = [0.0; N_CLASSES];
    for k in 0..N_CLASSES {
        let scores: Vec<f64> = probs.iter().map(|p| p[k]).collect();
        let pos: Vec<bool> = labels.iter().map(|&y| y == k).collect();
        per_class_auc[k] = roc_auc(&scores, &pos);
        let predicted: usize = (0..N_CLASSES).map(|t| confusion[t][k]).sum();
        let actual: usize = confusion[k].iter().sum();
        if predicted > 0 {
            precision[k] = confusion[k][k] as f64 / predicted as f64;
        }
        if actual > 0 {
            recall[k] = confusion[k][k] as f64 / actual as f64;
        }
    }
    let defined: Vec<f64> = per_class_auc.iter().flatten().copied().collect();
    let macro_auc = if defined.is_empty() {
        f64::NAN
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    Ok(Metrics {
        n,
        accuracy: correct as f64 / n as f64,
        macro_auc,
        per_class_auc,
        precision,
        recall,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise_auc(scores: &[f64], pos: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if pos[i] && !pos[j] {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_matches_pairwise_count_with_ties() {
        let s = [0.1, 0.4, 0.35, 0.8, 0.4, 0.4, 0.9, 0.2];
        let p = [false, true, false, true, false, true, true, false];
        let a = roc_auc(&s, &p).unwrap();
        assert!((a - pairwise_auc(&s, &p)).abs() < 1e-12);
    }

    #[test]
    fn auc_extremes() {
        assert_eq!(roc_auc(&[0.1, 0.9], &[false, true]), Some(1.0));
        assert_eq!(roc_auc(&[0.9, 0.1], &[false, true]), Some(0.0));
        assert_eq!(roc_auc(&[0.5, 0.5], &[false, true]), Some(0.5));
        assert_eq!(roc_auc(&[0.5, 0.5], &[true, true]), None);
    }
}
