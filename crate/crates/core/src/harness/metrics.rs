use std::collections::HashSet;

use crate::logic::Fact;
use crate::ngp::ScoredFact;

/// Per-predicate recall and its unweighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct RecallReport {
    pub mean: f64,
    /// `None` for predicates without ground truth in the split.
    pub per_predicate: Vec<Option<f64>>,
    /// Predicates left out of the mean because they never occur.
    pub skipped: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroShotReport {
    pub value: f64,
    pub hits: usize,
    pub pool_size: usize,
    /// Set when no ground-truth fact is unseen in training; `value` is 0.
    pub empty_pool: bool,
}

fn top_k(predictions: &[ScoredFact], k: usize) -> HashSet<(usize, Fact)> {
    let mut ranked = predictions.to_vec();
    ranked.sort_by(ScoredFact::rank_cmp);
    ranked.into_iter().take(k).map(|sf| (sf.slot, sf.fact)).collect()
}

/// Mean over predicate classes of the fraction of ground-truth `(slot,
/// fact)` pairs ranked within each sample's top `k`. Predicates without
/// ground truth are skipped.
pub fn mean_recall_at_k(
    predictions: &[Vec<ScoredFact>],
    ground_truth: &[Vec<(usize, Fact)>],
    n_predicates: usize,
    k: usize,
) -> RecallReport {
    let mut hits = vec![0usize; n_predicates];
    let mut totals = vec![0usize; n_predicates];
    for (pred, truth) in predictions.iter().zip(ground_truth) {
        let top = top_k(pred, k);
        for gt in truth {
            let p = gt.1.p as usize;
            if p >= n_predicates {
                continue;
            }
            totals[p] += 1;
            if top.contains(gt) {
                hits[p] += 1;
            }
        }
    }
    let per_predicate: Vec<Option<f64>> = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| (t > 0).then(|| h as f64 / t as f64))
        .collect();
    let present: Vec<f64> = per_predicate.iter().flatten().copied().collect();
    let mean = if present.is_empty() {
        0.0
    } else {
        present.iter().sum::<f64>() / present.len() as f64
    };
    RecallReport {
        mean,
        skipped: (0..n_predicates as u32).filter(|&p| totals[p as usize] == 0).collect(),
        per_predicate,
    }
}

/// Recall within the top `k` restricted to ground-truth facts absent from
/// `train_facts`.
pub fn zero_shot_recall_at_k(
    predictions: &[Vec<ScoredFact>],
    ground_truth: &[Vec<(usize, Fact)>],
    train_facts: &HashSet<Fact>,
    k: usize,
) -> ZeroShotReport {
    let mut hits = 0;
    let mut pool = 0;
    for (pred, truth) in predictions.iter().zip(ground_truth) {
        let top = top_k(pred, k);
        for gt in truth.iter().filter(|(_, f)| !train_facts.contains(f)) {
            pool += 1;
            if top.contains(gt) {
                hits += 1;
            }
        }
    }
    ZeroShotReport {
        value: if pool == 0 { 0.0 } else { hits as f64 / pool as f64 },
        hits,
        pool_size: pool,
        empty_pool: pool == 0,
    }
}
