//! Extremely randomized trees used as a feature ranker: each tree's
//! splits are drawn from a small random candidate set, and a feature's
//! importance is its accumulated sample-weighted Gini decrease.

use crate::dataset::{DatasetError, LabeledDataset};
use crate::rng::splitmix64;

use super::ReduceError;

#[derive(Debug, Clone)]
pub struct ImportanceRanking {
    /// Per-feature scores, non-negative, normalized to sum 1.
    pub scores: Vec<f64>,
    /// Feature indices sorted by descending score.
    pub order: Vec<usize>,
}

/// FNV-1a over the feature name. Candidate sampling keys off feature
/// identity rather than column position, so permuting columns permutes
/// the trees (and the scores) instead of changing them.
fn feature_key(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<u8>],
    targets: &'a [f64],
    feature_keys: &'a [u64],
    tree_seed: u64,
    n_candidates: usize,
    node_counter: u64,
    /// accumulated sample-weighted Gini decrease per feature
    importance: Vec<f64>,
    n_total: f64,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

impl TreeBuilder<'_> {
    fn grow(&mut self, samples: Vec<usize>) {
        let node_id = self.node_counter;
        self.node_counter += 1;

        let n = samples.len() as f64;
        let pos: f64 = samples.iter().map(|&i| self.targets[i]).sum();
        let node_gini = gini(pos, n);
        if samples.len() < 2 || node_gini == 0.0 {
            return;
        }

        // candidate set: the sqrt(d) features with the smallest
        // per-node key derived from (tree seed, node id, feature id)
        let d = self.feature_keys.len();
        let mut keyed: Vec<(u64, usize)> = (0..d)
            .map(|f| {
                let mut s = self
                    .tree_seed
                    .wrapping_add(node_id.wrapping_mul(0x9e37_79b9_7f4a_7c15))
                    ^ self.feature_keys[f];
                (splitmix64(&mut s), f)
            })
            .collect();
        keyed.sort_unstable();
        keyed.truncate(self.n_candidates);
        // candidates stay in key order; ties in Gini decrease break on
        // the smaller key, which is stable under column permutation
        let mut best: Option<(f64, usize)> = None;
        for &(_, feature) in &keyed {
            let mut n_left = 0.0;
            let mut pos_left = 0.0;
            for &i in &samples {
                if self.rows[i][feature] == 0 {
                    n_left += 1.0;
                    pos_left += self.targets[i];
                }
            }
            let n_right = n - n_left;
            if n_left == 0.0 || n_right == 0.0 {
                continue;
            }
            let pos_right = pos - pos_left;
            let decrease = node_gini
                - (n_left / n) * gini(pos_left, n_left)
                - (n_right / n) * gini(pos_right, n_right);
            if best.is_none() || decrease > best.unwrap().0 {
                best = Some((decrease, feature));
            }
        }
        let Some((decrease, feature)) = best else {
            return; // all candidates constant within this node
        };
        debug_assert!(decrease >= -1e-12);
        self.importance[feature] += (n / self.n_total) * decrease.max(0.0);

        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&i| self.rows[i][feature] == 0);
        self.grow(left);
        self.grow(right);
    }
}

/// Rank features by average sample-weighted Gini decrease over
/// `n_trees` fully randomized trees.
pub fn extra_trees_importance(
    ds: &LabeledDataset,
    n_trees: usize,
    seed: u64,
) -> Result<ImportanceRanking, ReduceError> {
    assert!(n_trees >= 1, "need at least one tree");
    let (benign, malicious) = ds.class_counts();
    if benign == 0 || malicious == 0 {
        return Err(ReduceError::SingleClassDataset);
    }
    let d = ds.n_features();
    let targets = ds.targets();
    let feature_keys: Vec<u64> = ds.vocab.names.iter().map(|n| feature_key(n)).collect();
    let n_candidates = ((d as f64).sqrt().floor() as usize).max(1);

    let mut scores = vec![0.0; d];
    for tree_index in 0..n_trees {
        let mut tree_seed_state = seed ^ (tree_index as u64).wrapping_mul(0xa076_1d64_78bd_642f);
        let tree_seed = splitmix64(&mut tree_seed_state);
        let mut builder = TreeBuilder {
            rows: &ds.rows,
            targets: &targets,
            feature_keys: &feature_keys,
            tree_seed,
            n_candidates,
            node_counter: 0,
            importance: vec![0.0; d],
            n_total: ds.len() as f64,
        };
        builder.grow((0..ds.len()).collect());
        for (s, imp) in scores.iter_mut().zip(&builder.importance) {
            *s += imp / n_trees as f64;
        }
    }

    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        for s in &mut scores {
            *s /= total;
        }
    } else {
        // no split anywhere (constant features): uniform scores
        for s in &mut scores {
            *s = 1.0 / d as f64;
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(ImportanceRanking { scores, order })
}

/// Restrict a dataset to the top-k ranked features, keeping original
/// column order.
pub fn select_top_features(
    ds: &LabeledDataset,
    ranking: &ImportanceRanking,
    k: usize,
) -> Result<(LabeledDataset, Vec<usize>), ReduceError> {
    let d = ds.n_features();
    if k == 0 || k > d {
        return Err(ReduceError::KOutOfRange { k, max: d });
    }
    let mut keep: Vec<usize> = ranking.order[..k].to_vec();
    keep.sort_unstable();
    let reduced = LabeledDataset {
        rows: ds
            .rows
            .iter()
            .map(|r| keep.iter().map(|&i| r[i]).collect())
            .collect(),
        labels: ds.labels.clone(),
        vocab: crate::dataset::FeatureVocabulary {
            names: keep.iter().map(|&i| ds.vocab.names[i].clone()).collect(),
            categories: keep.iter().map(|&i| ds.vocab.categories[i]).collect(),
        },
    };
    Ok((reduced, keep))
}

impl From<DatasetError> for ReduceError {
    fn from(_: DatasetError) -> Self {
        ReduceError::SingleClassDataset
    }
}
