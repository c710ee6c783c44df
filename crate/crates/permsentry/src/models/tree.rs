//! Decision-tree ensembles: bootstrap random forests with Gini splits
//! and logistic-loss gradient boosting with Newton leaf values.

use crate::rng::Xoshiro256;

use super::{mlp::sigmoid, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        /// Forest: malicious fraction in the leaf. Boosting: additive
        /// log-odds contribution.
        value: f64,
    },
    Split {
        feature: usize,
        /// go left when x[feature] < threshold
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    RandomForest,
    GradientBoosting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    pub kind: EnsembleKind,
    pub trees: Vec<DecisionTree>,
    pub learning_rate: f64,
    /// log-odds of the class prior (boosting only; 0 for forests)
    pub base_score: f64,
    pub input_dim: usize,
}

impl TreeEnsemble {
    pub fn probability(&self, x: &[f64]) -> f64 {
        match self.kind {
            EnsembleKind::RandomForest => {
                let votes = self.trees.iter().filter(|t| t.evaluate(x) >= 0.5).count();
                votes as f64 / self.trees.len() as f64
            }
            EnsembleKind::GradientBoosting => {
                let sum: f64 = self.trees.iter().map(|t| t.evaluate(x)).sum();
                sigmoid(self.base_score + self.learning_rate * sum)
            }
        }
    }
}

/// Candidate split thresholds for one feature within a node: midpoints
/// of adjacent distinct values. Binary 0/1 data yields the single
/// threshold 0.5.
fn thresholds(rows: &[Vec<f64>], samples: &[usize], feature: usize) -> Vec<f64> {
    let mut values: Vec<f64> = samples.iter().map(|&i| rows[i][feature]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

/// Best Gini split over the candidate features; ties go to the lowest
/// feature index (candidates are scanned in ascending order).
fn best_gini_split(
    rows: &[Vec<f64>],
    targets: &[f64],
    samples: &[usize],
    candidates: &[usize],
) -> Option<Split> {
    let n = samples.len() as f64;
    let pos: f64 = samples.iter().map(|&i| targets[i]).sum();
    let parent = gini(pos, n);
    let mut best: Option<Split> = None;
    for &feature in candidates {
        for threshold in thresholds(rows, samples, feature) {
            let mut n_left = 0.0;
            let mut pos_left = 0.0;
            for &i in samples {
                if rows[i][feature] < threshold {
                    n_left += 1.0;
                    pos_left += targets[i];
                }
            }
            let n_right = n - n_left;
            if n_left == 0.0 || n_right == 0.0 {
                continue;
            }
            let gain = parent
                - (n_left / n) * gini(pos_left, n_left)
                - ((n - n_left) / n) * gini(pos - pos_left, n_right);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn grow_gini_tree(
    tree: &mut DecisionTree,
    rows: &[Vec<f64>],
    targets: &[f64],
    samples: Vec<usize>,
    n_candidates: usize,
    rng: &mut Xoshiro256,
) -> usize {
    let n = samples.len() as f64;
    let pos: f64 = samples.iter().map(|&i| targets[i]).sum();
    let node = tree.nodes.len();
    if samples.len() < 2 || pos == 0.0 || pos == n {
        tree.nodes.push(TreeNode::Leaf { value: pos / n });
        return node;
    }
    let d = rows[0].len();
    let mut candidates = rng.sample_indices(d, n_candidates.min(d));
    candidates.sort_unstable();
    let Some(split) = best_gini_split(rows, targets, &samples, &candidates) else {
        tree.nodes.push(TreeNode::Leaf { value: pos / n });
        return node;
    };
    tree.nodes.push(TreeNode::Leaf { value: 0.0 }); // placeholder
    let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
        .into_iter()
        .partition(|&i| rows[i][split.feature] < split.threshold);
    let left = grow_gini_tree(tree, rows, targets, left_samples, n_candidates, rng);
    let right = grow_gini_tree(tree, rows, targets, right_samples, n_candidates, rng);
    tree.nodes[node] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    node
}

/// Bootstrap-sampled Gini forest; each tree draws from an independent
/// substream of the seed so results are schedule-independent.
pub fn train_random_forest(
    rows: &[Vec<f64>],
    targets: &[f64],
    n_trees: usize,
    seed: u64,
) -> Result<TreeEnsemble, ModelError> {
    assert!(n_trees >= 1);
    if rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let n_mal = targets.iter().filter(|&&t| t >= 0.5).count();
    if n_mal == 0 || n_mal == rows.len() {
        return Err(ModelError::SingleClassDataset);
    }
    let n = rows.len();
    let d = rows[0].len();
    let n_candidates = ((d as f64).sqrt().floor() as usize).max(1);

    let mut trees = Vec::with_capacity(n_trees);
    for tree_index in 0..n_trees {
        let mut rng = Xoshiro256::substream(seed, tree_index as u64);
        let bootstrap: Vec<usize> = (0..n)
            .map(|_| rng.next_bounded(n as u64) as usize)
            .collect();
        let mut tree = DecisionTree::default();
        grow_gini_tree(&mut tree, rows, targets, bootstrap, n_candidates, &mut rng);
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        kind: EnsembleKind::RandomForest,
        trees,
        learning_rate: 1.0,
        base_score: 0.0,
        input_dim: d,
    })
}

/// Best squared-error split for a regression tree on residuals.
fn best_sse_split(rows: &[Vec<f64>], residuals: &[f64], samples: &[usize]) -> Option<Split> {
    let n = samples.len() as f64;
    let sum: f64 = samples.iter().map(|&i| residuals[i]).sum();
    let d = rows[0].len();
    let mut best: Option<Split> = None;
    for feature in 0..d {
        for threshold in thresholds(rows, samples, feature) {
            let mut n_left = 0.0;
            let mut sum_left = 0.0;
            for &i in samples {
                if rows[i][feature] < threshold {
                    n_left += 1.0;
                    sum_left += residuals[i];
                }
            }
            let n_right = n - n_left;
            if n_left == 0.0 || n_right == 0.0 {
                continue;
            }
            let sum_right = sum - sum_left;
            // variance-reduction gain, up to a constant
            let gain =
                sum_left * sum_left / n_left + sum_right * sum_right / n_right - sum * sum / n;
            if best.as_ref().is_none_or(|b| gain > b.gain + 1e-15) {
                best = Some(Split {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn grow_boosting_tree(
    tree: &mut DecisionTree,
    rows: &[Vec<f64>],
    residuals: &[f64],
    hessians: &[f64],
    samples: Vec<usize>,
    depth: usize,
    max_depth: usize,
) -> usize {
    let node = tree.nodes.len();
    let leaf = |samples: &[usize]| {
        // Newton step: sum(y - p) / sum(p (1 - p))
        let num: f64 = samples.iter().map(|&i| residuals[i]).sum();
        let den: f64 = samples.iter().map(|&i| hessians[i]).sum();
        if den > 1e-12 {
            num / den
        } else {
            0.0
        }
    };
    if depth >= max_depth || samples.len() < 2 {
        tree.nodes.push(TreeNode::Leaf {
            value: leaf(&samples),
        });
        return node;
    }
    let Some(split) = best_sse_split(rows, residuals, &samples) else {
        tree.nodes.push(TreeNode::Leaf {
            value: leaf(&samples),
        });
        return node;
    };
    tree.nodes.push(TreeNode::Leaf { value: 0.0 });
    let (left_samples, right_samples): (Vec<usize>, Vec<usize>) = samples
        .into_iter()
        .partition(|&i| rows[i][split.feature] < split.threshold);
    let left = grow_boosting_tree(
        tree,
        rows,
        residuals,
        hessians,
        left_samples,
        depth + 1,
        max_depth,
    );
    let right = grow_boosting_tree(
        tree,
        rows,
        residuals,
        hessians,
        right_samples,
        depth + 1,
        max_depth,
    );
    tree.nodes[node] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    node
}

/// Logistic-loss boosting from the prior log-odds. Fully deterministic:
/// split search is exhaustive, so the seed only exists for signature
/// parity with the other ensembles.
pub fn train_gradient_boosting(
    rows: &[Vec<f64>],
    targets: &[f64],
    n_rounds: usize,
    learning_rate: f64,
    max_depth: usize,
    _seed: u64,
) -> Result<(TreeEnsemble, Vec<f64>), ModelError> {
    assert!(n_rounds >= 1);
    assert!(learning_rate > 0.0 && learning_rate <= 1.0);
    if rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let n = rows.len();
    let n_mal = targets.iter().filter(|&&t| t >= 0.5).count();
    if n_mal == 0 || n_mal == n {
        return Err(ModelError::SingleClassDataset);
    }
    let prior = n_mal as f64 / n as f64;
    let base_score = (prior / (1.0 - prior)).ln();

    let mut scores = vec![base_score; n];
    let mut trees = Vec::with_capacity(n_rounds);
    let mut round_losses = Vec::with_capacity(n_rounds);
    for _ in 0..n_rounds {
        let probs: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
        let residuals: Vec<f64> = targets.iter().zip(&probs).map(|(y, p)| y - p).collect();
        let hessians: Vec<f64> = probs.iter().map(|p| p * (1.0 - p)).collect();
        let mut tree = DecisionTree::default();
        grow_boosting_tree(
            &mut tree,
            rows,
            &residuals,
            &hessians,
            (0..n).collect(),
            0,
            max_depth,
        );
        for (score, row) in scores.iter_mut().zip(rows) {
            *score += learning_rate * tree.evaluate(row);
        }
        trees.push(tree);

        let loss: f64 = scores
            .iter()
            .zip(targets)
            .map(|(&s, &y)| {
                let p = sigmoid(s).clamp(1e-12, 1.0 - 1e-12);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / n as f64;
        if !loss.is_finite() {
            return Err(ModelError::DivergedLoss);
        }
        round_losses.push(loss);
    }
    Ok((
        TreeEnsemble {
            kind: EnsembleKind::GradientBoosting,
            trees,
            learning_rate,
            base_score,
            input_dim: rows[0].len(),
        },
        round_losses,
    ))
}
