//! Bernoulli Naive Bayes with Laplace smoothing. Real-valued inputs
//! (e.g. PCA scores) are binarized at 0.5, matching the binary-feature
//! convention used by the tree models.

use crate::dataset::{Label, LabeledDataset};

use super::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    /// log P(class), ordered [benign, malicious]
    pub class_log_prior: [f64; 2],
    /// log P(feature=1 | class), per class then per feature
    pub feature_log_prob: [Vec<f64>; 2],
    /// log P(feature=0 | class)
    pub feature_log_prob_absent: [Vec<f64>; 2],
    pub alpha: f64,
}

impl NaiveBayesModel {
    pub fn input_dim(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// P(malicious | x) in the log domain, using both presence and
    /// absence terms.
    pub fn posterior_malicious(&self, x: &[f64]) -> f64 {
        let mut log_joint = [self.class_log_prior[0], self.class_log_prior[1]];
        for (j, &v) in x.iter().enumerate() {
            let present = v >= 0.5;
            for (c, lj) in log_joint.iter_mut().enumerate() {
                *lj += if present {
                    self.feature_log_prob[c][j]
                } else {
                    self.feature_log_prob_absent[c][j]
                };
            }
        }
        let max = log_joint[0].max(log_joint[1]);
        let e0 = (log_joint[0] - max).exp();
        let e1 = (log_joint[1] - max).exp();
        e1 / (e0 + e1)
    }
}

/// Fit the model: P(f=1|c) = (count + alpha) / (n_c + 2 alpha).
pub fn train_naive_bayes(ds: &LabeledDataset, alpha: f64) -> Result<NaiveBayesModel, ModelError> {
    assert!(alpha > 0.0, "smoothing must be positive");
    train_on_rows(
        &ds.rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect::<Vec<Vec<f64>>>(),
        &ds.targets(),
        alpha,
    )
}

/// Same fit over already-reduced real-valued rows (binarized at 0.5).
pub fn train_on_rows(
    rows: &[Vec<f64>],
    targets: &[f64],
    alpha: f64,
) -> Result<NaiveBayesModel, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let d = rows[0].len();
    let n_mal = targets.iter().filter(|&&t| t >= 0.5).count();
    let n_ben = rows.len() - n_mal;
    if n_mal == 0 || n_ben == 0 {
        return Err(ModelError::SingleClassDataset);
    }

    let mut counts = [vec![0usize; d], vec![0usize; d]];
    for (row, &t) in rows.iter().zip(targets) {
        let c = usize::from(t >= 0.5);
        for (j, &v) in row.iter().enumerate() {
            if v >= 0.5 {
                counts[c][j] += 1;
            }
        }
    }
    let class_n = [n_ben as f64, n_mal as f64];
    let total = rows.len() as f64;
    let mut feature_log_prob = [vec![0.0; d], vec![0.0; d]];
    let mut feature_log_prob_absent = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        for j in 0..d {
            let p = (counts[c][j] as f64 + alpha) / (class_n[c] + 2.0 * alpha);
            feature_log_prob[c][j] = p.ln();
            feature_log_prob_absent[c][j] = (1.0 - p).ln();
        }
    }
    Ok(NaiveBayesModel {
        class_log_prior: [(class_n[0] / total).ln(), (class_n[1] / total).ln()],
        feature_log_prob,
        feature_log_prob_absent,
        alpha,
    })
}

#[allow(dead_code)]
fn label_of(l: Label) -> usize {
    usize::from(l == Label::Malicious)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_csv, FeatureVocabulary};
    use crate::models::is_malicious;

    #[test]
    fn hand_laplace_arithmetic() {
        // {(1)->mal, (0)->ben}, alpha=1:
        // P(f=1|mal) = (1+1)/(1+2) = 2/3, P(f=1|ben) = (0+1)/(1+2) = 1/3
        let rows = vec![vec![1.0], vec![0.0]];
        let m = train_on_rows(&rows, &[1.0, 0.0], 1.0).unwrap();
        assert!((m.feature_log_prob[1][0].exp() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.feature_log_prob[0][0].exp() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_dataset_neutral_posterior() {
        // likelihoods symmetric across classes; all-zero input on the
        // symmetric feature pair lands exactly on 0.5
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = train_on_rows(&rows, &[1.0, 0.0], 1.0).unwrap();
        let p = m.posterior_malicious(&[0.0, 0.0]);
        assert!((p - 0.5).abs() < 1e-12);
        assert!(is_malicious(p));
    }

    #[test]
    fn matches_brute_force_bayes_enumeration() {
        let csv = "a,b,c,class\n1,0,1,1\n1,1,0,1\n0,0,1,1\n0,1,0,0\n0,0,0,0\n1,1,1,0\n";
        let ds = parse_csv(csv).unwrap();
        let alpha = 1.0;
        let m = train_naive_bayes(&ds, alpha).unwrap();

        // independent oracle: direct Bayes arithmetic in probability
        // space over every input in {0,1}^3
        let d = 3;
        let n = ds.len() as f64;
        let targets = ds.targets();
        let n_mal: f64 = targets.iter().sum();
        let n_ben = n - n_mal;
        let prior = [n_ben / n, n_mal / n];
        for input in 0..(1u32 << d) {
            let x: Vec<f64> = (0..d).map(|j| f64::from(input >> j & 1)).collect();
            let mut joint = [prior[0], prior[1]];
            for (c, jc) in joint.iter_mut().enumerate() {
                for j in 0..d {
                    let count = ds
                        .rows
                        .iter()
                        .zip(&targets)
                        .filter(|(r, &t)| usize::from(t >= 0.5) == c && r[j] == 1)
                        .count() as f64;
                    let class_n = if c == 1 { n_mal } else { n_ben };
                    let p1 = (count + alpha) / (class_n + 2.0 * alpha);
                    *jc *= if x[j] >= 0.5 { p1 } else { 1.0 - p1 };
                }
            }
            let oracle = joint[1] / (joint[0] + joint[1]);
            let got = m.posterior_malicious(&x);
            assert!(
                (got - oracle).abs() <= 1e-12,
                "input {input:03b}: {got} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn priors_sum_to_one() {
        let rows = vec![vec![1.0], vec![0.0], vec![1.0]];
        let m = train_on_rows(&rows, &[1.0, 0.0, 1.0], 0.5).unwrap();
        let sum = m.class_log_prior[0].exp() + m.class_log_prior[1].exp();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        let rows = vec![vec![1.0], vec![0.0]];
        assert!(matches!(
            train_on_rows(&rows, &[1.0, 1.0], 1.0),
            Err(ModelError::SingleClassDataset)
        ));
    }

    #[test]
    fn empty_vocab_dataset_still_uses_priors() {
        let ds = crate::dataset::LabeledDataset {
            rows: vec![vec![], vec![], vec![]],
            labels: vec![
                crate::dataset::Label::Malicious,
                crate::dataset::Label::Malicious,
                crate::dataset::Label::Benign,
            ],
            vocab: FeatureVocabulary::from_names(vec![]),
        };
        let m = train_naive_bayes(&ds, 1.0).unwrap();
        assert!((m.posterior_malicious(&[]) - 2.0 / 3.0).abs() < 1e-12);
    }
}
