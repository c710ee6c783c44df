//! The five classifiers: Bernoulli Naive Bayes, logistic regression,
//! random forest, gradient boosted trees and the attention-gated MLP.
//! All expose probability-of-malicious prediction behind one enum.

pub mod logistic;
pub mod mlp;
pub mod nb;
pub mod tree;

use thiserror::Error;

pub use logistic::{train_logistic, LogisticModel};
pub use mlp::{
    attention_gate, build_attention_mlp, mlp_forward, sigmoid, softmax, train_mlp, AdamState,
    AttentionMlp, DenseLayer, ForwardMode,
};
pub use nb::{train_naive_bayes, NaiveBayesModel};
pub use tree::{train_gradient_boosting, train_random_forest, EnsembleKind, TreeEnsemble};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("non-finite activation during forward pass")]
    NonFiniteActivation,
    #[error("training loss diverged to a non-finite value")]
    DivergedLoss,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("dataset contains a single class only")]
    SingleClassDataset,
}

/// A trained classifier of any of the five kinds.
#[derive(Debug, Clone)]
pub enum ClassifierModel {
    NaiveBayes(NaiveBayesModel),
    Logistic(LogisticModel),
    RandomForest(TreeEnsemble),
    GradientBoosting(TreeEnsemble),
    AttentionMlp(AttentionMlp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    NaiveBayes,
    Logistic,
    RandomForest,
    GradientBoosting,
    AttentionMlp,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "Naive Bayes",
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::RandomForest => "Random Forests",
            ModelKind::GradientBoosting => "Gradient Boosting",
            ModelKind::AttentionMlp => "ANN",
        }
    }
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            ClassifierModel::NaiveBayes(_) => ModelKind::NaiveBayes,
            ClassifierModel::Logistic(_) => ModelKind::Logistic,
            ClassifierModel::RandomForest(_) => ModelKind::RandomForest,
            ClassifierModel::GradientBoosting(_) => ModelKind::GradientBoosting,
            ClassifierModel::AttentionMlp(_) => ModelKind::AttentionMlp,
        }
    }

    /// Input width the model was trained on (post-reduction).
    pub fn input_dim(&self) -> usize {
        match self {
            ClassifierModel::NaiveBayes(m) => m.input_dim(),
            ClassifierModel::Logistic(m) => m.weights.len(),
            ClassifierModel::RandomForest(m) | ClassifierModel::GradientBoosting(m) => m.input_dim,
            ClassifierModel::AttentionMlp(m) => m.input_dim(),
        }
    }
}

/// Probability that `x` is malicious, in [0, 1].
pub fn predict(model: &ClassifierModel, x: &[f64]) -> Result<f64, ModelError> {
    if x.len() != model.input_dim() {
        return Err(ModelError::DimensionMismatch {
            expected: model.input_dim(),
            got: x.len(),
        });
    }
    let p = match model {
        ClassifierModel::NaiveBayes(m) => m.posterior_malicious(x),
        ClassifierModel::Logistic(m) => m.probability(x),
        ClassifierModel::RandomForest(m) | ClassifierModel::GradientBoosting(m) => m.probability(x),
        ClassifierModel::AttentionMlp(m) => {
            let (p, _) = mlp_forward(m, x, ForwardMode::Infer, None)?;
            p
        }
    };
    debug_assert!((0.0..=1.0).contains(&p));
    Ok(p.clamp(0.0, 1.0))
}

/// Decision at threshold 0.5; a probability of exactly 0.5 classifies
/// as malicious.
pub fn is_malicious(probability: f64) -> bool {
    probability >= 0.5
}
