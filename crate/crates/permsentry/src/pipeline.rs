//! End-to-end training and scanning flows shared by the CLI and the
//! integration tests: load, balance, split, reduce, train, evaluate,
//! persist.

use std::path::Path;

use thiserror::Error;

use crate::apk::{self, ApkError};
use crate::dataset::{self, DatasetError, LabeledDataset};
use crate::eval::{self, EvalError, EvalReport, TrainingCurve};
use crate::models::{
    self, build_attention_mlp, is_malicious, predict, train_mlp, AdamState, ClassifierModel,
    ModelError, ModelKind,
};
use crate::persist::{ModelArchive, PersistError};
use crate::reduce::{self, ReduceError, Reducer};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error(transparent)]
    Apk(#[from] ApkError),
}

/// Which reduction to fit before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducerKind {
    /// The per-model default routing: PCA for Naive Bayes, logistic
    /// regression and gradient boosting; extra-trees selection for the
    /// forest and the network.
    Default,
    None,
    Pca,
    ExtraTrees,
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub kind: ModelKind,
    pub reducer: ReducerKind,
    pub seed: u64,
    pub train_fraction: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// cumulative explained-variance target for PCA
    pub pca_variance_target: f64,
    /// features kept by extra-trees selection
    pub top_k: usize,
    pub n_trees: usize,
    pub boosting_rounds: usize,
    pub boosting_learning_rate: f64,
    pub boosting_max_depth: usize,
    pub nb_alpha: f64,
    pub logistic_learning_rate: f64,
    pub logistic_l2: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            kind: ModelKind::AttentionMlp,
            reducer: ReducerKind::Default,
            seed: 42,
            train_fraction: 0.75,
            epochs: 200,
            batch_size: 32,
            pca_variance_target: 0.90,
            top_k: 40,
            n_trees: 100,
            boosting_rounds: 100,
            boosting_learning_rate: 0.1,
            boosting_max_depth: 3,
            nb_alpha: 1.0,
            logistic_learning_rate: 0.5,
            logistic_l2: 1e-4,
        }
    }
}

pub struct TrainOutcome {
    pub archive: ModelArchive,
    pub report: EvalReport,
    pub curve: TrainingCurve,
}

fn default_reducer_for(kind: ModelKind) -> ReducerKind {
    match kind {
        ModelKind::NaiveBayes | ModelKind::Logistic | ModelKind::GradientBoosting => {
            ReducerKind::Pca
        }
        ModelKind::RandomForest | ModelKind::AttentionMlp => ReducerKind::ExtraTrees,
    }
}

/// Fit the requested reducer on the training split only.
fn fit_reducer(train: &LabeledDataset, opts: &TrainOptions) -> Result<Reducer, PipelineError> {
    let kind = match opts.reducer {
        ReducerKind::Default => default_reducer_for(opts.kind),
        other => other,
    };
    Ok(match kind {
        ReducerKind::None | ReducerKind::Default => Reducer::None,
        ReducerKind::Pca => {
            let rows: Vec<Vec<f64>> = train
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect();
            Reducer::Pca(reduce::fit_pca(&rows, opts.pca_variance_target)?)
        }
        ReducerKind::ExtraTrees => {
            let ranking = reduce::extra_trees_importance(train, opts.n_trees, opts.seed)?;
            let k = opts.top_k.min(train.n_features());
            let (_, keep) = reduce::select_top_features(train, &ranking, k)?;
            Reducer::Subset(keep)
        }
    })
}

fn train_model(
    kind: ModelKind,
    train_rows: &[Vec<f64>],
    train_targets: &[f64],
    test_rows: &[Vec<f64>],
    test_targets: &[f64],
    opts: &TrainOptions,
) -> Result<(ClassifierModel, TrainingCurve), PipelineError> {
    Ok(match kind {
        ModelKind::NaiveBayes => (
            ClassifierModel::NaiveBayes(models::nb::train_on_rows(
                train_rows,
                train_targets,
                opts.nb_alpha,
            )?),
            TrainingCurve::default(),
        ),
        ModelKind::Logistic => (
            ClassifierModel::Logistic(models::train_logistic(
                train_rows,
                train_targets,
                opts.epochs.max(1),
                opts.logistic_learning_rate,
                opts.logistic_l2,
            )?),
            TrainingCurve::default(),
        ),
        ModelKind::RandomForest => (
            ClassifierModel::RandomForest(models::train_random_forest(
                train_rows,
                train_targets,
                opts.n_trees,
                opts.seed,
            )?),
            TrainingCurve::default(),
        ),
        ModelKind::GradientBoosting => {
            let (model, _) = models::train_gradient_boosting(
                train_rows,
                train_targets,
                opts.boosting_rounds,
                opts.boosting_learning_rate,
                opts.boosting_max_depth,
                opts.seed,
            )?;
            (
                ClassifierModel::GradientBoosting(model),
                TrainingCurve::default(),
            )
        }
        ModelKind::AttentionMlp => {
            let model = build_attention_mlp(train_rows[0].len(), opts.seed);
            let (trained, curve) = train_mlp(
                model,
                train_rows,
                train_targets,
                test_rows,
                test_targets,
                opts.epochs,
                opts.batch_size,
                AdamState::default(),
            )?;
            (ClassifierModel::AttentionMlp(trained), curve)
        }
    })
}

/// The full training flow on an in-memory dataset: balance, split
/// 75:25, fit the reducer on the training side, train, evaluate.
pub fn run_train(ds: &LabeledDataset, opts: &TrainOptions) -> Result<TrainOutcome, PipelineError> {
    let balanced = dataset::balance_classes(ds, opts.seed)?;
    let split = dataset::train_test_split(&balanced, opts.train_fraction, opts.seed)?;

    let reducer = fit_reducer(&split.train, opts)?;
    let train_rows = reducer.apply_matrix(&split.train.rows)?;
    let test_rows = reducer.apply_matrix(&split.test.rows)?;
    let train_targets = split.train.targets();
    let test_targets = split.test.targets();

    let (model, curve) = train_model(
        opts.kind,
        &train_rows,
        &train_targets,
        &test_rows,
        &test_targets,
        opts,
    )?;

    let archive = ModelArchive {
        vocabulary: ds.vocab.clone(),
        reducer,
        model,
    };
    let report = eval::evaluate(&archive.model, &archive.reducer, &split.test)?;
    Ok(TrainOutcome {
        archive,
        report,
        curve,
    })
}

/// Train all five models on the identical balanced split and rank them.
pub fn run_compare(
    ds: &LabeledDataset,
    opts: &TrainOptions,
) -> Result<Vec<EvalReport>, PipelineError> {
    let kinds = [
        ModelKind::NaiveBayes,
        ModelKind::Logistic,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
        ModelKind::AttentionMlp,
    ];
    let mut reports = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let mut model_opts = opts.clone();
        model_opts.kind = kind;
        let outcome = run_train(ds, &model_opts)?;
        reports.push(outcome.report);
    }
    Ok(eval::compare_models(&reports))
}

pub struct ScanVerdict {
    pub probability: f64,
    pub malicious: bool,
}

/// Extract the APK's features against the archive vocabulary, apply
/// the stored reducer and predict.
pub fn run_scan(archive: &ModelArchive, apk_path: &Path) -> Result<ScanVerdict, PipelineError> {
    let raw = apk::extract_features(apk_path, &archive.vocabulary)?;
    let x = archive.reducer.apply(&raw)?;
    let probability = predict(&archive.model, &x)?;
    Ok(ScanVerdict {
        probability,
        malicious: is_malicious(probability),
    })
}
