//! Dimensionality reduction: PCA over the feature covariance and
//! feature ranking by extremely randomized trees.

pub mod extra_trees;
pub mod pca;

use thiserror::Error;

pub use extra_trees::{extra_trees_importance, select_top_features, ImportanceRanking};
pub use pca::{fit_pca, pca_transform, PcaTransform};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("all rows are identical: no variance to decompose")]
    ZeroVariance,
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("k = {k} out of range (1..={max})")]
    KOutOfRange { k: usize, max: usize },
    #[error("dataset contains a single class only")]
    SingleClassDataset,
}

/// Reduction applied between the raw feature space and a model, stored
/// alongside the model so scan-time inputs go through the identical
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub enum Reducer {
    None,
    Pca(PcaTransform),
    /// Indices into the original vocabulary, ascending.
    Subset(Vec<usize>),
}

impl Reducer {
    /// Project one raw 0/1 feature row into the model's input space.
    pub fn apply(&self, row: &[u8]) -> Result<Vec<f64>, ReduceError> {
        let as_f64: Vec<f64> = row.iter().map(|&v| v as f64).collect();
        match self {
            Reducer::None => Ok(as_f64),
            Reducer::Pca(t) => {
                let reduced = pca_transform(t, &[as_f64])?;
                Ok(reduced.into_iter().next().unwrap())
            }
            Reducer::Subset(indices) => indices
                .iter()
                .map(|&i| {
                    row.get(i)
                        .map(|&v| v as f64)
                        .ok_or(ReduceError::DimensionMismatch {
                            expected: indices.iter().max().map_or(0, |m| m + 1),
                            got: row.len(),
                        })
                })
                .collect(),
        }
    }

    /// Project a whole 0/1 matrix.
    pub fn apply_matrix(&self, rows: &[Vec<u8>]) -> Result<Vec<Vec<f64>>, ReduceError> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}
