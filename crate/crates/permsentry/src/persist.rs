//! Single-file model archive (`.psm`): vocabulary, reducer and trained
//! model in one little-endian binary blob, integrity-checked by a
//! trailing CRC-32. The reducer travels with the model so scan-time
//! feature spaces can never drift from training.

use std::path::Path;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::dataset::{FeatureCategory, FeatureVocabulary};
use crate::models::tree::{DecisionTree, TreeNode};
use crate::models::{
    mlp::Activation, AttentionMlp, ClassifierModel, DenseLayer, EnsembleKind, LogisticModel,
    NaiveBayesModel, TreeEnsemble,
};
use crate::reduce::{PcaTransform, Reducer};

pub const MAGIC: &[u8; 8] = b"PERMSNTR";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("bad magic: not a model archive")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    UnsupportedVersion(u16),
    #[error("checksum mismatch: archive is corrupt")]
    ChecksumMismatch,
    #[error("archive truncated at byte {0}")]
    TruncatedArchive(usize),
    #[error("I/O failure: {0}")]
    IoFailure(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ModelArchive {
    pub vocabulary: FeatureVocabulary,
    pub reducer: Reducer,
    pub model: ClassifierModel,
}

// ---- writer ----

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn f64_vec(&mut self, v: &[f64]) {
        self.u32(v.len() as u32);
        for x in v {
            self.f64(*x);
        }
    }
    fn matrix(&mut self, m: &Array2<f64>) {
        self.u32(m.nrows() as u32);
        self.u32(m.ncols() as u32);
        for x in m.iter() {
            self.f64(*x);
        }
    }
}

fn encode(archive: &ModelArchive) -> Vec<u8> {
    let mut w = Writer { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u16(FORMAT_VERSION);

    w.u32(archive.vocabulary.len() as u32);
    for (name, category) in archive
        .vocabulary
        .names
        .iter()
        .zip(&archive.vocabulary.categories)
    {
        w.string(name);
        w.u8(match category {
            FeatureCategory::Permission => 0,
            FeatureCategory::ApiCall => 1,
            FeatureCategory::Command => 2,
        });
    }

    match &archive.reducer {
        Reducer::None => w.u8(0),
        Reducer::Pca(t) => {
            w.u8(1);
            w.f64_vec(&t.mean);
            w.matrix(&t.components);
            w.f64_vec(&t.explained_variance_ratio);
        }
        Reducer::Subset(indices) => {
            w.u8(2);
            w.u32(indices.len() as u32);
            for i in indices {
                w.u32(*i as u32);
            }
        }
    }

    match &archive.model {
        ClassifierModel::NaiveBayes(m) => {
            w.u8(0);
            w.f64(m.class_log_prior[0]);
            w.f64(m.class_log_prior[1]);
            w.f64(m.alpha);
            for c in 0..2 {
                w.f64_vec(&m.feature_log_prob[c]);
                w.f64_vec(&m.feature_log_prob_absent[c]);
            }
        }
        ClassifierModel::Logistic(m) => {
            w.u8(1);
            w.f64_vec(&m.weights);
            w.f64(m.bias);
            w.f64(m.l2_lambda);
        }
        ClassifierModel::RandomForest(e) | ClassifierModel::GradientBoosting(e) => {
            w.u8(match e.kind {
                EnsembleKind::RandomForest => 2,
                EnsembleKind::GradientBoosting => 3,
            });
            w.f64(e.learning_rate);
            w.f64(e.base_score);
            w.u32(e.input_dim as u32);
            w.u32(e.trees.len() as u32);
            for tree in &e.trees {
                w.u32(tree.nodes.len() as u32);
                for node in &tree.nodes {
                    match node {
                        TreeNode::Leaf { value } => {
                            w.u8(0);
                            w.f64(*value);
                        }
                        TreeNode::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => {
                            w.u8(1);
                            w.u32(*feature as u32);
                            w.f64(*threshold);
                            w.u32(*left as u32);
                            w.u32(*right as u32);
                        }
                    }
                }
            }
        }
        ClassifierModel::AttentionMlp(m) => {
            w.u8(4);
            w.u32(m.layers.len() as u32);
            let layer = |w: &mut Writer, l: &DenseLayer| {
                w.u8(match l.activation {
                    Activation::Relu => 0,
                    Activation::Sigmoid => 1,
                    Activation::Linear => 2,
                });
                w.matrix(&l.weights);
                w.f64_vec(l.bias.as_slice().unwrap());
            };
            for l in &m.layers {
                layer(&mut w, l);
            }
            layer(&mut w, &m.attention);
            w.f64(m.dropout_rate);
            w.u32(m.dropout_positions.len() as u32);
            for p in &m.dropout_positions {
                w.u32(*p as u32);
            }
            w.u64(m.rng_seed);
        }
    }

    let checksum = crc32fast::hash(&w.buf);
    w.u32(checksum);
    w.buf
}

// ---- reader ----

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], PersistError> {
        let slice = self
            .buf
            .get(self.at..self.at + n)
            .ok_or(PersistError::TruncatedArchive(self.at))?;
        self.at += n;
        Ok(slice)
    }
    fn u8(&mut self) -> Result<u8, PersistError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, PersistError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, PersistError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, PersistError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn string(&mut self) -> Result<String, PersistError> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| PersistError::TruncatedArchive(self.at))
    }
    fn f64_vec(&mut self) -> Result<Vec<f64>, PersistError> {
        let len = self.u32()? as usize;
        (0..len).map(|_| self.f64()).collect()
    }
    fn matrix(&mut self) -> Result<Array2<f64>, PersistError> {
        let rows = self.u32()? as usize;
        let cols = self.u32()? as usize;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.f64()?);
        }
        Array2::from_shape_vec((rows, cols), data)
            .map_err(|_| PersistError::TruncatedArchive(self.at))
    }
}

fn decode(bytes: &[u8]) -> Result<ModelArchive, PersistError> {
    let mut r = Reader {
        buf: bytes,
        at: 8 + 2,
    };

    let count = r.u32()? as usize;
    let mut names = Vec::with_capacity(count);
    let mut categories = Vec::with_capacity(count);
    for _ in 0..count {
        names.push(r.string()?);
        categories.push(match r.u8()? {
            0 => FeatureCategory::Permission,
            1 => FeatureCategory::ApiCall,
            _ => FeatureCategory::Command,
        });
    }
    let vocabulary = FeatureVocabulary { names, categories };

    let reducer = match r.u8()? {
        0 => Reducer::None,
        1 => Reducer::Pca(PcaTransform {
            mean: r.f64_vec()?,
            components: r.matrix()?,
            explained_variance_ratio: r.f64_vec()?,
        }),
        _ => {
            let n = r.u32()? as usize;
            let mut indices = Vec::with_capacity(n);
            for _ in 0..n {
                indices.push(r.u32()? as usize);
            }
            Reducer::Subset(indices)
        }
    };

    let model = match r.u8()? {
        0 => {
            let prior0 = r.f64()?;
            let prior1 = r.f64()?;
            let alpha = r.f64()?;
            let mut feature_log_prob: [Vec<f64>; 2] = [vec![], vec![]];
            let mut feature_log_prob_absent: [Vec<f64>; 2] = [vec![], vec![]];
            for c in 0..2 {
                feature_log_prob[c] = r.f64_vec()?;
                feature_log_prob_absent[c] = r.f64_vec()?;
            }
            ClassifierModel::NaiveBayes(NaiveBayesModel {
                class_log_prior: [prior0, prior1],
                feature_log_prob,
                feature_log_prob_absent,
                alpha,
            })
        }
        1 => ClassifierModel::Logistic(LogisticModel {
            weights: r.f64_vec()?,
            bias: r.f64()?,
            l2_lambda: r.f64()?,
        }),
        tag @ (2 | 3) => {
            let learning_rate = r.f64()?;
            let base_score = r.f64()?;
            let input_dim = r.u32()? as usize;
            let n_trees = r.u32()? as usize;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                let n_nodes = r.u32()? as usize;
                let mut nodes = Vec::with_capacity(n_nodes);
                for _ in 0..n_nodes {
                    nodes.push(match r.u8()? {
                        0 => TreeNode::Leaf { value: r.f64()? },
                        _ => TreeNode::Split {
                            feature: r.u32()? as usize,
                            threshold: r.f64()?,
                            left: r.u32()? as usize,
                            right: r.u32()? as usize,
                        },
                    });
                }
                trees.push(DecisionTree { nodes });
            }
            let ensemble = TreeEnsemble {
                kind: if tag == 2 {
                    EnsembleKind::RandomForest
                } else {
                    EnsembleKind::GradientBoosting
                },
                trees,
                learning_rate,
                base_score,
                input_dim,
            };
            if tag == 2 {
                ClassifierModel::RandomForest(ensemble)
            } else {
                ClassifierModel::GradientBoosting(ensemble)
            }
        }
        _ => {
            let n_layers = r.u32()? as usize;
            let read_layer = |r: &mut Reader| -> Result<DenseLayer, PersistError> {
                let activation = match r.u8()? {
                    0 => Activation::Relu,
                    1 => Activation::Sigmoid,
                    _ => Activation::Linear,
                };
                let weights = r.matrix()?;
                let bias = Array1::from_vec(r.f64_vec()?);
                Ok(DenseLayer {
                    weights,
                    bias,
                    activation,
                })
            };
            let mut layers = Vec::with_capacity(n_layers);
            for _ in 0..n_layers {
                layers.push(read_layer(&mut r)?);
            }
            let attention = read_layer(&mut r)?;
            let dropout_rate = r.f64()?;
            let n_positions = r.u32()? as usize;
            let mut dropout_positions = Vec::with_capacity(n_positions);
            for _ in 0..n_positions {
                dropout_positions.push(r.u32()? as usize);
            }
            let rng_seed = r.u64()?;
            ClassifierModel::AttentionMlp(AttentionMlp {
                layers,
                attention,
                dropout_rate,
                dropout_positions,
                rng_seed,
            })
        }
    };

    Ok(ModelArchive {
        vocabulary,
        reducer,
        model,
    })
}

/// Serialize an archive to bytes (magic, version, payload, CRC-32).
pub fn to_bytes(archive: &ModelArchive) -> Vec<u8> {
    encode(archive)
}

/// Write the archive to disk; returns the byte count written.
pub fn save_model(archive: &ModelArchive, path: &Path) -> Result<usize, PersistError> {
    let bytes = encode(archive);
    std::fs::write(path, &bytes)?;
    Ok(bytes.len())
}

/// Parse an archive, validating magic, version and checksum before any
/// payload is decoded.
pub fn from_bytes(bytes: &[u8]) -> Result<ModelArchive, PersistError> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(PersistError::BadMagic);
    }
    if bytes.len() < 14 {
        return Err(PersistError::TruncatedArchive(bytes.len()));
    }
    let version = u16::from_le_bytes(bytes[8..10].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let payload_end = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    if crc32fast::hash(&bytes[..payload_end]) != stored {
        return Err(PersistError::ChecksumMismatch);
    }
    decode(&bytes[..payload_end])
}

pub fn load_model(path: &Path) -> Result<ModelArchive, PersistError> {
    let bytes = std::fs::read(path)?;
    from_bytes(&bytes)
}
