//! Labeled binary feature matrices: CSV loading, class balancing and
//! reproducible train/test splits.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::rng::Xoshiro256;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("CSV file has no header row")]
    MissingHeader,
    #[error("cell at row {row}, column {col} is not 0 or 1: {value:?}")]
    NonBinaryCell {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("unknown label value {0:?} (expected 0/1 or benign/malicious)")]
    UnknownLabelValue(String),
    #[error("row {row} has {got} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("dataset contains a single class only")]
    SingleClassDataset,
    #[error("split leaves one side empty")]
    DegenerateSplit,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureCategory {
    Permission,
    ApiCall,
    Command,
}

impl FeatureCategory {
    /// Classify a dataset column name into one of the three feature
    /// categories. Permissions carry the `android.permission.` prefix;
    /// command features are shell/`pm` fragments; everything else is
    /// treated as an API-call token.
    pub fn infer(name: &str) -> FeatureCategory {
        if name.contains(".permission.") {
            FeatureCategory::Permission
        } else if name.starts_with("GET-")
            || name.starts_with('.')
            || name.starts_with("pm")
            || name.contains('/')
        {
            FeatureCategory::Command
        } else {
            FeatureCategory::ApiCall
        }
    }
}

/// Ordered feature names; the order defines the vector layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVocabulary {
    pub names: Vec<String>,
    pub categories: Vec<FeatureCategory>,
}

impl FeatureVocabulary {
    pub fn from_names(names: Vec<String>) -> Self {
        let categories = names.iter().map(|n| FeatureCategory::infer(n)).collect();
        FeatureVocabulary { names, categories }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Benign,
    Malicious,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Benign => write!(f, "benign"),
            Label::Malicious => write!(f, "malicious"),
        }
    }
}

/// Dense {0,1} feature matrix with per-row labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub rows: Vec<Vec<u8>>,
    pub labels: Vec<Label>,
    pub vocab: FeatureVocabulary,
}

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub seed: u64,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.vocab.len()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let malicious = self
            .labels
            .iter()
            .filter(|l| **l == Label::Malicious)
            .count();
        (self.labels.len() - malicious, malicious)
    }

    /// Row labels as 0.0/1.0 targets (malicious = 1).
    pub fn targets(&self) -> Vec<f64> {
        self.labels
            .iter()
            .map(|l| f64::from(*l == Label::Malicious))
            .collect()
    }

    fn take_rows(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            vocab: self.vocab.clone(),
        }
    }
}

/// Load a comma-separated permission matrix.
///
/// The first row is the header. The label column is the one named
/// `class` (case-insensitive) or, absent that, the last column. Labels
/// accept `0`/`1` and `benign`/`malicious` (case-insensitive); every
/// other cell must be exactly `0` or `1`.
pub fn load_csv(path: &Path) -> Result<LabeledDataset, DatasetError> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

/// Parse CSV text already in memory; see [`load_csv`] for the format.
///
/// ```
/// use permsentry::dataset::{parse_csv, FeatureCategory, Label};
///
/// let ds = parse_csv(
///     "android.permission.SEND_SMS,getDeviceId,pminstall,class\n\
///      1,1,0,malicious\n\
///      0,0,1,benign\n",
/// )
/// .unwrap();
/// assert_eq!(ds.labels, vec![Label::Malicious, Label::Benign]);
/// assert_eq!(ds.vocab.categories[0], FeatureCategory::Permission);
/// assert_eq!(ds.vocab.categories[1], FeatureCategory::ApiCall);
/// assert_eq!(ds.vocab.categories[2], FeatureCategory::Command);
/// ```
pub fn parse_csv(text: &str) -> Result<LabeledDataset, DatasetError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or(DatasetError::MissingHeader)?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.is_empty() || columns.iter().all(|c| c.is_empty()) {
        return Err(DatasetError::MissingHeader);
    }
    let label_col = columns
        .iter()
        .position(|c| c.eq_ignore_ascii_case("class"))
        .unwrap_or(columns.len() - 1);

    let names: Vec<String> = columns
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_col)
        .map(|(_, c)| c.to_string())
        .collect();
    let vocab = FeatureVocabulary::from_names(names);

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(DatasetError::RaggedRow {
                row: row_idx,
                got: fields.len(),
                expected: columns.len(),
            });
        }
        let mut row = Vec::with_capacity(vocab.len());
        for (col, field) in fields.iter().enumerate() {
            if col == label_col {
                labels.push(parse_label(field)?);
            } else {
                row.push(match *field {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(DatasetError::NonBinaryCell {
                            row: row_idx,
                            col,
                            value: other.to_string(),
                        })
                    }
                });
            }
        }
        rows.push(row);
    }
    Ok(LabeledDataset {
        rows,
        labels,
        vocab,
    })
}

fn parse_label(field: &str) -> Result<Label, DatasetError> {
    match field.to_ascii_lowercase().as_str() {
        "0" | "benign" => Ok(Label::Benign),
        "1" | "malicious" => Ok(Label::Malicious),
        other => Err(DatasetError::UnknownLabelValue(other.to_string())),
    }
}

/// Serialize back to the same CSV layout (label column last, named
/// `class`, values 0/1).
pub fn to_csv(ds: &LabeledDataset) -> String {
    let mut out = String::new();
    out.push_str(&ds.vocab.names.join(","));
    out.push_str(",class\n");
    for (row, label) in ds.rows.iter().zip(&ds.labels) {
        for cell in row {
            out.push(if *cell == 0 { '0' } else { '1' });
            out.push(',');
        }
        out.push(if *label == Label::Malicious { '1' } else { '0' });
        out.push('\n');
    }
    out
}

/// Downsample the majority class to the minority count, then reshuffle.
pub fn balance_classes(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset, DatasetError> {
    let benign: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.labels[i] == Label::Benign)
        .collect();
    let malicious: Vec<usize> = (0..ds.len())
        .filter(|&i| ds.labels[i] == Label::Malicious)
        .collect();
    if benign.is_empty() || malicious.is_empty() {
        return Err(DatasetError::SingleClassDataset);
    }
    let target = benign.len().min(malicious.len());
    let mut rng = Xoshiro256::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(2 * target);
    for class in [benign, malicious] {
        if class.len() == target {
            keep.extend(class);
        } else {
            let picked = rng.sample_indices(class.len(), target);
            keep.extend(picked.into_iter().map(|i| class[i]));
        }
    }
    let mut rng = Xoshiro256::seed_from_u64(seed);
    rng.shuffle(&mut keep);
    Ok(ds.take_rows(&keep))
}

/// Seeded permutation split at `floor(train_fraction * n)`.
pub fn train_test_split(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitPair, DatasetError> {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must be in (0, 1)"
    );
    let n = ds.len();
    let cut = (train_fraction * n as f64).floor() as usize;
    if cut == 0 || cut == n {
        return Err(DatasetError::DegenerateSplit);
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Xoshiro256::seed_from_u64(seed);
    rng.shuffle(&mut order);
    Ok(SplitPair {
        train: ds.take_rows(&order[..cut]),
        test: ds.take_rows(&order[cut..]),
        seed,
    })
}
