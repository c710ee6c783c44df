//! Static feature extraction from APK files.
//!
//! An APK is a ZIP archive. The manifest (`AndroidManifest.xml`) is
//! stored in Android's binary XML encoding and declares the app's
//! permissions; the `classes*.dex` files carry a string table holding
//! every identifier and literal in the bytecode. Three feature
//! categories come out of these: declared permissions, API-call tokens
//! and shell-command fragments.

pub mod axml;
pub mod dex;
pub mod zip;

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::dataset::{FeatureCategory, FeatureVocabulary};
use axml::AxmlDocument;

#[derive(Debug, Error)]
pub enum ApkError {
    #[error("no end-of-central-directory record: not a ZIP archive")]
    MissingEocd,
    #[error("central directory truncated: expected {expected} entries, parsed {parsed}")]
    TruncatedDirectory { expected: usize, parsed: usize },
    #[error("unsupported compression method {0}")]
    UnsupportedCompression(u16),
    #[error("CRC-32 mismatch: expected {expected:#010x}, got {actual:#010x}")]
    CrcMismatch { expected: u32, actual: u32 },
    #[error("corrupt deflate stream")]
    CorruptStream,
    #[error("local header disagrees with central directory for {0:?}")]
    HeaderMismatch(String),
    #[error("bad magic: {0}")]
    BadMagic(&'static str),
    #[error("string pool index {index} out of range (pool size {pool_size})")]
    StringIndexOutOfRange { index: u32, pool_size: usize },
    #[error("unbalanced start/end elements in binary XML")]
    UnbalancedElements,
    #[error("offset out of bounds at {0:#x}")]
    OffsetOutOfBounds(usize),
    #[error("malformed ULEB128 at offset {0:#x}")]
    MalformedUleb128(usize),
    #[error("archive has no AndroidManifest.xml")]
    ManifestMissing,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw string sets pulled from one APK.
#[derive(Debug, Clone, Default)]
pub struct ApkStaticFeatures {
    pub permissions: BTreeSet<String>,
    pub api_tokens: BTreeSet<String>,
    pub command_tokens: BTreeSet<String>,
    pub source_path: String,
}

/// Pull the permission set and DEX string pool out of an APK held in memory.
pub fn scan_apk_bytes(archive: &[u8], source_path: &str) -> Result<ApkStaticFeatures, ApkError> {
    let entries = zip::read_central_directory(archive)?;

    let manifest = entries
        .iter()
        .find(|e| e.name == "AndroidManifest.xml")
        .ok_or(ApkError::ManifestMissing)?;
    let manifest_bytes = zip::decompress_entry(archive, manifest)?;
    let doc = axml::parse_axml(&manifest_bytes)?;
    let permissions = extract_permissions(&doc);

    // Multidex: union string pools of every classes*.dex.
    let mut dex_strings = BTreeSet::new();
    for entry in &entries {
        if entry.name.starts_with("classes") && entry.name.ends_with(".dex") {
            let bytes = zip::decompress_entry(archive, entry)?;
            dex_strings.extend(dex::scan_dex_strings(&bytes)?);
        }
    }

    Ok(ApkStaticFeatures {
        permissions,
        api_tokens: dex_strings,
        command_tokens: BTreeSet::new(),
        source_path: source_path.to_string(),
    })
}

/// `name` attribute of every `uses-permission` element, deduplicated.
pub fn extract_permissions(doc: &AxmlDocument) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for element in &doc.elements {
        if doc.string(element.name) == Some("uses-permission") {
            for attr in &element.attributes {
                if doc.string(attr.name) == Some("name") {
                    if let axml::AttrValue::Str(idx) = attr.value {
                        if let Some(s) = doc.string(idx) {
                            if !s.is_empty() {
                                out.insert(s.to_string());
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Binary feature vector for one APK against a fixed vocabulary.
///
/// Position `i` is 1 iff vocabulary feature `i` is present in the APK:
/// exact match against the manifest permission set for permission
/// features, exact match against the DEX string pool for API features,
/// and whitespace-stripped substring match over DEX strings for command
/// features. A missing DEX is tolerated (API/command features read 0);
/// a missing manifest is an error.
pub fn extract_features(apk_path: &Path, vocab: &FeatureVocabulary) -> Result<Vec<u8>, ApkError> {
    let archive = std::fs::read(apk_path)?;
    let features = scan_apk_bytes(&archive, &apk_path.display().to_string())?;
    Ok(vectorize(&features, vocab))
}

/// Map raw string sets onto the 0/1 layout defined by `vocab`.
pub fn vectorize(features: &ApkStaticFeatures, vocab: &FeatureVocabulary) -> Vec<u8> {
    let stripped: Vec<String> = features
        .api_tokens
        .iter()
        .map(|s| s.split_whitespace().collect::<String>())
        .collect();
    vocab
        .names
        .iter()
        .zip(&vocab.categories)
        .map(|(name, category)| {
            let hit = match category {
                FeatureCategory::Permission => features.permissions.contains(name),
                FeatureCategory::ApiCall => features.api_tokens.contains(name),
                // Command tokens are shell fragments, not identifiers:
                // substring match over whitespace-stripped DEX strings.
                FeatureCategory::Command => {
                    stripped.iter().any(|s| s.contains(name.as_str()))
                        || features.command_tokens.contains(name)
                }
            };
            u8::from(hit)
        })
        .collect()
}
