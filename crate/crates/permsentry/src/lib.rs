//! Static Android malware analysis: APK feature extraction, feature
//! reduction and a set of from-scratch classifiers with deterministic
//! training.
//!
//! The crate mines two artifacts out of an APK without executing it:
//! the permission set declared in the binary `AndroidManifest.xml` and
//! the string table of every `classes*.dex` file. Those string sets are
//! vectorized against a fixed feature vocabulary into 0/1 rows, reduced
//! by PCA or extra-trees selection and fed to one of five classifiers.
//! Every pipeline is reproducible: the same seed and data produce a
//! byte-identical model archive.
//!
//! Train on a labeled CSV held in memory and classify a new row:
//!
//! ```
//! use permsentry::dataset::parse_csv;
//! use permsentry::models::{predict, ModelKind};
//! use permsentry::pipeline::{run_train, ReducerKind, TrainOptions};
//!
//! let csv = "\
//! android.permission.SEND_SMS,getDeviceId,android.permission.VIBRATE,class
//! 1,1,0,malicious
//! 1,0,0,malicious
//! 0,1,1,malicious
//! 1,1,1,malicious
//! 0,0,1,benign
//! 0,1,1,benign
//! 0,0,0,benign
//! 1,0,1,benign
//! ";
//! let ds = parse_csv(csv).unwrap();
//!
//! let opts = TrainOptions {
//!     kind: ModelKind::NaiveBayes,
//!     reducer: ReducerKind::None,
//!     ..TrainOptions::default()
//! };
//! let outcome = run_train(&ds, &opts).unwrap();
//!
//! let p = predict(&outcome.archive.model, &[1.0, 1.0, 0.0]).unwrap();
//! assert!((0.0..=1.0).contains(&p));
//! ```
//!
//! Archives round-trip through a checksummed binary format:
//!
//! ```
//! # use permsentry::dataset::parse_csv;
//! # use permsentry::models::ModelKind;
//! # use permsentry::pipeline::{run_train, ReducerKind, TrainOptions};
//! use permsentry::persist::{from_bytes, to_bytes};
//!
//! # let csv = "a,b,class\n1,0,1\n0,1,0\n1,1,1\n0,0,0\n";
//! # let ds = parse_csv(csv).unwrap();
//! # let opts = TrainOptions {
//! #     kind: ModelKind::NaiveBayes,
//! #     reducer: ReducerKind::None,
//! #     ..TrainOptions::default()
//! # };
//! # let outcome = run_train(&ds, &opts).unwrap();
//! let bytes = to_bytes(&outcome.archive);
//! let restored = from_bytes(&bytes).unwrap();
//! assert_eq!(restored.vocabulary.names, outcome.archive.vocabulary.names);
//! ```

pub mod apk;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod models;
pub mod persist;
pub mod pipeline;
pub mod reduce;
pub mod rng;
