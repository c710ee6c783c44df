//! Randomized invariants over the parsers, the CSV codec and the
//! prediction surface.

use proptest::prelude::*;

use permsentry::apk::{zip, ApkError};
use permsentry::dataset::{parse_csv, to_csv, FeatureVocabulary, Label, LabeledDataset};
use permsentry::models::{self, predict, ClassifierModel};

/// Single-entry stored ZIP with a correct central directory, built
/// field by field rather than through the crate's own reader.
fn stored_archive(name: &str, payload: &[u8]) -> Vec<u8> {
    let crc = crc32fast::hash(payload);
    let name = name.as_bytes();
    let mut out = Vec::new();

    // local file header
    out.extend_from_slice(&0x04034b50u32.to_le_bytes());
    out.extend_from_slice(&20u16.to_le_bytes()); // version needed
    out.extend_from_slice(&0u16.to_le_bytes()); // flags
    out.extend_from_slice(&0u16.to_le_bytes()); // method: stored
    out.extend_from_slice(&0u32.to_le_bytes()); // dos time+date
    out.extend_from_slice(&crc.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes()); // extra len
    out.extend_from_slice(name);
    out.extend_from_slice(payload);

    // central directory
    let cd_offset = out.len() as u32;
    out.extend_from_slice(&0x02014b50u32.to_le_bytes());
    out.extend_from_slice(&20u16.to_le_bytes()); // version made by
    out.extend_from_slice(&20u16.to_le_bytes()); // version needed
    out.extend_from_slice(&0u16.to_le_bytes()); // flags
    out.extend_from_slice(&0u16.to_le_bytes()); // method
    out.extend_from_slice(&0u32.to_le_bytes()); // dos time+date
    out.extend_from_slice(&crc.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&(name.len() as u16).to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes()); // extra len
    out.extend_from_slice(&0u16.to_le_bytes()); // comment len
    out.extend_from_slice(&0u16.to_le_bytes()); // disk number
    out.extend_from_slice(&0u16.to_le_bytes()); // internal attrs
    out.extend_from_slice(&0u32.to_le_bytes()); // external attrs
    out.extend_from_slice(&0u32.to_le_bytes()); // local header offset
    out.extend_from_slice(name);
    let cd_size = out.len() as u32 - cd_offset;

    // end of central directory
    out.extend_from_slice(&0x06054b50u32.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&cd_size.to_le_bytes());
    out.extend_from_slice(&cd_offset.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out
}

proptest! {
    #[test]
    fn stored_zip_round_trips_any_payload(
        payload in proptest::collection::vec(any::<u8>(), 0..2048),
        name in "[a-zA-Z0-9_./-]{1,40}",
    ) {
        let archive = stored_archive(&name, &payload);
        let entries = zip::read_central_directory(&archive).unwrap();
        prop_assert_eq!(entries.len(), 1);
        prop_assert_eq!(&entries[0].name, &name);
        let data = zip::decompress_entry(&archive, &entries[0]).unwrap();
        prop_assert_eq!(data, payload);
    }

    #[test]
    fn corrupting_a_stored_payload_is_caught(
        payload in proptest::collection::vec(any::<u8>(), 1..512),
        flip in any::<u8>(),
    ) {
        let archive = stored_archive("f", &payload);
        let flip = (flip as usize) % payload.len();
        let mut corrupt = archive.clone();
        // payload starts right after the 30-byte local header + name
        let payload_at = 30 + 1 + flip;
        corrupt[payload_at] ^= 0xff;
        let entries = zip::read_central_directory(&corrupt).unwrap();
        let err = zip::decompress_entry(&corrupt, &entries[0]).unwrap_err();
        let is_crc = matches!(err, ApkError::CrcMismatch { .. });
        prop_assert!(is_crc, "unexpected error: {}", err);
    }

    #[test]
    fn csv_round_trip_is_identity(
        n in 1usize..20,
        d in 1usize..15,
        seed in any::<u64>(),
    ) {
        let mut rng = permsentry::rng::Xoshiro256::seed_from_u64(seed);
        let names: Vec<String> = (0..d).map(|i| format!("feature_{i:02}")).collect();
        let rows: Vec<Vec<u8>> = (0..n)
            .map(|_| (0..d).map(|_| (rng.next_u64() & 1) as u8).collect())
            .collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| if rng.next_u64() & 1 == 1 { Label::Malicious } else { Label::Benign })
            .collect();
        let ds = LabeledDataset { rows, labels, vocab: FeatureVocabulary::from_names(names) };
        let back = parse_csv(&to_csv(&ds)).unwrap();
        prop_assert_eq!(back.rows, ds.rows);
        prop_assert_eq!(back.labels, ds.labels);
        prop_assert_eq!(back.vocab.names, ds.vocab.names);
    }

    #[test]
    fn predictions_stay_probabilities(
        x in proptest::collection::vec(-1e3f64..1e3, 4),
        seed in any::<u64>(),
    ) {
        let mut rng = permsentry::rng::Xoshiro256::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..24)
            .map(|_| (0..4).map(|_| (rng.next_u64() & 1) as f64).collect())
            .collect();
        let targets: Vec<f64> = (0..24).map(|i| f64::from(u8::from(i % 2 == 0))).collect();

        let models: Vec<ClassifierModel> = vec![
            ClassifierModel::NaiveBayes(models::nb::train_on_rows(&rows, &targets, 1.0).unwrap()),
            ClassifierModel::Logistic(
                models::train_logistic(&rows, &targets, 30, 0.5, 1e-4).unwrap(),
            ),
            ClassifierModel::RandomForest(
                models::train_random_forest(&rows, &targets, 5, seed).unwrap(),
            ),
            ClassifierModel::GradientBoosting(
                models::train_gradient_boosting(&rows, &targets, 5, 0.1, 3, seed).unwrap().0,
            ),
        ];
        for m in &models {
            let p = predict(m, &x).unwrap();
            prop_assert!((0.0..=1.0).contains(&p), "{p}");
        }
    }
}
