//! End-to-end parsing of the checked-in binary fixtures. The fixtures
//! and the expected-value sidecar files are produced by an independent
//! writer (tools/gen_fixtures.py), so agreement here is a
//! cross-implementation check, not a self-test.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use permsentry::apk::{self, axml, dex};
use permsentry::dataset::{FeatureCategory, FeatureVocabulary};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn read(name: &str) -> Vec<u8> {
    std::fs::read(fixture(name)).unwrap()
}

fn read_lines(name: &str) -> BTreeSet<String> {
    std::fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn fixture_apk_permissions_match_generator() {
    let features = apk::scan_apk_bytes(&read("fixture.apk"), "fixture.apk").unwrap();
    assert_eq!(
        features.permissions,
        read_lines("fixture.apk.permissions.txt")
    );
}

#[test]
fn fixture_apk_dex_strings_union_both_classes_files() {
    let features = apk::scan_apk_bytes(&read("fixture.apk"), "fixture.apk").unwrap();
    assert_eq!(features.api_tokens, read_lines("fixture.apk.strings.txt"));
}

#[test]
fn fixture_apk_vectorizes_against_a_mixed_vocabulary() {
    let features = apk::scan_apk_bytes(&read("fixture.apk"), "fixture.apk").unwrap();
    let vocab = FeatureVocabulary {
        names: vec![
            "android.permission.SEND_SMS".into(),
            "android.permission.CAMERA".into(),
            "getDeviceId".into(),
            "getCellLocation".into(),
            "chmod777".into(),
            "pminstall".into(),
            "mount-oremount".into(),
        ],
        categories: vec![
            FeatureCategory::Permission,
            FeatureCategory::Permission,
            FeatureCategory::ApiCall,
            FeatureCategory::ApiCall,
            FeatureCategory::Command,
            FeatureCategory::Command,
            FeatureCategory::Command,
        ],
    };
    assert_eq!(apk::vectorize(&features, &vocab), vec![1, 0, 1, 0, 1, 1, 0]);
}

#[test]
fn minimal_apk_has_no_features() {
    let features = apk::scan_apk_bytes(&read("minimal.apk"), "minimal.apk").unwrap();
    assert!(features.permissions.is_empty());
    assert!(features.api_tokens.is_empty());
}

#[test]
fn utf8_and_utf16_manifests_decode_identically() {
    let a = axml::parse_axml(&read("manifest_utf8.axml")).unwrap();
    let b = axml::parse_axml(&read("manifest_utf16.axml")).unwrap();
    assert_eq!(apk::extract_permissions(&a), apk::extract_permissions(&b));
    assert_eq!(a.string_pool, b.string_pool);
    assert!(!apk::extract_permissions(&a).is_empty());
}

#[test]
fn raw_dex_decodes_non_ascii() {
    let strings = dex::scan_dex_strings(&read("strings.dex")).unwrap();
    assert!(strings.contains("café"));
    assert!(strings.contains("getDeviceId"));
}

#[test]
fn extract_features_end_to_end_from_disk() {
    let vocab = FeatureVocabulary {
        names: vec![
            "android.permission.READ_PHONE_STATE".into(),
            "sendTextMessage".into(),
        ],
        categories: vec![FeatureCategory::Permission, FeatureCategory::ApiCall],
    };
    let v = apk::extract_features(&fixture("fixture.apk"), &vocab).unwrap();
    assert_eq!(v, vec![1, 1]);
}

#[test]
fn archive_without_manifest_is_rejected() {
    let mut bytes = read("fixture.apk");
    // rename the manifest in both the central directory and the local
    // header so the archive stays structurally valid
    let needle = b"AndroidManifest.xml";
    let mut found = 0;
    let mut i = 0;
    while i + needle.len() <= bytes.len() {
        if &bytes[i..i + needle.len()] == needle {
            bytes[i] = b'B';
            found += 1;
        }
        i += 1;
    }
    assert!(found >= 2);
    assert!(matches!(
        apk::scan_apk_bytes(&bytes, "x"),
        Err(apk::ApkError::ManifestMissing)
    ));
}
