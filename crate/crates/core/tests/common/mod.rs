#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use zeroref::conll::{parse_conll, Document};
use zeroref::onf::{parse_onf_named, OnfDocument};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> Document {
    let mut docs = parse_conll(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert_eq!(docs.len(), 1, "{name} should hold one document");
    docs.remove(0)
}

pub fn load_all(name: &str) -> Vec<Document> {
    parse_conll(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load_onf(name: &str, doc_id: &str) -> OnfDocument {
    parse_onf_named(&fixture_text(name), doc_id).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every well-formed CoNLL fixture.
pub const CONLL_FIXTURES: &[&str] = &[
    "azp_only_chain.conll",
    "basic.conll",
    "bush_extended.conll",
    "figure1.conll",
    "figure1_merged.conll",
    "multipart.conll",
    "score_key.conll",
    "score_other_doc.conll",
    "score_response.conll",
    "table2.conll",
    "table2_extended.conll",
];
