//! Parse a CoNLL-2012 file, list its coreference chains and write it back.
//!
//! ```bash
//! cargo run --example parse_roundtrip -- [FILE]
//! ```

use std::path::PathBuf;

use zeroref::conll::{extract_mentions, parse_conll, write_conll, write_conll_with, ColumnLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/table2_extended.conll"));
    let text = std::fs::read_to_string(&path)?;
    let docs = parse_conll(&text)?;

    for doc in &docs {
        println!("{}: {} sentences, {} *pro* rows", doc.doc_id, doc.sentence_count(), doc.pro_count());
        for cluster in extract_mentions(doc).clusters {
            let members: Vec<String> = cluster.members.iter().map(ToString::to_string).collect();
            println!("  chain {}: {}", cluster.id, members.join(", "));
        }
    }

    let canonical = write_conll(&docs)?;
    println!("\nbyte-identical after round trip: {}", canonical == text);
    println!("\n{}", write_conll_with(&docs, ColumnLayout::Aligned)?);
    Ok(())
}
