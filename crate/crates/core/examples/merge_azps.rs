//! Build an extended CoNLL document: take the zero pronouns annotated in an
//! ONF listing and insert them as `*pro*` rows.
//!
//! ```bash
//! cargo run --example merge_azps
//! ```

use std::path::Path;

use zeroref::conll::{parse_conll, write_conll};
use zeroref::merge::{apply_merge, plan_merge, strip_merge, Provenance};
use zeroref::onf::parse_onf_named;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let original = std::fs::read_to_string(fixtures.join("figure1.conll"))?;
    let conll = parse_conll(&original)?.remove(0);
    let onf = parse_onf_named(&std::fs::read_to_string(fixtures.join("figure1.onf"))?, &conll.doc_id)?;

    let plan = plan_merge(&onf, &conll)?;
    for ins in &plan.insertions {
        let how = match ins.provenance {
            Provenance::ExistingChain => "joins existing chain",
            Provenance::NewChain => "starts new chain",
        };
        println!(
            "ONF chain {:>3}: AZP at sentence {} before word {} {how} {}",
            ins.onf_chain, ins.azp.sentence, ins.azp.gap, ins.chain_id
        );
    }
    for r in &plan.rejects {
        println!("rejected: {}", serde_json::to_string(r)?);
    }

    let merged = apply_merge(&plan, &conll)?;
    let sentence = merged.sentence(0, 7).expect("sentence 7");
    println!("\nsentence 7 after merging:");
    for row in &sentence.rows {
        println!("  {:>2} {:<10} {}", row.word_number, row.word, zeroref::conll::format_cell(&row.coref));
    }

    let restored = write_conll(&[strip_merge(&merged, &plan)])?;
    println!("\nstrip restores the original: {}", restored == original);
    Ok(())
}
