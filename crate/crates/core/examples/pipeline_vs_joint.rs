//! Run the baseline resolvers in both modes on a document and compare the
//! clusters they produce.
//!
//! ```bash
//! cargo run --example pipeline_vs_joint
//! ```

use std::path::Path;

use zeroref::conll::{extract_mentions, parse_conll, write_conll};
use zeroref::harness::{
    run_joint_test, run_pipeline, ClusterDiff, HarnessConfig, NearestClusterResolver, StringMatchCoref,
    VerbGapIdentifier,
};
use zeroref::merge::{materialize, strip_azps, RowFill};
use zeroref::scoring::{score_document, ScoreOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bush_extended.conll");
    let gold_doc = parse_conll(&std::fs::read_to_string(path)?)?.remove(0);
    let gold = extract_mentions(&gold_doc);
    let doc = strip_azps(&gold_doc);
    let fill = RowFill::for_document(&gold_doc);

    let ident = VerbGapIdentifier::default();
    let coref = StringMatchCoref::default();
    let pipeline = run_pipeline(&doc, &coref, &ident, &NearestClusterResolver, &HarnessConfig::default())?;
    let joint = run_joint_test(&doc, &ident, &coref, &fill)?;

    println!("pipeline: {} gaps found, {} attached", pipeline.diagnostics.identified, pipeline.diagnostics.attached);
    println!("joint:    {} gaps tagged", joint.gaps.len());
    for (name, clusters) in [("pipeline", &pipeline.clusters), ("joint", &joint.clusters)] {
        let r = score_document(&gold, clusters, &ScoreOptions::default());
        println!("{name:<9} CoNLL F1 {:.4}  AZP R {:.4} P {:.4}", r.conll_avg_f1, r.azp.recall, r.azp.precision);
    }
    let diff = ClusterDiff::between(&pipeline.clusters, &joint.clusters);
    println!("clusters in common: {}, differing: {}", diff.common, diff.only_left.len() + diff.only_right.len());

    println!("\n{}", write_conll(&[materialize(&doc, &pipeline.clusters, &fill)?])?);
    Ok(())
}
