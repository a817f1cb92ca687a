//! Score a response against a key with MUC, B3, CEAF-phi4 and the AZP
//! metric, and print the JSON report.
//!
//! ```bash
//! cargo run --example score_report -- [KEY RESPONSE]
//! ```

use std::path::PathBuf;

use zeroref::cli::{cmd_score, Command, RunConfig};
use zeroref::model::{ClusterSet, Member, Mention};
use zeroref::scoring::{score_document, AzpHitMode, ScoreOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // key {{a,b,c}} against response {{a,b},{c}}
    let m = |i| Member::Mention(Mention::new(0, 0, i, i));
    let key = ClusterSet::from_groups([(1, vec![m(0), m(1), m(2)])]);
    let response = ClusterSet::from_groups([(1, vec![m(0), m(1)]), (2, vec![m(2)])]);
    let report = score_document(&key, &response, &ScoreOptions::default());
    println!("{}", serde_json::to_string_pretty(&report)?);

    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut args = std::env::args().skip(1).map(PathBuf::from);
    let (k, r) = match (args.next(), args.next()) {
        (Some(k), Some(r)) => (k, r),
        _ => (fixtures.join("figure1_merged.conll"), fixtures.join("figure1.conll")),
    };
    for hit in [AzpHitMode::PositionOnly, AzpHitMode::PositionAndEntity] {
        let config = RunConfig { inputs: vec![k.clone(), r.clone()], azp_hit: hit, ..RunConfig::new(Command::Score) };
        let out = cmd_score(&config)?;
        println!("{hit:?}: CoNLL {:.4}, AZP F1 {:.4}", out.report.conll_avg_f1, out.report.azp.f1);
    }
    Ok(())
}
