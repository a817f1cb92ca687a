//! Read the coreference chains of an `.onf` listing and show which members
//! are zero pronouns.
//!
//! ```bash
//! cargo run --example onf_chains -- [FILE.onf]
//! ```

use std::path::PathBuf;

use zeroref::onf::{azp_members, parse_onf_named, ChainKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/figure1_excerpt.onf"));
    let onf = parse_onf_named(&std::fs::read_to_string(&path)?, "figure1")?;

    for chain in &onf.chains {
        let kind = match chain.kind {
            ChainKind::Ident => "IDENT",
            ChainKind::Appos => "APPOS",
        };
        println!("chain {} ({kind}) in section {}", chain.chain_id, chain.part);
        for m in &chain.members {
            let role = m.role.map(|r| format!("{r:?} ")).unwrap_or_default();
            let zero = if m.is_azp { "  <- zero pronoun" } else { "" };
            println!("  {role}{:<8} {}{zero}", m.coordinate.to_string(), m.surface);
        }
    }
    println!("\n{} zero-pronoun members", azp_members(&onf).len());
    Ok(())
}
