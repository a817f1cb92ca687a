//! Pair an AZP with the candidate clusters around it and assemble the
//! feature vector an AZP resolver would score.
//!
//! ```bash
//! cargo run --example cluster_features
//! ```

use std::path::Path;

use zeroref::conll::parse_conll;
use zeroref::features::{concat_pair, embed_mention, ClusterRepresentation, Embedder, FeatureLayout};
use zeroref::harness::{candidates, CorefResolver, HarnessConfig, StringMatchCoref};
use zeroref::merge::strip_azps;
use zeroref::model::Azp;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bush_extended.conll");
    let doc = strip_azps(&parse_conll(&std::fs::read_to_string(path)?)?.remove(0));
    let clusters = StringMatchCoref::default().resolve(&doc)?;
    // the zero subject of "to attend"
    let azp = Azp::new(0, 0, 20);

    for rep in [ClusterRepresentation::FirstMention, ClusterRepresentation::LastMention] {
        let config = HarnessConfig { representation: rep, ..HarnessConfig::with_seed(42) };
        let layout = FeatureLayout::new(config.embedder.dim(), config.embedder.dim(), config.buckets.len());
        println!("{rep:?}:");
        for c in candidates(&doc, &clusters, &azp, &config) {
            let rep_vec = embed_mention(&doc, &c.representative, &config.embedder);
            let pair = concat_pair(&rep_vec, &c.features, &layout)?;
            println!(
                "  cluster {} represented by {:?}: same sentence {}, distance bucket {}, {} features",
                c.cluster_id,
                c.representative,
                c.features.same_sentence,
                c.features.cluster_distance,
                pair.dim()
            );
        }
    }
    Ok(())
}
