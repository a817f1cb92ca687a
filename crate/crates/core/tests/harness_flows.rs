mod common;

use common::*;
use zeroref::conll::extract_mentions;
use zeroref::features::{ClusterRepresentation, FeatureLayout, concat_pair, embed_mention, Embedder};
use zeroref::harness::{
    candidates, run_joint_test, run_pipeline, AzpIdentifier, CorefResolver, GoldAzpIdentifier, GoldAzpResolver,
    GoldCoref, HarnessConfig, NearestClusterResolver, StringMatchCoref, VerbGapIdentifier,
};
use zeroref::merge::{strip_azps, RowFill};
use zeroref::model::{Azp, Member, Mention};
use zeroref::scoring::{score_document, ScoreOptions};

const EXTENDED: &[&str] = &["bush_extended.conll", "figure1_merged.conll", "multipart.conll", "table2_extended.conll"];

#[test]
fn oracles_score_perfectly_in_both_modes() {
    for name in EXTENDED {
        for gold_doc in load_all(name) {
            let gold = extract_mentions(&gold_doc);
            let masked = strip_azps(&gold_doc);
            let pipe = run_pipeline(
                &masked,
                &GoldCoref::new(gold.clone()),
                &GoldAzpIdentifier::new(&gold),
                &GoldAzpResolver::new(&gold),
                &HarnessConfig::default(),
            )
            .unwrap();
            let joint =
                run_joint_test(&masked, &GoldAzpIdentifier::new(&gold), &GoldCoref::new(gold.clone()), &RowFill::default())
                    .unwrap();
            for (mode, clusters) in [("pipeline", &pipe.clusters), ("joint", &joint.clusters)] {
                let r = score_document(&gold, clusters, &ScoreOptions::default());
                assert_eq!(r.conll_avg_f1, 1.0, "{name} {mode}");
                assert_eq!(r.azp.f1, 1.0, "{name} {mode}");
            }
        }
    }
}

#[test]
fn bush_azp_joins_the_bush_cluster() {
    let doc = strip_azps(&load("bush_extended.conll"));
    let ident = GoldAzpIdentifier::from_gaps(vec![Azp::new(0, 0, 20)]);
    let out = run_pipeline(&doc, &StringMatchCoref::default(), &ident, &NearestClusterResolver, &HarnessConfig::default())
        .unwrap();
    assert_eq!(out.diagnostics.attached, 1);
    let bush = out
        .clusters
        .clusters
        .iter()
        .find(|c| c.members.contains(&Member::Mention(Mention::new(0, 0, 2, 2))))
        .expect("string match groups the two Bush mentions");
    assert!(bush.members.contains(&Member::Mention(Mention::new(0, 0, 14, 14))));
    assert!(bush.members.contains(&Member::Azp(Azp::new(0, 0, 20))));
}

#[test]
fn verb_gaps() {
    let bush = strip_azps(&load("bush_extended.conll"));
    let gaps = VerbGapIdentifier::default().identify(&bush).unwrap();
    let at: Vec<usize> = gaps.iter().map(|a| a.gap).collect();
    assert_eq!(at, vec![4, 6, 20, 22]);

    let two = load("table2.conll");
    let gaps = VerbGapIdentifier::default().identify(&two).unwrap();
    assert_eq!(gaps, vec![Azp::new(0, 0, 2), Azp::new(0, 1, 1)]);
}

#[test]
fn baseline_joint_finds_the_gold_zero() {
    let gold_doc = load("bush_extended.conll");
    let gold = extract_mentions(&gold_doc);
    let doc = strip_azps(&gold_doc);
    let out = run_joint_test(&doc, &VerbGapIdentifier::default(), &StringMatchCoref::default(), &RowFill::for_document(&gold_doc))
        .unwrap();
    assert_eq!(out.gaps.len(), 4);
    let r = score_document(&gold, &out.clusters, &ScoreOptions::default());
    // four zeros attached, one of them right
    assert_eq!(r.azp.recall, 1.0);
    assert_eq!(r.azp.precision, 0.25);
}

#[test]
fn bush_features() {
    let doc = strip_azps(&load("bush_extended.conll"));
    let clusters = StringMatchCoref::default().resolve(&doc).unwrap();
    let azp = Azp::new(0, 0, 20);
    for (rep, start) in [(ClusterRepresentation::LastMention, 14), (ClusterRepresentation::FirstMention, 2)] {
        let config = HarnessConfig { representation: rep, ..HarnessConfig::default() };
        let cands = candidates(&doc, &clusters, &azp, &config);
        assert_eq!(cands.len(), 1);
        let c = &cands[0];
        assert_eq!(c.representative, Mention::new(0, 0, start, start));
        assert!(c.features.same_sentence);
        assert_eq!(c.features.cluster_distance, 0);
        // neighbours of the gap are "wanted" and "to"
        assert_eq!(c.features.prev_word, config.embedder.embed("wanted"));
        assert_eq!(c.features.next_word, config.embedder.embed("to"));

        let layout = FeatureLayout::new(16, 16, config.buckets.len());
        let rep_vec = embed_mention(&doc, &c.representative, &config.embedder);
        let pair = concat_pair(&rep_vec, &c.features, &layout).unwrap();
        assert_eq!(pair.dim(), layout.width());
        assert!(pair.is_finite());
    }
}

#[test]
fn same_seed_same_features() {
    let doc = strip_azps(&load("figure1_merged.conll"));
    let clusters = extract_mentions(&load("figure1.conll"));
    let azp = Azp::new(0, 8, 13);
    let a = candidates(&doc, &clusters, &azp, &HarnessConfig::with_seed(7));
    let b = candidates(&doc, &clusters, &azp, &HarnessConfig::with_seed(7));
    let c = candidates(&doc, &clusters, &azp, &HarnessConfig::with_seed(8));
    assert_eq!(a, b);
    assert_ne!(a, c);
}
