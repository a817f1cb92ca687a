//! Pipeline and joint resolution flows over pluggable resolvers.
//!
//! Pipeline: cluster the overt mentions, find AZP gaps, then attach each
//! AZP to one of the clusters. Joint: insert `*pro*` rows at identified
//! gaps and let a single coreference resolver cluster everything.

mod baselines;
mod gold;
pub mod losses;
pub mod subprocess;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::conll::Document;
use crate::features::{
    assemble_azp_features, represent_cluster, AzpFeatures, ClusterRepresentation, DistanceBuckets, HashEmbedder,
};
use crate::merge::{insert_pro_rows, IndexMap, MergeError, RowFill};
use crate::model::{Azp, ChainId, Cluster, ClusterSet, ClusterSetError, Member, Mention};

pub use baselines::{NearestClusterResolver, StringMatchCoref, VerbGapIdentifier, DEFAULT_VERB_PREFIXES};
pub use gold::{GoldAzpIdentifier, GoldAzpResolver, GoldCoref};

#[derive(Debug, thiserror::Error)]
pub enum ResolverError {
    #[error("resolver process failed: {0}")]
    Process(String),
    #[error("resolver protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{stage} broke its contract: {detail}")]
    ResolverContractViolation { stage: &'static str, detail: String },
    #[error("input for {0:?} already contains *pro* rows; mask them first")]
    UnmaskedInput(String),
    #[error(transparent)]
    Resolver(#[from] ResolverError),
    #[error(transparent)]
    Merge(#[from] MergeError),
}

fn violation(stage: &'static str, detail: impl Into<String>) -> HarnessError {
    HarnessError::ResolverContractViolation { stage, detail: detail.into() }
}

/// Clusters the mentions of a document.
pub trait CorefResolver {
    fn resolve(&self, doc: &Document) -> Result<ClusterSet, ResolverError>;

    /// Whether calls may overlap. Callers run documents one at a time for
    /// resolvers that return false.
    fn concurrent(&self) -> bool {
        true
    }
}

/// Finds AZP gaps in a document without `*pro*` rows.
pub trait AzpIdentifier {
    fn identify(&self, doc: &Document) -> Result<Vec<Azp>, ResolverError>;

    fn concurrent(&self) -> bool {
        true
    }
}

/// A cluster offered to an [`AzpResolver`] together with its pair features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub cluster_id: ChainId,
    pub representative: Mention,
    pub features: AzpFeatures,
}

/// Chooses a cluster for one AZP, or abstains with `None`.
pub trait AzpResolver {
    fn resolve(&self, doc: &Document, azp: &Azp, candidates: &[Candidate]) -> Result<Option<ChainId>, ResolverError>;

    fn concurrent(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub representation: ClusterRepresentation,
    pub buckets: DistanceBuckets,
    pub embedder: HashEmbedder,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            representation: ClusterRepresentation::default(),
            buckets: DistanceBuckets::default(),
            embedder: HashEmbedder::new(16, 0),
        }
    }
}

impl HarnessConfig {
    pub fn with_seed(seed: u64) -> Self {
        HarnessConfig { embedder: HashEmbedder::new(16, seed), ..Self::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    pub identified: usize,
    pub attached: usize,
    /// AZPs left out of the output because the resolver abstained or no
    /// cluster was available.
    pub abstained: Vec<Azp>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutput {
    pub clusters: ClusterSet,
    pub diagnostics: PipelineDiagnostics,
}

fn check_masked(doc: &Document) -> Result<(), HarnessError> {
    if doc.has_pro_rows() {
        return Err(HarnessError::UnmaskedInput(doc.doc_id.clone()));
    }
    Ok(())
}

fn check_clusters(stage: &'static str, clusters: &ClusterSet) -> Result<(), HarnessError> {
    clusters.validate().map_err(|e: ClusterSetError| violation(stage, e.to_string()))
}

fn check_gaps(doc: &Document, gaps: &[Azp]) -> Result<(), HarnessError> {
    let mut seen = HashSet::new();
    for a in gaps {
        let Some(sent) = doc.sentence(a.part, a.sentence) else {
            return Err(violation("AZP identifier", format!("{a:?} names a missing sentence")));
        };
        if a.gap > sent.overt_len() {
            return Err(violation("AZP identifier", format!("{a:?} is past the end of its sentence")));
        }
        if !seen.insert(*a) {
            return Err(violation("AZP identifier", format!("{a:?} returned twice")));
        }
    }
    Ok(())
}

/// Candidate clusters for `azp`: every cluster with an overt mention in the
/// same part, represented per `config`.
pub fn candidates(doc: &Document, clusters: &ClusterSet, azp: &Azp, config: &HarnessConfig) -> Vec<Candidate> {
    clusters
        .clusters
        .iter()
        .filter_map(|c| {
            let local = Cluster::new(c.id, c.mentions().filter(|m| m.part == azp.part).map(|m| Member::Mention(*m)).collect());
            let rep = represent_cluster(&local, config.representation, azp).ok()?;
            let features = assemble_azp_features(doc, azp, &rep, &config.embedder, &config.buckets);
            Some(Candidate { cluster_id: c.id, representative: rep, features })
        })
        .collect()
}

/// Resolves overt mentions first, then attaches identified AZPs to the
/// resulting clusters. Overt mentions are never moved.
pub fn run_pipeline(
    doc: &Document,
    coref: &dyn CorefResolver,
    ident: &dyn AzpIdentifier,
    azp_res: &dyn AzpResolver,
    config: &HarnessConfig,
) -> Result<PipelineOutput, HarnessError> {
    check_masked(doc)?;
    let mut clusters = coref.resolve(doc)?;
    check_clusters("coreference resolver", &clusters)?;
    let gaps = ident.identify(doc)?;
    check_gaps(doc, &gaps)?;

    let present: HashSet<Member> = clusters.members().copied().collect();
    let mut diagnostics = PipelineDiagnostics { identified: gaps.len(), ..Default::default() };
    let mut decisions = Vec::new();
    for azp in &gaps {
        if present.contains(&Member::Azp(*azp)) {
            continue;
        }
        let cands = candidates(doc, &clusters, azp, config);
        let choice = if cands.is_empty() { None } else { azp_res.resolve(doc, azp, &cands)? };
        match choice {
            Some(id) if cands.iter().any(|c| c.cluster_id == id) => decisions.push((*azp, id)),
            Some(id) => {
                return Err(violation("AZP resolver", format!("chose cluster {id} for {azp:?}, which was not offered")));
            }
            None => diagnostics.abstained.push(*azp),
        }
    }
    for (azp, id) in decisions {
        clusters.get_mut(id).expect("candidate ids come from clusters").push(Member::Azp(azp));
        diagnostics.attached += 1;
    }
    Ok(PipelineOutput { clusters, diagnostics })
}

/// Training view for the joint model: `*pro*` rows stay in place and count
/// as ordinary mentions.
pub fn run_joint_train_view(doc: &Document) -> Document {
    if !doc.has_pro_rows() {
        log::warn!("{}: no *pro* rows; the joint training view has no AZP mentions", doc.doc_id);
    }
    doc.clone()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointOutput {
    pub clusters: ClusterSet,
    /// The caller's document with `*pro*` rows at the identified gaps.
    pub tagged: Document,
    pub index_map: IndexMap,
    pub gaps: Vec<Azp>,
}

/// Tags AZP gaps as `*pro*` rows on a copy of `doc` and clusters the result.
pub fn run_joint_test(
    doc: &Document,
    ident: &dyn AzpIdentifier,
    coref: &dyn CorefResolver,
    fill: &RowFill,
) -> Result<JointOutput, HarnessError> {
    check_masked(doc)?;
    let mut gaps = ident.identify(doc)?;
    check_gaps(doc, &gaps)?;
    gaps.sort();
    let slots: Vec<(Azp, Option<ChainId>)> = gaps.iter().map(|a| (*a, None)).collect();
    let (tagged, index_map) = insert_pro_rows(doc, &slots, fill)?;
    let clusters = coref.resolve(&tagged)?;
    check_clusters("coreference resolver", &clusters)?;
    let offered: HashSet<Azp> = gaps.iter().copied().collect();
    if let Some(a) = clusters.members().filter_map(Member::as_azp).find(|a| !offered.contains(a)) {
        return Err(violation("coreference resolver", format!("returned {a:?}, which is not a tagged gap")));
    }
    Ok(JointOutput { clusters, tagged, index_map, gaps })
}

/// Clusters that differ between two outputs, compared as member sets so
/// that ids do not matter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterDiff {
    pub common: usize,
    pub only_left: Vec<Vec<Member>>,
    pub only_right: Vec<Vec<Member>>,
}

impl ClusterDiff {
    pub fn between(left: &ClusterSet, right: &ClusterSet) -> Self {
        let l: BTreeSet<Vec<Member>> = left.groups().into_iter().collect();
        let r: BTreeSet<Vec<Member>> = right.groups().into_iter().collect();
        ClusterDiff {
            common: l.intersection(&r).count(),
            only_left: l.difference(&r).cloned().collect(),
            only_right: r.difference(&l).cloned().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::{extract_mentions, parse_conll};
    use crate::merge::strip_azps;

    const EXTENDED: &str = "\
#begin document (ext); part 000
ext 0 0 زيد NNP * - - - - (PERSON) (1)
ext 0 1 وصل VBD * - - - - * -
ext 0 2 . PUNC * - - - - * -

ext 0 0 قال VBD * - - - - * -
ext 0 1 *pro* PRON * - - - - * (1)
ext 0 2 انه IN * - - - - * -
ext 0 3 تعب VBD * - - - - * -
ext 0 4 *pro* PRON * - - - - * (2)
ext 0 5 . PUNC * - - - - * -

ext 0 0 المدير NN * - - - - * (2)
ext 0 1 غاب VBD * - - - - * -

#end document
";

    fn gold_doc() -> Document {
        parse_conll(EXTENDED).unwrap().remove(0)
    }

    #[test]
    fn oracle_pipeline_reproduces_gold() {
        let gold_doc = gold_doc();
        let gold = extract_mentions(&gold_doc);
        let masked = strip_azps(&gold_doc);
        let out = run_pipeline(
            &masked,
            &GoldCoref::new(gold.clone()),
            &GoldAzpIdentifier::new(&gold),
            &GoldAzpResolver::new(&gold),
            &HarnessConfig::default(),
        )
        .unwrap();
        assert_eq!(out.clusters, gold);
        assert_eq!(out.diagnostics.attached, 2);
    }

    #[test]
    fn oracle_joint_reproduces_gold() {
        let gold_doc = gold_doc();
        let gold = extract_mentions(&gold_doc);
        let masked = strip_azps(&gold_doc);
        let out = run_joint_test(&masked, &GoldAzpIdentifier::new(&gold), &GoldCoref::new(gold.clone()), &RowFill::default())
            .unwrap();
        assert_eq!(out.clusters, gold);
        let mut expected = gold_doc.clone();
        for r in expected.parts.iter_mut().flat_map(|p| p.sentences.iter_mut()).flat_map(|s| s.rows.iter_mut()) {
            if r.is_pro() {
                r.coref.clear();
            }
        }
        assert_eq!(out.tagged, expected);
        assert_eq!(masked, strip_azps(&gold_doc), "input untouched");
    }

    #[test]
    fn no_gaps_keeps_coref_output() {
        let masked = strip_azps(&gold_doc());
        let coref = StringMatchCoref::default();
        let none = GoldAzpIdentifier::from_gaps(vec![]);
        let out = run_pipeline(&masked, &coref, &none, &NearestClusterResolver, &HarnessConfig::default()).unwrap();
        assert_eq!(out.clusters, coref.resolve(&masked).unwrap());
        let joint = run_joint_test(&masked, &none, &coref, &RowFill::default()).unwrap();
        assert_eq!(joint.clusters, coref.resolve(&masked).unwrap());
        assert_eq!(joint.tagged, masked);
    }

    #[test]
    fn unmasked_input_is_refused() {
        let d = gold_doc();
        let none = GoldAzpIdentifier::from_gaps(vec![]);
        let r = run_pipeline(&d, &StringMatchCoref::default(), &none, &NearestClusterResolver, &HarnessConfig::default());
        assert!(matches!(r, Err(HarnessError::UnmaskedInput(_))));
    }

    struct Rogue;

    impl AzpResolver for Rogue {
        fn resolve(&self, _: &Document, _: &Azp, _: &[Candidate]) -> Result<Option<ChainId>, ResolverError> {
            Ok(Some(999))
        }
    }

    #[test]
    fn out_of_universe_choice() {
        let gold_doc = gold_doc();
        let gold = extract_mentions(&gold_doc);
        let masked = strip_azps(&gold_doc);
        let r = run_pipeline(
            &masked,
            &GoldCoref::new(gold.clone()),
            &GoldAzpIdentifier::new(&gold),
            &Rogue,
            &HarnessConfig::default(),
        );
        assert!(matches!(r, Err(HarnessError::ResolverContractViolation { .. })));
    }

    #[test]
    fn duplicate_gaps_are_a_violation() {
        let masked = strip_azps(&gold_doc());
        let twice = GoldAzpIdentifier::from_gaps(vec![Azp::new(0, 1, 1), Azp::new(0, 1, 1)]);
        let r = run_joint_test(&masked, &twice, &StringMatchCoref::default(), &RowFill::default());
        assert!(matches!(r, Err(HarnessError::ResolverContractViolation { .. })));
        let past_end = GoldAzpIdentifier::from_gaps(vec![Azp::new(0, 2, 3)]);
        let r = run_joint_test(&masked, &past_end, &StringMatchCoref::default(), &RowFill::default());
        assert!(matches!(r, Err(HarnessError::ResolverContractViolation { .. })));
    }

    #[test]
    fn train_view_is_identity() {
        let d = gold_doc();
        let view = run_joint_train_view(&d);
        assert_eq!(view, d);
        let universe = extract_mentions(&view).member_count();
        assert_eq!(universe, 4);
    }

    #[test]
    fn diff_ignores_ids() {
        let m = |s| Member::Mention(Mention::new(0, s, 0, 0));
        let a = ClusterSet::from_groups([(1, vec![m(0), m(1)]), (2, vec![m(2), m(3)])]);
        let b = ClusterSet::from_groups([(7, vec![m(0), m(1)]), (8, vec![m(2)])]);
        let d = ClusterDiff::between(&a, &b);
        assert_eq!(d.common, 1);
        assert_eq!(d.only_left, vec![vec![m(2), m(3)]]);
        assert!(ClusterDiff::between(&a, &a).is_empty());
    }
}
