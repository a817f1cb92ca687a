use std::collections::{BTreeSet, HashMap, HashSet};

use super::{AzpIdentifier, AzpResolver, Candidate, CorefResolver, ResolverError};
use crate::conll::Document;
use crate::model::{Azp, ChainId, Cluster, ClusterSet, Member};

/// Returns the gold clusters. AZP members are kept only where the document
/// it is given has a `*pro*` row at that gap, so the same oracle serves the
/// masked pipeline input and the tagged joint input.
#[derive(Debug, Clone)]
pub struct GoldCoref {
    gold: ClusterSet,
}

impl GoldCoref {
    pub fn new(gold: ClusterSet) -> Self {
        GoldCoref { gold }
    }
}

impl CorefResolver for GoldCoref {
    fn resolve(&self, doc: &Document) -> Result<ClusterSet, ResolverError> {
        let mut tagged = HashSet::new();
        for (p, s, sent) in doc.sentences() {
            for (_, gap) in sent.pro_gaps() {
                tagged.insert(Azp::new(p, s, gap));
            }
        }
        let clusters = self
            .gold
            .clusters
            .iter()
            .map(|c| {
                let members = c
                    .members
                    .iter()
                    .filter(|m| m.as_azp().map_or(true, |a| tagged.contains(a)))
                    .copied()
                    .collect();
                Cluster::new(c.id, members)
            })
            .filter(|c| !c.is_empty())
            .collect();
        Ok(ClusterSet::new(clusters))
    }
}

#[derive(Debug, Clone)]
pub struct GoldAzpIdentifier {
    gaps: Vec<Azp>,
}

impl GoldAzpIdentifier {
    pub fn new(gold: &ClusterSet) -> Self {
        let gaps: BTreeSet<Azp> = gold.members().filter_map(Member::as_azp).copied().collect();
        GoldAzpIdentifier { gaps: gaps.into_iter().collect() }
    }

    pub fn from_gaps(gaps: Vec<Azp>) -> Self {
        GoldAzpIdentifier { gaps }
    }
}

impl AzpIdentifier for GoldAzpIdentifier {
    fn identify(&self, _doc: &Document) -> Result<Vec<Azp>, ResolverError> {
        Ok(self.gaps.clone())
    }
}

/// Picks the gold cluster when it is among the candidates.
#[derive(Debug, Clone)]
pub struct GoldAzpResolver {
    gold: HashMap<Azp, ChainId>,
}

impl GoldAzpResolver {
    pub fn new(gold: &ClusterSet) -> Self {
        GoldAzpResolver { gold: gold.azp_records().into_iter().collect() }
    }
}

impl AzpResolver for GoldAzpResolver {
    fn resolve(&self, _doc: &Document, azp: &Azp, candidates: &[Candidate]) -> Result<Option<ChainId>, ResolverError> {
        Ok(self.gold.get(azp).copied().filter(|id| candidates.iter().any(|c| c.cluster_id == *id)))
    }
}
