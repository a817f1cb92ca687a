//! Mentions, zero-pronoun gaps and clusters.
//!
//! All token coordinates count *overt* tokens only: `*pro*` rows are
//! skipped when numbering. A mention therefore keeps the same coordinates
//! whether or not zero pronouns have been inserted into its sentence, and
//! an AZP is addressed by the overt token that follows its gap.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub type ChainId = u32;

/// A realized span, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub part: usize,
    pub sentence: usize,
    pub start: usize,
    pub end: usize,
}

impl Mention {
    pub fn new(part: usize, sentence: usize, start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Mention { part, sentence, start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// An anaphoric zero pronoun: the gap before overt token `gap`
/// (`gap == sentence length` for a sentence-final gap).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Azp {
    pub part: usize,
    pub sentence: usize,
    pub gap: usize,
}

impl Azp {
    pub fn new(part: usize, sentence: usize, gap: usize) -> Self {
        Azp { part, sentence, gap }
    }
}

/// A cluster member: either an overt mention or a zero pronoun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Member {
    Mention(Mention),
    Azp(Azp),
}

impl Member {
    pub fn part(&self) -> usize {
        match self {
            Member::Mention(m) => m.part,
            Member::Azp(a) => a.part,
        }
    }

    pub fn sentence(&self) -> usize {
        match self {
            Member::Mention(m) => m.sentence,
            Member::Azp(a) => a.sentence,
        }
    }

    pub fn is_azp(&self) -> bool {
        matches!(self, Member::Azp(_))
    }

    pub fn as_mention(&self) -> Option<&Mention> {
        match self {
            Member::Mention(m) => Some(m),
            Member::Azp(_) => None,
        }
    }

    pub fn as_azp(&self) -> Option<&Azp> {
        match self {
            Member::Azp(a) => Some(a),
            Member::Mention(_) => None,
        }
    }

    // A gap sits before the token it is addressed by, so an AZP sorts ahead
    // of a mention starting at the same index.
    fn order_key(&self) -> (usize, usize, usize, u8, usize) {
        match self {
            Member::Azp(a) => (a.part, a.sentence, a.gap, 0, 0),
            Member::Mention(m) => (m.part, m.sentence, m.start, 1, m.end),
        }
    }
}

impl PartialOrd for Member {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Member {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl From<Mention> for Member {
    fn from(m: Mention) -> Self {
        Member::Mention(m)
    }
}

impl From<Azp> for Member {
    fn from(a: Azp) -> Self {
        Member::Azp(a)
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Member::Mention(m) => write!(f, "{}:{}:{}-{}", m.part, m.sentence, m.start, m.end),
            Member::Azp(a) => write!(f, "{}:{}:^{}", a.part, a.sentence, a.gap),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ChainId,
    pub members: Vec<Member>,
}

impl Cluster {
    /// Builds a cluster with members in document order.
    pub fn new(id: ChainId, mut members: Vec<Member>) -> Self {
        members.sort();
        members.dedup();
        Cluster { id, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mentions(&self) -> impl Iterator<Item = &Mention> {
        self.members.iter().filter_map(Member::as_mention)
    }

    pub fn azps(&self) -> impl Iterator<Item = &Azp> {
        self.members.iter().filter_map(Member::as_azp)
    }

    pub fn push(&mut self, member: Member) {
        if let Err(pos) = self.members.binary_search(&member) {
            self.members.insert(pos, member);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterSetError {
    #[error("cluster id {0} used twice")]
    DuplicateId(ChainId),
    #[error("member {member} occurs in clusters {first} and {second}")]
    SharedMember { member: Member, first: ChainId, second: ChainId },
    #[error("cluster {0} is empty")]
    EmptyCluster(ChainId),
}

/// Document-level partition of mentions and AZPs into entities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
}

impl ClusterSet {
    pub fn new(mut clusters: Vec<Cluster>) -> Self {
        clusters.sort_by_key(|c| c.id);
        ClusterSet { clusters }
    }

    pub fn from_groups<I>(groups: I) -> Self
    where
        I: IntoIterator<Item = (ChainId, Vec<Member>)>,
    {
        ClusterSet::new(groups.into_iter().map(|(id, m)| Cluster::new(id, m)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn get(&self, id: ChainId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn get_mut(&mut self, id: ChainId) -> Option<&mut Cluster> {
        self.clusters.iter_mut().find(|c| c.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = ChainId> + '_ {
        self.clusters.iter().map(|c| c.id)
    }

    pub fn max_id(&self) -> Option<ChainId> {
        self.ids().max()
    }

    pub fn members(&self) -> impl Iterator<Item = &Member> {
        self.clusters.iter().flat_map(|c| c.members.iter())
    }

    pub fn member_count(&self) -> usize {
        self.clusters.iter().map(Cluster::len).sum()
    }

    /// Member → owning cluster id.
    pub fn index(&self) -> HashMap<Member, ChainId> {
        let mut idx = HashMap::new();
        for c in &self.clusters {
            for m in &c.members {
                idx.entry(*m).or_insert(c.id);
            }
        }
        idx
    }

    /// Checks the partition property: unique ids, non-empty clusters, and
    /// no member shared between clusters.
    pub fn validate(&self) -> Result<(), ClusterSetError> {
        let mut ids = HashSet::new();
        let mut owner: HashMap<Member, ChainId> = HashMap::new();
        for c in &self.clusters {
            if !ids.insert(c.id) {
                return Err(ClusterSetError::DuplicateId(c.id));
            }
            if c.members.is_empty() {
                return Err(ClusterSetError::EmptyCluster(c.id));
            }
            for m in &c.members {
                if let Some(first) = owner.insert(*m, c.id) {
                    if first != c.id {
                        return Err(ClusterSetError::SharedMember { member: *m, first, second: c.id });
                    }
                }
            }
        }
        Ok(())
    }

    /// Keeps only members accepted by `keep`; clusters left empty are dropped.
    pub fn filter_members<F>(&self, mut keep: F) -> ClusterSet
    where
        F: FnMut(&Member) -> bool,
    {
        let clusters = self
            .clusters
            .iter()
            .filter_map(|c| {
                let members: Vec<Member> = c.members.iter().copied().filter(|m| keep(m)).collect();
                (!members.is_empty()).then_some(Cluster { id: c.id, members })
            })
            .collect();
        ClusterSet { clusters }
    }

    pub fn without_azps(&self) -> ClusterSet {
        self.filter_members(|m| !m.is_azp())
    }

    /// Splits every cluster by document part. Parts are scored as
    /// independent texts, so a chain id reused across parts becomes one
    /// cluster per part.
    pub fn split_by_part(&self) -> BTreeMap<usize, ClusterSet> {
        let mut out: BTreeMap<usize, Vec<Cluster>> = BTreeMap::new();
        for c in &self.clusters {
            let mut by_part: BTreeMap<usize, Vec<Member>> = BTreeMap::new();
            for m in &c.members {
                by_part.entry(m.part()).or_default().push(*m);
            }
            for (part, members) in by_part {
                out.entry(part).or_default().push(Cluster { id: c.id, members });
            }
        }
        out.into_iter().map(|(p, cs)| (p, ClusterSet::new(cs))).collect()
    }

    /// All AZP members paired with their cluster id, in document order.
    pub fn azp_records(&self) -> Vec<(Azp, ChainId)> {
        let mut out: Vec<(Azp, ChainId)> = self
            .clusters
            .iter()
            .flat_map(|c| c.azps().map(move |a| (*a, c.id)))
            .collect();
        out.sort();
        out
    }

    /// Plain member lists, the shape the metrics work on.
    pub fn groups(&self) -> Vec<Vec<Member>> {
        self.clusters.iter().map(|c| c.members.clone()).collect()
    }
}
