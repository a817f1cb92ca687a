use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{AzpIdentifier, AzpResolver, Candidate, CorefResolver, ResolverError};
use crate::conll::{Document, Sentence};
use crate::model::{Azp, ChainId, ClusterSet, Member, Mention};

pub const DEFAULT_VERB_PREFIXES: [&str; 4] = ["VB", "IV", "PV", "V"];

type GapFilter = Arc<dyn Fn(&Azp) -> bool + Send + Sync>;

/// Proposes a gap right after every verb-tagged token.
#[derive(Clone)]
pub struct VerbGapIdentifier {
    pub prefixes: Vec<String>,
    filter: Option<GapFilter>,
}

impl VerbGapIdentifier {
    pub fn new(prefixes: Vec<String>) -> Self {
        VerbGapIdentifier { prefixes, filter: None }
    }

    /// Keeps only candidates the classifier accepts.
    pub fn with_filter(mut self, f: impl Fn(&Azp) -> bool + Send + Sync + 'static) -> Self {
        self.filter = Some(Arc::new(f));
        self
    }

    pub fn is_verb(&self, pos: &str) -> bool {
        self.prefixes.iter().any(|p| pos.starts_with(p.as_str()))
    }
}

impl Default for VerbGapIdentifier {
    fn default() -> Self {
        Self::new(DEFAULT_VERB_PREFIXES.iter().map(|s| s.to_string()).collect())
    }
}

impl fmt::Debug for VerbGapIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VerbGapIdentifier")
            .field("prefixes", &self.prefixes)
            .field("filtered", &self.filter.is_some())
            .finish()
    }
}

impl AzpIdentifier for VerbGapIdentifier {
    fn identify(&self, doc: &Document) -> Result<Vec<Azp>, ResolverError> {
        let mut out = Vec::new();
        for (p, s, sent) in doc.sentences() {
            for (i, row) in sent.overt_rows().enumerate() {
                let azp = Azp::new(p, s, i + 1);
                if self.is_verb(&row.pos) && self.filter.as_ref().map_or(true, |f| f(&azp)) {
                    out.push(azp);
                }
            }
        }
        Ok(out)
    }
}

/// The candidate whose mention ends closest before the AZP in the same
/// part. Ties go to the smaller cluster id.
pub(crate) fn nearest_preceding<I>(azp: &Azp, mentions: I) -> Option<ChainId>
where
    I: IntoIterator<Item = (ChainId, Mention)>,
{
    mentions
        .into_iter()
        .filter(|(_, m)| m.part == azp.part && (m.sentence < azp.sentence || (m.sentence == azp.sentence && m.end < azp.gap)))
        .max_by(|(ia, a), (ib, b)| (a.sentence, a.end).cmp(&(b.sentence, b.end)).then(ib.cmp(ia)))
        .map(|(id, _)| id)
}

/// Attaches an AZP to the cluster whose representative is nearest before it.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestClusterResolver;

impl AzpResolver for NearestClusterResolver {
    fn resolve(&self, _doc: &Document, azp: &Azp, candidates: &[Candidate]) -> Result<Option<ChainId>, ResolverError> {
        Ok(nearest_preceding(azp, candidates.iter().map(|c| (c.cluster_id, c.representative))))
    }
}

/// Named-entity spans with the same surface string form one cluster.
/// When the document has `*pro*` rows, each is attached to the cluster with
/// the nearest preceding mention.
#[derive(Debug, Clone, Copy)]
pub struct StringMatchCoref {
    pub attach_pro: bool,
}

impl Default for StringMatchCoref {
    fn default() -> Self {
        StringMatchCoref { attach_pro: true }
    }
}

fn entity_spans(part: usize, sentence: usize, sent: &Sentence) -> Vec<(Mention, String)> {
    let words: Vec<&str> = sent.overt_rows().map(|r| r.word.as_str()).collect();
    let mut out = Vec::new();
    let mut open: Option<usize> = None;
    for (i, row) in sent.overt_rows().enumerate() {
        let cell = row.named_entity.as_str();
        if cell.starts_with('(') {
            open = Some(i);
        }
        if cell.ends_with(')') {
            if let Some(start) = open.take() {
                let m = Mention::new(part, sentence, start, i);
                out.push((m, words[start..=i].join(" ")));
            }
        }
    }
    out
}

impl CorefResolver for StringMatchCoref {
    fn resolve(&self, doc: &Document) -> Result<ClusterSet, ResolverError> {
        let mut by_text: Vec<(String, Vec<Mention>)> = Vec::new();
        let mut index: BTreeMap<(usize, String), usize> = BTreeMap::new();
        for (p, s, sent) in doc.sentences() {
            for (m, text) in entity_spans(p, s, sent) {
                let slot = *index.entry((p, text.clone())).or_insert_with(|| {
                    by_text.push((text, Vec::new()));
                    by_text.len() - 1
                });
                by_text[slot].1.push(m);
            }
        }
        let groups: Vec<(ChainId, Vec<Member>)> = by_text
            .into_iter()
            .filter(|(_, ms)| ms.len() > 1)
            .enumerate()
            .map(|(i, (_, ms))| (i as ChainId, ms.into_iter().map(Member::Mention).collect()))
            .collect();
        let mut clusters = ClusterSet::from_groups(groups);

        if self.attach_pro {
            let overt: Vec<(ChainId, Mention)> =
                clusters.clusters.iter().flat_map(|c| c.mentions().map(move |m| (c.id, *m))).collect();
            for (p, s, sent) in doc.sentences() {
                for (_, gap) in sent.pro_gaps() {
                    let azp = Azp::new(p, s, gap);
                    if let Some(id) = nearest_preceding(&azp, overt.iter().copied()) {
                        clusters.get_mut(id).expect("id from clusters").push(Member::Azp(azp));
                    }
                }
            }
        }
        Ok(clusters)
    }
}
