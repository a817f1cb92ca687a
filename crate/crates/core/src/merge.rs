//! Builds extended CoNLL documents by injecting ONF zero pronouns as
//! `*pro*` rows.
//!
//! For every IDENT chain with zero members:
//!
//! * if its overt members already form a CoNLL chain, each zero pronoun
//!   joins that chain id;
//! * if it has exactly one overt member (a singleton dropped from CoNLL),
//!   a new chain is created holding that mention and the zero pronouns.
//!
//! Anything else is written to the reject log rather than guessed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::conll::{encode_mentions, extract_mentions, CorefTag, Document, EncodeError, Sentence, TokenRow, PRO_MARKER};
use crate::model::{Azp, ChainId, ClusterSet, Member, Mention};
use crate::onf::{ChainKind, OnfChain, OnfChainMember, OnfCoordinate, OnfDocument};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MergeError {
    #[error("ONF document {onf:?} does not match CoNLL document {conll:?}")]
    DocumentIdMismatch { onf: String, conll: String },
    #[error("plan was made for a different version of {0:?}")]
    StalePlan(String),
    #[error("gap {gap} is outside part {part} sentence {sentence}")]
    InvalidGap { part: usize, sentence: usize, gap: usize },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Basename of a document id without extension, used to pair `.onf`
/// files with CoNLL documents.
pub fn doc_key(doc_id: &str) -> &str {
    let base = doc_id.rsplit('/').next().unwrap_or(doc_id);
    base.split('.').next().unwrap_or(base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignQuality {
    /// Coordinates and surface text agree.
    Exact,
    /// Coordinates were off; the surface text was found elsewhere in the sentence.
    SurfaceSearch,
    /// Coordinates are in range but the surface could not be confirmed
    /// (absent, truncated, or not found).
    Positional,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aligned {
    Span { mention: Mention, quality: AlignQuality },
    Gap(Azp),
    Unaligned { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentEntry {
    pub chain_id: ChainId,
    pub part: usize,
    pub coordinate: OnfCoordinate,
    pub is_azp: bool,
    pub aligned: Aligned,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub entries: Vec<AlignmentEntry>,
}

impl Alignment {
    pub fn for_chain(&self, chain_id: ChainId, part: usize) -> impl Iterator<Item = &AlignmentEntry> {
        self.entries.iter().filter(move |e| e.chain_id == chain_id && e.part == part)
    }
}

fn check_ids(onf: &OnfDocument, conll: &Document) -> Result<(), MergeError> {
    if onf.doc_id.is_empty() || doc_key(&onf.doc_id) == doc_key(&conll.doc_id) {
        return Ok(());
    }
    Err(MergeError::DocumentIdMismatch { onf: onf.doc_id.clone(), conll: conll.doc_id.clone() })
}

/// Zero markers counted per (part, sentence), as ONF word positions.
fn marker_positions(onf: &OnfDocument) -> HashMap<(usize, usize), BTreeSet<usize>> {
    let mut out: HashMap<(usize, usize), BTreeSet<usize>> = HashMap::new();
    for chain in &onf.chains {
        for m in chain.azp_members() {
            out.entry((chain.part, m.coordinate.sentence)).or_default().insert(m.coordinate.start);
        }
    }
    out
}

/// Maps every ONF chain member onto the CoNLL document.
///
/// ONF word indices count zero markers, CoNLL rows do not, so an index is
/// shifted left by the number of markers before it in the same sentence.
/// A zero member maps to the gap before the overt token that follows it.
pub fn align(onf: &OnfDocument, conll: &Document) -> Result<Alignment, MergeError> {
    check_ids(onf, conll)?;
    let markers = marker_positions(onf);
    let mut entries = Vec::new();
    for chain in &onf.chains {
        for member in &chain.members {
            let aligned = align_member(chain, member, conll, &markers);
            entries.push(AlignmentEntry {
                chain_id: chain.chain_id,
                part: chain.part,
                coordinate: member.coordinate,
                is_azp: member.is_azp,
                aligned,
            });
        }
    }
    Ok(Alignment { entries })
}

fn align_member(
    chain: &OnfChain,
    member: &OnfChainMember,
    conll: &Document,
    markers: &HashMap<(usize, usize), BTreeSet<usize>>,
) -> Aligned {
    let coord = member.coordinate;
    let Some(sent) = conll.sentence(chain.part, coord.sentence) else {
        return Aligned::Unaligned {
            reason: format!("sentence {} of part {} is not in the document", coord.sentence, chain.part),
        };
    };
    let empty = BTreeSet::new();
    let before = |i: usize| markers.get(&(chain.part, coord.sentence)).unwrap_or(&empty).range(..i).count();
    let words: Vec<&str> = sent.overt_rows().map(|r| r.word.as_str()).collect();

    if member.is_azp {
        let gap = coord.start - before(coord.start);
        if gap > words.len() {
            return Aligned::Unaligned { reason: format!("gap {gap} beyond sentence length {}", words.len()) };
        }
        return Aligned::Gap(Azp::new(chain.part, coord.sentence, gap));
    }

    let start = coord.start - before(coord.start);
    let end = coord.end - before(coord.end);
    let in_range = end < words.len();
    let surface: Vec<&str> = member.surface_tokens().into_iter().filter(|t| !crate::onf::is_zero_marker(t)).collect();
    let mention = |s: usize, e: usize| Mention::new(chain.part, coord.sentence, s, e);

    // listings may truncate long texts; only a complete surface is trusted
    if surface.len() == coord.width() - (before(coord.end + 1) - before(coord.start)) {
        if in_range && words[start..=end] == surface[..] {
            return Aligned::Span { mention: mention(start, end), quality: AlignQuality::Exact };
        }
        let hits: Vec<usize> = (0..words.len().saturating_sub(surface.len() - 1))
            .filter(|&i| words[i..i + surface.len()] == surface[..])
            .collect();
        if let Some(&best) = hits.iter().min_by_key(|&&i| i.abs_diff(start)) {
            return Aligned::Span {
                mention: mention(best, best + surface.len() - 1),
                quality: AlignQuality::SurfaceSearch,
            };
        }
    }
    if in_range {
        return Aligned::Span { mention: mention(start, end), quality: AlignQuality::Positional };
    }
    Aligned::Unaligned {
        reason: format!("span {start}-{end} beyond sentence length {}", words.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExistingChain,
    NewChain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub azp: Azp,
    pub chain_id: ChainId,
    pub provenance: Provenance,
    pub onf_chain: ChainId,
}

/// Coreference brackets to add to overt tokens when a new chain is made.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionTag {
    pub mention: Mention,
    pub chain_id: ChainId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum RejectReason {
    UnalignableMember { detail: String },
    AzpOnlyChain,
    AmbiguousChainMatch { chains: Vec<ChainId> },
    UnmatchedChain { overt_members: usize },
    GapOccupied { by_chain: ChainId },
}

/// One skipped zero pronoun, as written to the reject log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub doc_id: String,
    pub part: usize,
    pub onf_chain: ChainId,
    pub coordinate: String,
    #[serde(flatten)]
    pub reason: RejectReason,
}

/// Old word number → new word number for every sentence that gains rows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexMap {
    pub sentences: BTreeMap<String, Vec<(usize, usize)>>,
}

impl IndexMap {
    fn key(part: usize, sentence: usize) -> String {
        format!("{part}:{sentence}")
    }

    /// New word number of the row originally numbered `word_number`.
    /// Sentences without insertions map to themselves.
    pub fn get(&self, part: usize, sentence: usize, word_number: usize) -> usize {
        self.sentences
            .get(&Self::key(part, sentence))
            .and_then(|v| v.iter().find(|(old, _)| *old == word_number))
            .map_or(word_number, |&(_, new)| new)
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub doc_id: String,
    pub fingerprint: u64,
    pub insertions: Vec<Insertion>,
    pub new_mentions: Vec<MentionTag>,
    pub index_map: IndexMap,
    pub rejects: Vec<Reject>,
    /// Zero pronouns already present in the document.
    pub already_present: usize,
}

impl MergePlan {
    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty() && self.new_mentions.is_empty()
    }

    pub fn new_chain_ids(&self) -> BTreeSet<ChainId> {
        self.new_mentions.iter().map(|m| m.chain_id).collect()
    }
}

/// Column values of an inserted `*pro*` row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowFill {
    pub pos: String,
}

impl RowFill {
    pub const DEFAULT_POS: &'static str = "PRON";

    /// Reuses the POS of `*pro*` rows already in `doc`, if there are any.
    pub fn for_document(doc: &Document) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in doc.rows().filter(|r| r.is_pro()) {
            *counts.entry(r.pos.as_str()).or_default() += 1;
        }
        let pos = counts
            .into_iter()
            .max_by_key(|&(_, n)| n)
            .map_or(Self::DEFAULT_POS, |(p, _)| p)
            .to_string();
        RowFill { pos }
    }

    fn row(&self, neighbour: &TokenRow, chain: Option<ChainId>) -> TokenRow {
        TokenRow {
            doc_id: neighbour.doc_id.clone(),
            part_number: neighbour.part_number,
            word_number: 0,
            word: PRO_MARKER.to_string(),
            pos: self.pos.clone(),
            parse_bit: "*".to_string(),
            lemma: "-".to_string(),
            frameset_id: "-".to_string(),
            word_sense: "-".to_string(),
            speaker: neighbour.speaker.clone(),
            named_entity: "*".to_string(),
            arguments: vec!["*".to_string(); neighbour.arguments.len()],
            coref: chain.map(CorefTag::single).into_iter().collect(),
        }
    }
}

impl Default for RowFill {
    fn default() -> Self {
        RowFill { pos: Self::DEFAULT_POS.to_string() }
    }
}

pub fn fingerprint(doc: &Document) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    doc.hash(&mut h);
    h.finish()
}

/// Decides where each ONF zero pronoun goes and which chain it joins.
pub fn plan_merge(onf: &OnfDocument, conll: &Document) -> Result<MergePlan, MergeError> {
    let alignment = align(onf, conll)?;
    let existing = extract_mentions(conll);
    let owner = existing.index();
    let mut present: HashMap<Azp, ChainId> = HashMap::new();
    for (azp, id) in existing.azp_records() {
        present.entry(azp).or_insert(id);
    }
    let mut used: BTreeSet<ChainId> = conll.chain_ids();
    let mut planned: HashMap<Azp, ChainId> = HashMap::new();

    let mut insertions = Vec::new();
    let mut new_mentions = Vec::new();
    let mut rejects = Vec::new();
    let mut already_present = 0;

    for chain in onf.chains.iter().filter(|c| c.kind == ChainKind::Ident) {
        let entries: Vec<&AlignmentEntry> = alignment.for_chain(chain.chain_id, chain.part).collect();
        let zeros: Vec<&AlignmentEntry> = entries.iter().copied().filter(|e| e.is_azp).collect();
        if zeros.is_empty() {
            continue;
        }
        let overt: Vec<&AlignmentEntry> = entries.iter().copied().filter(|e| !e.is_azp).collect();
        let reject_all = |reason: RejectReason, rejects: &mut Vec<Reject>| {
            for z in &zeros {
                rejects.push(Reject {
                    doc_id: conll.doc_id.clone(),
                    part: chain.part,
                    onf_chain: chain.chain_id,
                    coordinate: z.coordinate.to_string(),
                    reason: reason.clone(),
                });
            }
        };

        if overt.is_empty() {
            log::warn!("{}: chain {} has only zero members; skipped", conll.doc_id, chain.chain_id);
            reject_all(RejectReason::AzpOnlyChain, &mut rejects);
            continue;
        }

        let mut spans = Vec::new();
        let mut failure = None;
        for e in &overt {
            match &e.aligned {
                Aligned::Span { mention, .. } => spans.push(*mention),
                Aligned::Unaligned { reason } => {
                    failure = Some(format!("{}: {}", e.coordinate, reason));
                    break;
                }
                Aligned::Gap(_) => unreachable!("overt member aligned to a gap"),
            }
        }
        if let Some(detail) = failure {
            reject_all(RejectReason::UnalignableMember { detail }, &mut rejects);
            continue;
        }

        let matched: BTreeSet<ChainId> = spans.iter().filter_map(|m| owner.get(&Member::Mention(*m)).copied()).collect();
        let (target, provenance) = match matched.len() {
            1 => (*matched.iter().next().unwrap(), Provenance::ExistingChain),
            0 if spans.len() == 1 => {
                let id = if used.contains(&chain.chain_id) {
                    used.iter().next_back().map_or(0, |m| m + 1)
                } else {
                    chain.chain_id
                };
                (id, Provenance::NewChain)
            }
            0 => {
                reject_all(RejectReason::UnmatchedChain { overt_members: spans.len() }, &mut rejects);
                continue;
            }
            _ => {
                reject_all(RejectReason::AmbiguousChainMatch { chains: matched.into_iter().collect() }, &mut rejects);
                continue;
            }
        };

        let mut chain_insertions = Vec::new();
        for z in &zeros {
            let reject = |reason| Reject {
                doc_id: conll.doc_id.clone(),
                part: chain.part,
                onf_chain: chain.chain_id,
                coordinate: z.coordinate.to_string(),
                reason,
            };
            let azp = match &z.aligned {
                Aligned::Gap(azp) => *azp,
                Aligned::Unaligned { reason } => {
                    rejects.push(reject(RejectReason::UnalignableMember { detail: reason.clone() }));
                    continue;
                }
                Aligned::Span { .. } => unreachable!("zero member aligned to a span"),
            };
            match present.get(&azp).or_else(|| planned.get(&azp)) {
                Some(&id) if id == target && present.contains_key(&azp) => {
                    already_present += 1;
                    continue;
                }
                Some(&id) => {
                    rejects.push(reject(RejectReason::GapOccupied { by_chain: id }));
                    continue;
                }
                None => {}
            }
            planned.insert(azp, target);
            chain_insertions.push(Insertion { azp, chain_id: target, provenance, onf_chain: chain.chain_id });
        }

        if provenance == Provenance::NewChain {
            if chain_insertions.is_empty() {
                continue;
            }
            used.insert(target);
            new_mentions.push(MentionTag { mention: spans[0], chain_id: target });
        }
        insertions.extend(chain_insertions);
    }

    insertions.sort_by_key(|i| i.azp);
    let gaps: Vec<Azp> = insertions.iter().map(|i| i.azp).collect();
    let index_map = index_map_for(conll, &gaps);
    Ok(MergePlan {
        doc_id: conll.doc_id.clone(),
        fingerprint: fingerprint(conll),
        insertions,
        new_mentions,
        index_map,
        rejects,
        already_present,
    })
}

fn index_map_for(doc: &Document, gaps: &[Azp]) -> IndexMap {
    let mut by_sentence: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for a in gaps {
        by_sentence.entry((a.part, a.sentence)).or_default().push(a.gap);
    }
    let mut map = IndexMap::default();
    for ((p, s), gaps) in by_sentence {
        let Some(sent) = doc.sentence(p, s) else { continue };
        let base = sent.numbering_base();
        let mut pairs = Vec::with_capacity(sent.rows.len());
        let mut overt = 0;
        let mut shift = 0;
        for row in &sent.rows {
            if !row.is_pro() {
                shift += gaps.iter().filter(|&&g| g == overt).count();
                overt += 1;
            }
            let old_index = pairs.len();
            pairs.push((row.word_number, base + old_index + shift));
        }
        map.sentences.insert(IndexMap::key(p, s), pairs);
    }
    map
}

/// Inserts a `*pro*` row at each gap, tagged with the given chain if any.
/// New rows go after any `*pro*` rows already at the same gap; every
/// touched sentence is renumbered from its original base.
pub fn insert_pro_rows(
    doc: &Document,
    gaps: &[(Azp, Option<ChainId>)],
    fill: &RowFill,
) -> Result<(Document, IndexMap), MergeError> {
    let mut out = doc.clone();
    let mut by_sentence: BTreeMap<(usize, usize), Vec<(usize, Option<ChainId>)>> = BTreeMap::new();
    for (a, chain) in gaps {
        by_sentence.entry((a.part, a.sentence)).or_default().push((a.gap, *chain));
    }
    for (&(p, s), items) in &by_sentence {
        let invalid = |gap| MergeError::InvalidGap { part: p, sentence: s, gap };
        let sent: &mut Sentence = out
            .parts
            .get_mut(p)
            .and_then(|part| part.sentences.get_mut(s))
            .ok_or_else(|| invalid(items[0].0))?;
        let overt_len = sent.overt_len();
        if let Some(&(gap, _)) = items.iter().find(|(g, _)| *g > overt_len) {
            return Err(invalid(gap));
        }
        let base = sent.numbering_base();
        let old = std::mem::take(&mut sent.rows);
        let mut rows = Vec::with_capacity(old.len() + items.len());
        let mut overt = 0;
        for row in old.iter() {
            if !row.is_pro() {
                for (_, chain) in items.iter().filter(|(g, _)| *g == overt) {
                    rows.push(fill.row(row, *chain));
                }
                overt += 1;
            }
            rows.push(row.clone());
        }
        let last = old.last().expect("sentences are non-empty");
        for (_, chain) in items.iter().filter(|(g, _)| *g == overt) {
            rows.push(fill.row(last, *chain));
        }
        sent.rows = rows;
        sent.renumber(base);
    }
    let gap_list: Vec<Azp> = gaps.iter().map(|(a, _)| *a).collect();
    Ok((out, index_map_for(doc, &gap_list)))
}

pub fn apply_merge(plan: &MergePlan, conll: &Document) -> Result<Document, MergeError> {
    apply_merge_with(plan, conll, &RowFill::for_document(conll))
}

pub fn apply_merge_with(plan: &MergePlan, conll: &Document, fill: &RowFill) -> Result<Document, MergeError> {
    if plan.doc_id != conll.doc_id || plan.fingerprint != fingerprint(conll) {
        return Err(MergeError::StalePlan(conll.doc_id.clone()));
    }
    let gaps: Vec<(Azp, Option<ChainId>)> = plan.insertions.iter().map(|i| (i.azp, Some(i.chain_id))).collect();
    let (mut out, _) = insert_pro_rows(conll, &gaps, fill)?;
    for tag in &plan.new_mentions {
        let m = tag.mention;
        let sent = out
            .parts
            .get_mut(m.part)
            .and_then(|p| p.sentences.get_mut(m.sentence))
            .ok_or(MergeError::InvalidGap { part: m.part, sentence: m.sentence, gap: m.start })?;
        let rows = sent.overt_row_indices();
        let (Some(&first), Some(&last)) = (rows.get(m.start), rows.get(m.end)) else {
            return Err(MergeError::InvalidGap { part: m.part, sentence: m.sentence, gap: m.end });
        };
        if first == last {
            sent.rows[first].coref.push(CorefTag::single(tag.chain_id));
        } else {
            sent.rows[first].coref.push(CorefTag::open(tag.chain_id));
            sent.rows[last].coref.push(CorefTag::close(tag.chain_id));
        }
    }
    Ok(out)
}

/// Undoes [`apply_merge`]: drops the inserted rows and the brackets of the
/// chains the plan created, then restores the original word numbers.
pub fn strip_merge(merged: &Document, plan: &MergePlan) -> Document {
    let mut out = merged.clone();
    let new_ids = plan.new_chain_ids();
    for (p, part) in out.parts.iter_mut().enumerate() {
        for (s, sent) in part.sentences.iter_mut().enumerate() {
            if let Some(pairs) = plan.index_map.sentences.get(&IndexMap::key(p, s)) {
                let back: HashMap<usize, usize> = pairs.iter().map(|&(old, new)| (new, old)).collect();
                sent.rows.retain(|r| back.contains_key(&r.word_number));
                for r in &mut sent.rows {
                    r.word_number = back[&r.word_number];
                }
            }
            for r in &mut sent.rows {
                for id in &new_ids {
                    for boundary in [crate::conll::Boundary::Open, crate::conll::Boundary::Close, crate::conll::Boundary::OpenAndClose] {
                        if let Some(k) = r.coref.iter().rposition(|t| t.chain_id == *id && t.boundary == boundary) {
                            r.coref.remove(k);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Removes every `*pro*` row and renumbers touched sentences from their base.
/// Brackets on overt tokens are left alone.
pub fn strip_azps(doc: &Document) -> Document {
    let mut out = doc.clone();
    for sent in out.parts.iter_mut().flat_map(|p| p.sentences.iter_mut()) {
        if sent.rows.iter().any(TokenRow::is_pro) {
            let base = sent.numbering_base();
            sent.rows.retain(|r| !r.is_pro());
            sent.renumber(base);
        }
    }
    out
}

/// Writes `clusters` into `doc`: existing `*pro*` rows are dropped, one is
/// inserted for every AZP member, and every coreference cell is rewritten.
pub fn materialize(doc: &Document, clusters: &ClusterSet, fill: &RowFill) -> Result<Document, MergeError> {
    let masked = strip_azps(doc);
    let gaps: Vec<(Azp, Option<ChainId>)> = clusters.members().filter_map(Member::as_azp).map(|a| (*a, None)).collect();
    let (tagged, _) = insert_pro_rows(&masked, &gaps, fill)?;
    Ok(encode_mentions(clusters, &tagged)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    /// Overt tokens; `*pro*` rows are not words.
    pub words: usize,
    pub azps: usize,
}

impl Add for CorpusStats {
    type Output = CorpusStats;

    fn add(self, o: CorpusStats) -> CorpusStats {
        CorpusStats {
            documents: self.documents + o.documents,
            sentences: self.sentences + o.sentences,
            words: self.words + o.words,
            azps: self.azps + o.azps,
        }
    }
}

impl std::iter::Sum for CorpusStats {
    fn sum<I: Iterator<Item = CorpusStats>>(iter: I) -> Self {
        iter.fold(CorpusStats::default(), Add::add)
    }
}

pub fn corpus_stats(docs: &[Document]) -> CorpusStats {
    docs.iter()
        .map(|d| {
            let azps = d.pro_count();
            CorpusStats {
                documents: 1,
                sentences: d.sentence_count(),
                words: d.rows().count() - azps,
                azps,
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::{parse_conll, write_conll};
    use crate::onf::parse_onf;

    const TABLE2: &str = "\
#begin document (t2); part 000
t2 0 0 كانا VBD (TOP(S(VP* كان 01 - - * (V*) -
t2 0 1 في IN (PP* - - - - * (ARG1* -
t2 0 2 الوضع DT+NN (NP* - - - - * * -
t2 0 3 نفسه NN *)))) - - - - * *) -

#end document
";

    fn doc(text: &str) -> Document {
        parse_conll(text).unwrap().remove(0)
    }

    #[test]
    fn inserted_row_after_first_token() {
        let d = doc(TABLE2);
        let (out, map) = insert_pro_rows(&d, &[(Azp::new(0, 0, 1), Some(3))], &RowFill::default()).unwrap();
        let words: Vec<&str> = out.parts[0].sentences[0].rows.iter().map(|r| r.word.as_str()).collect();
        assert_eq!(words, vec!["كانا", "*pro*", "في", "الوضع", "نفسه"]);
        let pro = &out.parts[0].sentences[0].rows[1];
        assert_eq!(pro.word_number, 1);
        assert_eq!(pro.pos, "PRON");
        assert_eq!(pro.parse_bit, "*");
        assert_eq!(pro.arguments, vec!["*"]);
        assert_eq!(pro.coref, vec![CorefTag::single(3)]);
        assert_eq!(map.get(0, 0, 0), 0);
        assert_eq!(map.get(0, 0, 1), 2);
        assert_eq!(map.get(0, 0, 3), 4);
        // still a valid file
        let text = write_conll(&[out.clone()]).unwrap();
        assert_eq!(parse_conll(&text).unwrap(), vec![out]);
    }

    #[test]
    fn two_insertions_in_one_sentence() {
        // 5-token sentence, zeros before token 1 and at the end
        let text = "\
#begin document (t); part 000
t 0 0 a VBD * - - - - * -
t 0 1 b NN * - - - - * -
t 0 2 c VBD * - - - - * -
t 0 3 d NN * - - - - * -
t 0 4 e NN * - - - - * -

#end document
";
        let d = doc(text);
        let gaps = [(Azp::new(0, 0, 1), Some(1)), (Azp::new(0, 0, 5), Some(2))];
        let (out, map) = insert_pro_rows(&d, &gaps, &RowFill::default()).unwrap();
        let rows: Vec<(usize, &str)> = out.parts[0].sentences[0]
            .rows
            .iter()
            .map(|r| (r.word_number, r.word.as_str()))
            .collect();
        assert_eq!(
            rows,
            vec![(0, "a"), (1, "*pro*"), (2, "b"), (3, "c"), (4, "d"), (5, "e"), (6, "*pro*")]
        );
        let expected_map: Vec<(usize, usize)> = vec![(0, 0), (1, 2), (2, 3), (3, 4), (4, 5)];
        assert_eq!(map.sentences["0:0"], expected_map);
        let clusters = extract_mentions(&out);
        assert_eq!(clusters.get(1).unwrap().members, vec![Member::Azp(Azp::new(0, 0, 1))]);
        assert_eq!(clusters.get(2).unwrap().members, vec![Member::Azp(Azp::new(0, 0, 5))]);
    }

    #[test]
    fn one_based_numbering_is_kept() {
        let text = "#begin document (t); part 000\nt 0 1 a VBD * - - - - * -\nt 0 2 b NN * - - - - * -\n\n#end document\n";
        let (out, _) = insert_pro_rows(&doc(text), &[(Azp::new(0, 0, 1), None)], &RowFill::default()).unwrap();
        let nums: Vec<usize> = out.parts[0].sentences[0].rows.iter().map(|r| r.word_number).collect();
        assert_eq!(nums, vec![1, 2, 3]);
    }

    #[test]
    fn gap_beyond_sentence() {
        let err = insert_pro_rows(&doc(TABLE2), &[(Azp::new(0, 0, 5), None)], &RowFill::default());
        assert!(matches!(err, Err(MergeError::InvalidGap { gap: 5, .. })));
    }

    #[test]
    fn empty_plan_is_identity() {
        let d = doc(TABLE2);
        let plan = plan_merge(&parse_onf("").unwrap(), &d).unwrap();
        assert!(plan.is_empty());
        assert_eq!(apply_merge(&plan, &d).unwrap(), d);
    }

    #[test]
    fn stale_plan() {
        let d = doc(TABLE2);
        let plan = plan_merge(&parse_onf("").unwrap(), &d).unwrap();
        let mut changed = d.clone();
        changed.parts[0].sentences[0].rows[0].word = "x".into();
        assert!(matches!(apply_merge(&plan, &changed), Err(MergeError::StalePlan(_))));
    }

    #[test]
    fn marker_offset_is_subtracted() {
        // ONF words: a b * c d ; member 0.3-4 is "c d" = CoNLL tokens 2..3
        let d = doc("\
#begin document (t); part 000
t 0 0 a NN * - - - - * -
t 0 1 b VBD * - - - - * -
t 0 2 c NN * - - - - * -
t 0 3 d NN * - - - - * -

#end document
");
        let onf = parse_onf("Chain 5 (IDENT)\n    0.0-0   a\n    0.2-2   *\n    0.3-4   c d\n").unwrap();
        let al = align(&onf, &d).unwrap();
        assert_eq!(
            al.entries[2].aligned,
            Aligned::Span { mention: Mention::new(0, 0, 2, 3), quality: AlignQuality::Exact }
        );
        assert_eq!(al.entries[1].aligned, Aligned::Gap(Azp::new(0, 0, 2)));
    }

    #[test]
    fn moved_surface_is_found() {
        let d = doc("\
#begin document (t); part 000
t 0 0 a NN * - - - - * -
t 0 1 b VBD * - - - - * -
t 0 2 c NN * - - - - * -
t 0 3 d NN * - - - - * -

#end document
");
        let onf = parse_onf("Chain 5 (IDENT)\n    0.2-3   b c\n    0.0-0   a\n").unwrap();
        let al = align(&onf, &d).unwrap();
        assert_eq!(
            al.entries[0].aligned,
            Aligned::Span { mention: Mention::new(0, 0, 1, 2), quality: AlignQuality::SurfaceSearch }
        );
        // truncated text is not searched for
        let onf = parse_onf("Chain 5 (IDENT)\n    0.1-3   b\n").unwrap();
        let al = align(&onf, &d).unwrap();
        assert_eq!(
            al.entries[0].aligned,
            Aligned::Span { mention: Mention::new(0, 0, 1, 3), quality: AlignQuality::Positional }
        );
    }

    #[test]
    fn out_of_range_member() {
        let d = doc(TABLE2);
        let onf = parse_onf("Chain 5 (IDENT)\n    4.0-0   x\n    4.1-1   *\n").unwrap();
        let al = align(&onf, &d).unwrap();
        assert!(matches!(al.entries[0].aligned, Aligned::Unaligned { .. }));
        let plan = plan_merge(&onf, &d).unwrap();
        assert!(plan.insertions.is_empty());
        assert!(matches!(plan.rejects[0].reason, RejectReason::UnalignableMember { .. }));
    }

    #[test]
    fn doc_id_mismatch() {
        let d = doc(TABLE2);
        let onf = crate::onf::parse_onf_named("", "other").unwrap();
        assert!(matches!(align(&onf, &d), Err(MergeError::DocumentIdMismatch { .. })));
        let onf = crate::onf::parse_onf_named("", "x/y/t2.onf").unwrap();
        assert!(align(&onf, &d).is_ok());
    }

    #[test]
    fn azp_only_chain_is_rejected() {
        let d = doc(TABLE2);
        let onf = parse_onf("Chain 5 (IDENT)\n    0.1-1   *\n").unwrap();
        let plan = plan_merge(&onf, &d).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.rejects[0].reason, RejectReason::AzpOnlyChain);
    }

    #[test]
    fn ambiguous_match_is_reported() {
        let d = doc("\
#begin document (t); part 000
t 0 0 a NN * - - - - * (1)
t 0 1 b VBD * - - - - * -
t 0 2 c NN * - - - - * (2)
t 0 3 d NN * - - - - * (1)
t 0 4 e NN * - - - - * (2)

#end document
");
        let onf = parse_onf("Chain 9 (IDENT)\n    0.0-0   a\n    0.2-2   *\n    0.3-3   c\n").unwrap();
        let plan = plan_merge(&onf, &d).unwrap();
        assert!(plan.insertions.is_empty());
        assert_eq!(plan.rejects[0].reason, RejectReason::AmbiguousChainMatch { chains: vec![1, 2] });
    }

    #[test]
    fn new_chain_id_falls_back_when_taken() {
        let d = doc("\
#begin document (t); part 000
t 0 0 a NN * - - - - * (7)
t 0 1 b VBD * - - - - * -
t 0 2 c NN * - - - - * (7)
t 0 3 d NN * - - - - * -

#end document
");
        let onf = parse_onf("Chain 7 (IDENT)\n    0.3-3   d\n    0.1-1   *\n").unwrap();
        let plan = plan_merge(&onf, &d).unwrap();
        assert_eq!(plan.insertions.len(), 1);
        assert_eq!(plan.insertions[0].chain_id, 8);
        assert_eq!(plan.insertions[0].provenance, Provenance::NewChain);
    }

    #[test]
    fn materialize_round_trips_extended_docs() {
        let d = doc(TABLE2);
        let (ext, _) = insert_pro_rows(&d, &[(Azp::new(0, 0, 1), Some(4))], &RowFill::default()).unwrap();
        let ext = apply_merge(&plan_merge(&parse_onf("").unwrap(), &ext).unwrap(), &ext).unwrap();
        let clusters = extract_mentions(&ext);
        assert_eq!(materialize(&ext, &clusters, &RowFill::for_document(&ext)).unwrap(), ext);
    }

    #[test]
    fn stats() {
        assert_eq!(corpus_stats(&[]), CorpusStats::default());
        let d = doc(TABLE2);
        let (ext, _) = insert_pro_rows(&d, &[(Azp::new(0, 0, 1), Some(1))], &RowFill::default()).unwrap();
        assert_eq!(corpus_stats(&[ext]), CorpusStats { documents: 1, sentences: 1, words: 4, azps: 1 });
    }

    #[test]
    fn row_fill_reuses_existing_pos() {
        let d = doc("#begin document (t); part 000\nt 0 0 a VBD * - - - - * -\nt 0 1 *pro* -NONE- * - - - - * -\n\n#end document\n");
        assert_eq!(RowFill::for_document(&d).pos, "-NONE-");
        assert_eq!(RowFill::for_document(&doc(TABLE2)).pos, "PRON");
    }
}
