use std::collections::{BTreeMap, HashMap};

use super::{Boundary, CorefTag, Document, Sentence};
use crate::model::{Azp, ChainId, ClusterSet, Member, Mention};

/// Decodes the coreference column into clusters.
///
/// A bracket pair on a single `*pro*` row becomes an [`Azp`]; everything
/// else becomes a [`Mention`] over overt-token coordinates. A close bracket
/// pairs with the most recent open bracket of the same chain.
pub fn extract_mentions(doc: &Document) -> ClusterSet {
    let mut groups: BTreeMap<ChainId, Vec<Member>> = BTreeMap::new();
    for (p, s, sent) in doc.sentences() {
        for (chain, member) in sentence_members(p, s, sent) {
            groups.entry(chain).or_default().push(member);
        }
    }
    ClusterSet::from_groups(groups)
}

/// Every (chain, member) pair in the coreference column, duplicates kept.
pub fn raw_mentions(doc: &Document) -> Vec<(ChainId, Member)> {
    doc.sentences().flat_map(|(p, s, sent)| sentence_members(p, s, sent)).collect()
}

fn sentence_members(part: usize, sentence: usize, sent: &Sentence) -> Vec<(ChainId, Member)> {
    // overt index of each row, and how many overt tokens precede it
    let mut overt_of = Vec::with_capacity(sent.rows.len());
    let mut before = Vec::with_capacity(sent.rows.len());
    let mut count = 0;
    for r in &sent.rows {
        before.push(count);
        if r.is_pro() {
            overt_of.push(None);
        } else {
            overt_of.push(Some(count));
            count += 1;
        }
    }

    let span = |first: usize, last: usize| -> Member {
        if first == last && overt_of[first].is_none() {
            return Member::Azp(Azp::new(part, sentence, before[first]));
        }
        let start = (first..=last).find_map(|i| overt_of[i]);
        let end = (first..=last).rev().find_map(|i| overt_of[i]);
        match (start, end) {
            (Some(start), Some(end)) => Member::Mention(Mention::new(part, sentence, start, end)),
            _ => Member::Azp(Azp::new(part, sentence, before[first])),
        }
    };

    let mut out = Vec::new();
    let mut open: Vec<(ChainId, usize)> = Vec::new();
    for (i, row) in sent.rows.iter().enumerate() {
        for tag in &row.coref {
            match tag.boundary {
                Boundary::Open => open.push((tag.chain_id, i)),
                Boundary::OpenAndClose => out.push((tag.chain_id, span(i, i))),
                Boundary::Close => {
                    if let Some(k) = open.iter().rposition(|(c, _)| *c == tag.chain_id) {
                        let (_, first) = open.remove(k);
                        out.push((tag.chain_id, span(first, i)));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("member {0} lies outside the document")]
    OutOfRange(Member),
    #[error("no *pro* row at {0} to carry the zero pronoun")]
    MissingProRow(Member),
}

struct Bracket {
    chain: ChainId,
    first: usize,
    last: usize,
}

/// Rewrites every coreference cell of `doc` from `clusters`.
///
/// Tags within a cell follow a fixed order so that nesting reads naturally:
/// open brackets (outermost first), then single-token tags, then close
/// brackets (innermost first). AZP members need a `*pro*` row at their gap.
pub fn encode_mentions(clusters: &ClusterSet, doc: &Document) -> Result<Document, EncodeError> {
    let mut out = doc.clone();
    for row in out.parts.iter_mut().flat_map(|p| p.sentences.iter_mut()).flat_map(|s| s.rows.iter_mut()) {
        row.coref.clear();
    }

    let mut per_sentence: BTreeMap<(usize, usize), Vec<(ChainId, Member)>> = BTreeMap::new();
    for c in &clusters.clusters {
        for m in &c.members {
            per_sentence.entry((m.part(), m.sentence())).or_default().push((c.id, *m));
        }
    }

    for ((p, s), members) in per_sentence {
        let sent = out
            .parts
            .get_mut(p)
            .and_then(|part| part.sentences.get_mut(s))
            .ok_or(EncodeError::OutOfRange(members[0].1))?;
        let overt_rows = sent.overt_row_indices();
        let mut pro_by_gap: HashMap<usize, Vec<usize>> = HashMap::new();
        for (row, gap) in sent.pro_gaps() {
            pro_by_gap.entry(gap).or_default().push(row);
        }

        let mut members = members;
        members.sort_by_key(|(c, m)| (*m, *c));
        let mut brackets = Vec::with_capacity(members.len());
        for (chain, m) in members {
            let (first, last) = match m {
                Member::Mention(mention) => {
                    let first = *overt_rows.get(mention.start).ok_or(EncodeError::OutOfRange(m))?;
                    let last = *overt_rows.get(mention.end).ok_or(EncodeError::OutOfRange(m))?;
                    (first, last)
                }
                Member::Azp(azp) => {
                    let rows = pro_by_gap.get_mut(&azp.gap).ok_or(EncodeError::MissingProRow(m))?;
                    if rows.is_empty() {
                        return Err(EncodeError::MissingProRow(m));
                    }
                    let row = rows.remove(0);
                    (row, row)
                }
            };
            brackets.push(Bracket { chain, first, last });
        }
        place_tags(sent, &brackets);
    }
    Ok(out)
}

fn place_tags(sent: &mut Sentence, brackets: &[Bracket]) {
    for (i, row) in sent.rows.iter_mut().enumerate() {
        let mut opens: Vec<&Bracket> = brackets.iter().filter(|b| b.first == i && b.last != i).collect();
        let mut singles: Vec<&Bracket> = brackets.iter().filter(|b| b.first == i && b.last == i).collect();
        let mut closes: Vec<&Bracket> = brackets.iter().filter(|b| b.last == i && b.first != i).collect();
        opens.sort_by(|a, b| b.last.cmp(&a.last).then(a.chain.cmp(&b.chain)));
        singles.sort_by_key(|b| b.chain);
        closes.sort_by(|a, b| b.first.cmp(&a.first).then(b.chain.cmp(&a.chain)));
        row.coref.extend(opens.iter().map(|b| CorefTag::open(b.chain)));
        row.coref.extend(singles.iter().map(|b| CorefTag::single(b.chain)));
        row.coref.extend(closes.iter().map(|b| CorefTag::close(b.chain)));
    }
}
