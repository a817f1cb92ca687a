//! AZP/cluster pair features.
//!
//! An AZP is described by the embeddings of the words on either side of
//! its gap, whether it shares a sentence with the cluster's representative
//! mention, and the bucketed sentence distance to that representative.
//! The pair input handed to an AZP resolver is the representative's
//! embedding followed by those four features.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conll::Document;
use crate::model::{Azp, Cluster, Mention, Member};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterRepresentation {
    /// The earliest overt mention.
    FirstMention,
    /// The latest overt mention before the AZP, or the latest overall if
    /// none precedes it.
    #[default]
    LastMention,
    /// The latest overt mention of the cluster regardless of the AZP.
    DocumentLast,
}

impl std::str::FromStr for ClusterRepresentation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" | "first_mention" => Ok(ClusterRepresentation::FirstMention),
            "last" | "last_mention" => Ok(ClusterRepresentation::LastMention),
            "document_last" => Ok(ClusterRepresentation::DocumentLast),
            other => Err(format!("unknown cluster representation {other:?}; expected first or last")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("cluster {0} has no overt mention")]
    NoOvertMention(u32),
    #[error("expected dimension {expected} for {what}, got {found}")]
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    #[error("bucket thresholds must start at 0 and increase strictly: {0:?}")]
    BadBuckets(Vec<usize>),
}

/// Picks the mention that stands for `cluster` when pairing with `anchor`.
pub fn represent_cluster(
    cluster: &Cluster,
    strategy: ClusterRepresentation,
    anchor: &Azp,
) -> Result<Mention, FeatureError> {
    let mut mentions = cluster.mentions().peekable();
    if mentions.peek().is_none() {
        return Err(FeatureError::NoOvertMention(cluster.id));
    }
    let anchor = Member::Azp(*anchor);
    // members are in document order
    let rep = match strategy {
        ClusterRepresentation::FirstMention => mentions.next(),
        ClusterRepresentation::DocumentLast => mentions.last(),
        ClusterRepresentation::LastMention => {
            let all: Vec<&Mention> = mentions.collect();
            all.iter()
                .rev()
                .find(|m| Member::Mention(***m) < anchor)
                .or_else(|| all.last())
                .copied()
        }
    };
    Ok(*rep.expect("non-empty"))
}

pub fn same_sentence(azp: &Azp, rep: &Mention) -> bool {
    azp.part == rep.part && azp.sentence == rep.sentence
}

/// Sentence-distance buckets. Thresholds `[0, 1, 2, 4, 8]` give the
/// buckets `[0,1) [1,2) [2,4) [4,8) [8,∞)`; the last one also takes
/// pairs from different parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DistanceBuckets(Vec<usize>);

impl DistanceBuckets {
    pub fn new(thresholds: Vec<usize>) -> Result<Self, FeatureError> {
        let ok = thresholds.first() == Some(&0) && thresholds.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(FeatureError::BadBuckets(thresholds));
        }
        Ok(DistanceBuckets(thresholds))
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bucket index for a raw distance; `None` means unbounded.
    pub fn bucket(&self, distance: Option<usize>) -> usize {
        match distance {
            None => self.0.len() - 1,
            Some(d) => self.0.iter().rposition(|&t| t <= d).unwrap_or(0),
        }
    }
}

impl Default for DistanceBuckets {
    fn default() -> Self {
        DistanceBuckets(vec![0, 1, 2, 4, 8])
    }
}

impl std::str::FromStr for DistanceBuckets {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        DistanceBuckets::new(values).map_err(|e| e.to_string())
    }
}

pub fn cluster_distance(azp: &Azp, rep: &Mention, buckets: &DistanceBuckets) -> usize {
    let raw = (azp.part == rep.part).then(|| azp.sentence.abs_diff(rep.sentence));
    buckets.bucket(raw)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn mean<'a, I: IntoIterator<Item = &'a Embedding>>(dim: usize, items: I) -> Embedding {
        let mut acc = vec![0.0; dim];
        let mut n = 0usize;
        for e in items {
            for (a, v) in acc.iter_mut().zip(&e.0) {
                *a += v;
            }
            n += 1;
        }
        if n > 0 {
            acc.iter_mut().for_each(|a| *a /= n as f64);
        }
        Embedding(acc)
    }
}

/// Word-embedding lookup. Neural encoders live outside this crate and are
/// plugged in through this trait.
pub trait Embedder {
    fn dim(&self) -> usize;
    fn embed(&self, word: &str) -> Embedding;
    /// Stands in for the missing neighbour of a sentence-initial or
    /// sentence-final gap.
    fn boundary(&self) -> Embedding;
}

/// Deterministic pseudo-random vectors keyed by the word and a seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub const BOUNDARY_TOKEN: &'static str = "<boundary>";

    pub fn new(dim: usize, seed: u64) -> Self {
        HashEmbedder { dim, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn fnv1a(bytes: &[u8]) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

impl Embedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, word: &str) -> Embedding {
        let mut rng = ChaCha8Rng::seed_from_u64(Self::fnv1a(word.as_bytes()) ^ self.seed);
        Embedding((0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    fn boundary(&self) -> Embedding {
        self.embed(Self::BOUNDARY_TOKEN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzpFeatures {
    pub prev_word: Embedding,
    pub next_word: Embedding,
    pub same_sentence: bool,
    pub cluster_distance: usize,
}

/// Mean of the word embeddings over the mention's tokens.
pub fn embed_mention(doc: &Document, mention: &Mention, embedder: &dyn Embedder) -> Embedding {
    let words: Vec<Embedding> = doc
        .sentence(mention.part, mention.sentence)
        .map(|s| {
            s.overt_rows()
                .skip(mention.start)
                .take(mention.len())
                .map(|r| embedder.embed(&r.word))
                .collect()
        })
        .unwrap_or_default();
    if words.is_empty() {
        return embedder.boundary();
    }
    Embedding::mean(embedder.dim(), &words)
}

pub fn assemble_azp_features(
    doc: &Document,
    azp: &Azp,
    rep: &Mention,
    embedder: &dyn Embedder,
    buckets: &DistanceBuckets,
) -> AzpFeatures {
    let overt: Vec<&str> = doc
        .sentence(azp.part, azp.sentence)
        .map(|s| s.overt_rows().map(|r| r.word.as_str()).collect())
        .unwrap_or_default();
    let prev_word = match azp.gap.checked_sub(1).and_then(|i| overt.get(i)) {
        Some(w) => embedder.embed(w),
        None => embedder.boundary(),
    };
    let next_word = match overt.get(azp.gap) {
        Some(w) => embedder.embed(w),
        None => embedder.boundary(),
    };
    AzpFeatures {
        prev_word,
        next_word,
        same_sentence: same_sentence(azp, rep),
        cluster_distance: cluster_distance(azp, rep, buckets),
    }
}

/// Order and widths of the pair vector. Bump `version` whenever the order
/// changes; trained resolvers depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub version: u32,
    pub cluster_dim: usize,
    pub word_dim: usize,
    pub buckets: usize,
}

impl FeatureLayout {
    pub const VERSION: u32 = 1;

    pub fn new(cluster_dim: usize, word_dim: usize, buckets: usize) -> Self {
        FeatureLayout { version: Self::VERSION, cluster_dim, word_dim, buckets }
    }

    /// cluster | prev word | next word | same sentence | distance one-hot
    pub fn width(&self) -> usize {
        self.cluster_dim + 2 * self.word_dim + 1 + self.buckets
    }
}

pub fn concat_pair(
    cluster_rep: &Embedding,
    azp: &AzpFeatures,
    layout: &FeatureLayout,
) -> Result<Embedding, FeatureError> {
    let check = |what, expected, found| {
        if expected == found {
            Ok(())
        } else {
            Err(FeatureError::DimensionMismatch { what, expected, found })
        }
    };
    check("cluster representation", layout.cluster_dim, cluster_rep.dim())?;
    check("previous word", layout.word_dim, azp.prev_word.dim())?;
    check("next word", layout.word_dim, azp.next_word.dim())?;
    if azp.cluster_distance >= layout.buckets {
        return Err(FeatureError::DimensionMismatch {
            what: "distance bucket",
            expected: layout.buckets,
            found: azp.cluster_distance + 1,
        });
    }

    let mut v = Vec::with_capacity(layout.width());
    v.extend_from_slice(&cluster_rep.0);
    v.extend_from_slice(&azp.prev_word.0);
    v.extend_from_slice(&azp.next_word.0);
    v.push(if azp.same_sentence { 1.0 } else { 0.0 });
    v.extend((0..layout.buckets).map(|b| if b == azp.cluster_distance { 1.0 } else { 0.0 }));
    Ok(Embedding(v))
}
