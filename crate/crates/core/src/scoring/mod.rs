//! MUC, B³, CEAF-φ4, the CoNLL average, and AZP resolution scores.
//!
//! Every metric first produces exact [`Counts`] (numerators and
//! denominators as rationals); documents are combined by summing counts,
//! and only the final ratio is taken in floating point.

mod assignment;
mod report;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::model::{Azp, ChainId, ClusterSet, Mention};

pub use assignment::max_weight_assignment;
pub use report::{ScoreReport, ScoreTriple};

fn ratio(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Recall and precision as exact fractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub recall_num: BigRational,
    pub recall_den: BigRational,
    pub precision_num: BigRational,
    pub precision_den: BigRational,
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            recall_num: BigRational::zero(),
            recall_den: BigRational::zero(),
            precision_num: BigRational::zero(),
            precision_den: BigRational::zero(),
        }
    }
}

fn div(num: &BigRational, den: &BigRational) -> BigRational {
    if den.is_zero() {
        BigRational::zero()
    } else {
        num / den
    }
}

impl Counts {
    pub fn new(recall_num: BigRational, recall_den: BigRational, precision_num: BigRational, precision_den: BigRational) -> Self {
        Counts { recall_num, recall_den, precision_num, precision_den }
    }

    pub fn recall(&self) -> BigRational {
        div(&self.recall_num, &self.recall_den)
    }

    pub fn precision(&self) -> BigRational {
        div(&self.precision_num, &self.precision_den)
    }

    /// F1 as an exact fraction.
    pub fn f1(&self) -> BigRational {
        let (r, p) = (self.recall(), self.precision());
        let sum = &r + &p;
        if sum.is_zero() {
            return BigRational::zero();
        }
        ratio(2) * r * p / sum
    }

    pub fn triple(&self) -> ScoreTriple {
        let f = |x: BigRational| x.to_f64().unwrap_or(0.0);
        ScoreTriple { recall: f(self.recall()), precision: f(self.precision()), f1: f(self.f1()) }
    }

    pub fn swapped(&self) -> Counts {
        Counts {
            recall_num: self.precision_num.clone(),
            recall_den: self.precision_den.clone(),
            precision_num: self.recall_num.clone(),
            precision_den: self.recall_den.clone(),
        }
    }
}

impl AddAssign<&Counts> for Counts {
    fn add_assign(&mut self, o: &Counts) {
        self.recall_num += &o.recall_num;
        self.recall_den += &o.recall_den;
        self.precision_num += &o.precision_num;
        self.precision_den += &o.precision_den;
    }
}

impl Add for Counts {
    type Output = Counts;

    fn add(mut self, o: Counts) -> Counts {
        self += &o;
        self
    }
}

fn owners<T: Eq + Hash>(clusters: &[Vec<T>]) -> HashMap<&T, usize> {
    let mut out = HashMap::new();
    for (i, c) in clusters.iter().enumerate() {
        for m in c {
            out.insert(m, i);
        }
    }
    out
}

/// Number of pieces `cluster` is cut into by `other`; members missing from
/// `other` each count as their own piece.
fn partitions<T: Eq + Hash>(cluster: &[T], other: &HashMap<&T, usize>) -> usize {
    let mut seen = HashSet::new();
    let mut missing = 0;
    for m in cluster {
        match other.get(m) {
            Some(&i) => {
                seen.insert(i);
            }
            None => missing += 1,
        }
    }
    seen.len() + missing
}

fn muc_side<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> (usize, usize) {
    let resp = owners(response);
    let mut num = 0;
    let mut den = 0;
    for k in key.iter().filter(|k| !k.is_empty()) {
        num += k.len() - partitions(k, &resp);
        den += k.len() - 1;
    }
    (num, den)
}

pub fn muc_counts<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> Counts {
    let (rn, rd) = muc_side(key, response);
    let (pn, pd) = muc_side(response, key);
    Counts::new(ratio(rn), ratio(rd), ratio(pn), ratio(pd))
}

fn overlap_table<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> Vec<Vec<usize>> {
    let resp = owners(response);
    let mut table = vec![vec![0; response.len()]; key.len()];
    for (i, k) in key.iter().enumerate() {
        for m in k {
            if let Some(&j) = resp.get(m) {
                table[i][j] += 1;
            }
        }
    }
    table
}

pub fn b_cubed_counts<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> Counts {
    let table = overlap_table(key, response);
    let mut rn = BigRational::zero();
    let mut pn = BigRational::zero();
    for (i, row) in table.iter().enumerate() {
        for (j, &n) in row.iter().enumerate() {
            if n > 0 {
                rn += frac(n * n, key[i].len());
                pn += frac(n * n, response[j].len());
            }
        }
    }
    let rd: usize = key.iter().map(Vec::len).sum();
    let pd: usize = response.iter().map(Vec::len).sum();
    Counts::new(rn, ratio(rd), pn, ratio(pd))
}

fn phi4(overlap: usize, k: usize, r: usize) -> BigRational {
    if overlap == 0 {
        BigRational::zero()
    } else {
        frac(2 * overlap, k + r)
    }
}

/// Best total φ4 over one-to-one cluster alignments, exactly.
pub fn ceaf_phi4_similarity<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> BigRational {
    let table = overlap_table(key, response);
    let weights: Vec<Vec<f64>> = table
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &n)| phi4(n, key[i].len(), response[j].len()).to_f64().unwrap_or(0.0))
                .collect()
        })
        .collect();
    max_weight_assignment(&weights)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| phi4(table[i][j], key[i].len(), response[j].len())))
        .fold(BigRational::zero(), |a, b| a + b)
}

pub fn ceaf_phi4_counts<T: Eq + Hash>(key: &[Vec<T>], response: &[Vec<T>]) -> Counts {
    let key: Vec<&Vec<T>> = key.iter().filter(|c| !c.is_empty()).collect();
    let response: Vec<&Vec<T>> = response.iter().filter(|c| !c.is_empty()).collect();
    let key: Vec<Vec<&T>> = key.iter().map(|c| c.iter().collect()).collect();
    let response: Vec<Vec<&T>> = response.iter().map(|c| c.iter().collect()).collect();
    let sim = ceaf_phi4_similarity(&key, &response);
    Counts::new(sim.clone(), ratio(key.len()), sim, ratio(response.len()))
}

pub fn score_muc(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple {
    muc_counts(&key.groups(), &response.groups()).triple()
}

pub fn score_b_cubed(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple {
    b_cubed_counts(&key.groups(), &response.groups()).triple()
}

pub fn score_ceaf_phi4(key: &ClusterSet, response: &ClusterSet) -> ScoreTriple {
    ceaf_phi4_counts(&key.groups(), &response.groups()).triple()
}

/// Mean of the three F1 values.
pub fn conll_average(muc: &ScoreTriple, b_cubed: &ScoreTriple, ceaf: &ScoreTriple) -> f64 {
    (muc.f1 + b_cubed.f1 + ceaf.f1) / 3.0
}

/// How a response AZP earns a hit.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AzpHitMode {
    /// Same gap as a key AZP.
    PositionOnly,
    /// Same gap, and the two clusters share an overt mention.
    #[default]
    PositionAndEntity,
}

impl FromStr for AzpHitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "position" | "position_only" => Ok(AzpHitMode::PositionOnly),
            "entity" | "position_and_entity" => Ok(AzpHitMode::PositionAndEntity),
            other => Err(format!("unknown AZP hit mode {other:?}; expected position or entity")),
        }
    }
}

/// A response AZP and the cluster it was resolved to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AzpResolutionRecord {
    pub position: Azp,
    pub resolved_cluster: ChainId,
}

fn overt_sets(clusters: &ClusterSet) -> HashMap<ChainId, HashSet<Mention>> {
    clusters.clusters.iter().map(|c| (c.id, c.mentions().copied().collect())).collect()
}

/// Size of a maximum bipartite matching (Kuhn's augmenting paths).
fn max_matching(left: usize, right: usize, edge: impl Fn(usize, usize) -> bool) -> usize {
    fn augment(
        u: usize,
        right: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for v in 0..right {
            if edge(u, v) && !seen[v] {
                seen[v] = true;
                if owner[v].map_or(true, |w| augment(w, right, edge, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..left)
        .filter(|&u| augment(u, right, &edge, &mut vec![false; right], &mut owner))
        .count()
}

/// AZP resolution counts. Hits are matched one-to-one within each gap, so a
/// key AZP is credited at most once and the score is symmetric.
pub fn azp_counts(
    key: &[(Azp, ChainId)],
    response: &[AzpResolutionRecord],
    key_clusters: &ClusterSet,
    response_clusters: &ClusterSet,
    mode: AzpHitMode,
) -> Counts {
    let key_overt = overt_sets(key_clusters);
    let resp_overt = overt_sets(response_clusters);
    let mut by_gap: BTreeMap<Azp, (Vec<ChainId>, Vec<ChainId>)> = BTreeMap::new();
    for (a, c) in key {
        by_gap.entry(*a).or_default().0.push(*c);
    }
    for r in response {
        by_gap.entry(r.position).or_default().1.push(r.resolved_cluster);
    }
    let empty = HashSet::new();
    let hits: usize = by_gap
        .values()
        .map(|(k, r)| match mode {
            AzpHitMode::PositionOnly => k.len().min(r.len()),
            AzpHitMode::PositionAndEntity => max_matching(k.len(), r.len(), |i, j| {
                let a = key_overt.get(&k[i]).unwrap_or(&empty);
                let b = resp_overt.get(&r[j]).unwrap_or(&empty);
                !a.is_disjoint(b)
            }),
        })
        .sum();
    Counts::new(ratio(hits), ratio(key.len()), ratio(hits), ratio(response.len()))
}

pub fn score_azp(
    key: &[(Azp, ChainId)],
    response: &[AzpResolutionRecord],
    key_clusters: &ClusterSet,
    response_clusters: &ClusterSet,
    mode: AzpHitMode,
) -> ScoreTriple {
    azp_counts(key, response, key_clusters, response_clusters, mode).triple()
}

pub fn resolution_records(clusters: &ClusterSet) -> Vec<AzpResolutionRecord> {
    clusters
        .azp_records()
        .into_iter()
        .map(|(position, resolved_cluster)| AzpResolutionRecord { position, resolved_cluster })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub azp_hit: AzpHitMode,
    /// Keep `*pro*` members when computing MUC, B³ and CEAF.
    pub include_pro_in_coref: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions { azp_hit: AzpHitMode::default(), include_pro_in_coref: true }
    }
}

/// Running totals over documents; the order documents are added in does
/// not matter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreAccumulator {
    pub muc: Counts,
    pub b_cubed: Counts,
    pub ceaf_phi4: Counts,
    pub azp: Counts,
    pub documents: usize,
}

impl ScoreAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Scores one document, each part separately.
    pub fn add_document(&mut self, key: &ClusterSet, response: &ClusterSet, options: &ScoreOptions) {
        let strip = |c: &ClusterSet| if options.include_pro_in_coref { c.clone() } else { c.without_azps() };
        let key_parts = strip(key).split_by_part();
        let resp_parts = strip(response).split_by_part();
        let empty = ClusterSet::default();
        let parts: std::collections::BTreeSet<usize> = key_parts.keys().chain(resp_parts.keys()).copied().collect();
        for p in parts {
            let k = key_parts.get(&p).unwrap_or(&empty).groups();
            let r = resp_parts.get(&p).unwrap_or(&empty).groups();
            self.muc += &muc_counts(&k, &r);
            self.b_cubed += &b_cubed_counts(&k, &r);
            self.ceaf_phi4 += &ceaf_phi4_counts(&k, &r);
        }
        let key_azps = key.azp_records();
        let resp_azps = resolution_records(response);
        self.azp += &azp_counts(&key_azps, &resp_azps, key, response, options.azp_hit);
        self.documents += 1;
    }

    pub fn merge(mut self, other: &ScoreAccumulator) -> Self {
        self.muc += &other.muc;
        self.b_cubed += &other.b_cubed;
        self.ceaf_phi4 += &other.ceaf_phi4;
        self.azp += &other.azp;
        self.documents += other.documents;
        self
    }

    pub fn report(&self) -> ScoreReport {
        let muc = self.muc.triple();
        let b_cubed = self.b_cubed.triple();
        let ceaf_phi4 = self.ceaf_phi4.triple();
        let conll_avg_f1 = conll_average(&muc, &b_cubed, &ceaf_phi4);
        ScoreReport { muc, b_cubed, ceaf_phi4, conll_avg_f1, azp: self.azp.triple() }
    }
}

/// Scores a single document pair with `options`.
pub fn score_document(key: &ClusterSet, response: &ClusterSet, options: &ScoreOptions) -> ScoreReport {
    let mut acc = ScoreAccumulator::new();
    acc.add_document(key, response, options);
    acc.report()
}
