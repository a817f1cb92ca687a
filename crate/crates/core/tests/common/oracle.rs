//! Slow reference scorers written from the metric definitions, used to
//! cross-check the library.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use zeroref::model::{Azp, ChainId, ClusterSet};
use zeroref::scoring::AzpHitMode;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn safe_div(n: BigRational, d: BigRational) -> BigRational {
    if d.is_zero() {
        BigRational::zero()
    } else {
        n / d
    }
}

fn owner<T: PartialEq>(clusters: &[Vec<T>], m: &T) -> Option<usize> {
    clusters.iter().position(|c| c.contains(m))
}

/// Number of pieces `cluster` falls into under `other`; unseen members are
/// pieces of their own.
fn pieces<T: PartialEq>(cluster: &[T], other: &[Vec<T>]) -> i64 {
    let mut seen = Vec::new();
    let mut alone = 0;
    for m in cluster {
        match owner(other, m) {
            Some(i) if !seen.contains(&i) => seen.push(i),
            Some(_) => {}
            None => alone += 1,
        }
    }
    seen.len() as i64 + alone
}

fn muc_side<T: PartialEq>(a: &[Vec<T>], b: &[Vec<T>]) -> BigRational {
    let num: i64 = a.iter().map(|c| c.len() as i64 - pieces(c, b)).sum();
    let den: i64 = a.iter().map(|c| c.len() as i64 - 1).sum();
    safe_div(q(num, 1), q(den, 1))
}

pub fn muc<T: PartialEq>(key: &[Vec<T>], response: &[Vec<T>]) -> (BigRational, BigRational) {
    (muc_side(key, response), muc_side(response, key))
}

fn b3_side<T: PartialEq>(a: &[Vec<T>], b: &[Vec<T>]) -> BigRational {
    let mut total = BigRational::zero();
    let mut n = 0;
    for c in a {
        for m in c {
            n += 1;
            if let Some(j) = owner(b, m) {
                let shared = c.iter().filter(|x| b[j].contains(x)).count() as i64;
                total += q(shared, c.len() as i64);
            }
        }
    }
    safe_div(total, q(n, 1))
}

pub fn b_cubed<T: PartialEq>(key: &[Vec<T>], response: &[Vec<T>]) -> (BigRational, BigRational) {
    (b3_side(key, response), b3_side(response, key))
}

pub fn phi4<T: PartialEq>(k: &[T], r: &[T]) -> BigRational {
    let shared = k.iter().filter(|x| r.contains(x)).count() as i64;
    q(2 * shared, (k.len() + r.len()) as i64)
}

/// Best total similarity over every one-to-one pairing, by enumeration.
pub fn ceaf_best<T: PartialEq>(key: &[Vec<T>], response: &[Vec<T>]) -> BigRational {
    let (small, large, flip) = if key.len() <= response.len() { (key, response, false) } else { (response, key, true) };
    let mut best = BigRational::zero();
    for perm in (0..large.len()).permutations(small.len()) {
        let mut s = BigRational::zero();
        for (i, &j) in perm.iter().enumerate() {
            s += if flip { phi4(&large[j], &small[i]) } else { phi4(&small[i], &large[j]) };
        }
        if s > best {
            best = s;
        }
    }
    best
}

pub fn ceaf_phi4<T: PartialEq>(key: &[Vec<T>], response: &[Vec<T>]) -> (BigRational, BigRational) {
    let best = ceaf_best(key, response);
    (safe_div(best.clone(), q(key.len() as i64, 1)), safe_div(best, q(response.len() as i64, 1)))
}

fn overt(clusters: &ClusterSet, id: ChainId) -> HashSet<zeroref::model::Mention> {
    clusters.get(id).map(|c| c.mentions().copied().collect()).unwrap_or_default()
}

fn best_matching(k: &[ChainId], r: &[ChainId], edge: &dyn Fn(ChainId, ChainId) -> bool) -> usize {
    let Some((&first, rest)) = k.split_first() else { return 0 };
    let mut best = best_matching(rest, r, edge);
    for (j, &c) in r.iter().enumerate() {
        if edge(first, c) {
            let mut left = r.to_vec();
            left.remove(j);
            best = best.max(1 + best_matching(rest, &left, edge));
        }
    }
    best
}

/// AZP recall and precision by enumerating matchings inside each gap.
pub fn azp(
    key: &[(Azp, ChainId)],
    response: &[(Azp, ChainId)],
    key_clusters: &ClusterSet,
    response_clusters: &ClusterSet,
    mode: AzpHitMode,
) -> (BigRational, BigRational) {
    let mut gaps: BTreeMap<Azp, (Vec<ChainId>, Vec<ChainId>)> = BTreeMap::new();
    for (a, c) in key {
        gaps.entry(*a).or_default().0.push(*c);
    }
    for (a, c) in response {
        gaps.entry(*a).or_default().1.push(*c);
    }
    let edge = |kc: ChainId, rc: ChainId| match mode {
        AzpHitMode::PositionOnly => true,
        AzpHitMode::PositionAndEntity => !overt(key_clusters, kc).is_disjoint(&overt(response_clusters, rc)),
    };
    let hits: usize = gaps.values().map(|(k, r)| best_matching(k, r, &edge)).sum();
    (
        safe_div(q(hits as i64, 1), q(key.len() as i64, 1)),
        safe_div(q(hits as i64, 1), q(response.len() as i64, 1)),
    )
}
