//! Training objectives for AZP identification, AZP resolution and
//! mention coreference, with their gradients w.r.t. the probabilities.
//!
//! No optimizer is provided; trainers supply probabilities and gold labels.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub const EPSILON: f64 = 1e-7;

/// Tolerance for a per-instance distribution to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

pub type CandidateId = u32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("{labels} labels but {probs} probabilities")]
    LengthMismatch { labels: usize, probs: usize },
    #[error("no instances")]
    EmptyInput,
    #[error("instance {0} has no correct candidate among its candidates")]
    MissingGold(usize),
    #[error("instance {0} has no candidates")]
    EmptyInstance(usize),
    #[error("instance {instance} sums to {sum}, not 1")]
    NotNormalized { instance: usize, sum: f64 },
}

/// Candidate probabilities for each training instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub instances: Vec<Vec<(CandidateId, f64)>>,
}

impl ProbabilityTable {
    pub fn new(instances: Vec<Vec<(CandidateId, f64)>>) -> Self {
        ProbabilityTable { instances }
    }

    /// Same candidates, new probabilities (row-major, as from [`Self::probs`]).
    pub fn with_probs(&self, probs: &[f64]) -> Self {
        let mut it = probs.iter();
        let instances = self
            .instances
            .iter()
            .map(|row| row.iter().map(|(c, _)| (*c, *it.next().expect("one value per cell"))).collect())
            .collect();
        ProbabilityTable { instances }
    }

    pub fn probs(&self) -> Vec<f64> {
        self.instances.iter().flatten().map(|(_, p)| *p).collect()
    }
}

fn clamp(p: f64) -> f64 {
    p.clamp(EPSILON, 1.0 - EPSILON)
}

fn check_lengths(labels: &[bool], probs: &[f64]) -> Result<(), LossError> {
    if labels.len() != probs.len() {
        return Err(LossError::LengthMismatch { labels: labels.len(), probs: probs.len() });
    }
    if labels.is_empty() {
        return Err(LossError::EmptyInput);
    }
    Ok(())
}

/// Mean binary cross-entropy.
pub fn loss_bce(labels: &[bool], probs: &[f64]) -> Result<f64, LossError> {
    check_lengths(labels, probs)?;
    let total: f64 = labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| {
            let p = clamp(p);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / labels.len() as f64)
}

pub fn loss_bce_grad(labels: &[bool], probs: &[f64]) -> Result<Vec<f64>, LossError> {
    check_lengths(labels, probs)?;
    let n = labels.len() as f64;
    Ok(labels
        .iter()
        .zip(probs)
        .map(|(&y, &p)| {
            if p != clamp(p) {
                return 0.0;
            }
            if y {
                -1.0 / (p * n)
            } else {
                1.0 / ((1.0 - p) * n)
            }
        })
        .collect())
}

fn check_table(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<(), LossError> {
    if table.instances.len() != gold.len() {
        return Err(LossError::LengthMismatch { labels: gold.len(), probs: table.instances.len() });
    }
    if table.instances.is_empty() {
        return Err(LossError::EmptyInput);
    }
    if let Some(i) = table.instances.iter().position(Vec::is_empty) {
        return Err(LossError::EmptyInstance(i));
    }
    Ok(())
}

/// Cross-entropy over each AZP's candidate clusters: minus the log
/// probability of every correct candidate, summed over instances.
pub fn loss_azp_resolution(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<f64, LossError> {
    check_table(table, gold)?;
    let mut total = 0.0;
    for (i, (row, g)) in table.instances.iter().zip(gold).enumerate() {
        let mut hit = false;
        for (c, p) in row {
            if g.contains(c) {
                total -= clamp(*p).ln();
                hit = true;
            }
        }
        if !hit {
            return Err(LossError::MissingGold(i));
        }
    }
    Ok(total)
}

pub fn loss_azp_resolution_grad(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<Vec<Vec<f64>>, LossError> {
    loss_azp_resolution(table, gold)?;
    Ok(table
        .instances
        .iter()
        .zip(gold)
        .map(|(row, g)| {
            row.iter()
                .map(|(c, p)| if g.contains(c) && *p == clamp(*p) { -1.0 / p } else { 0.0 })
                .collect()
        })
        .collect())
}

/// Negative marginal log-likelihood of the gold antecedents. Each
/// instance's candidates (null antecedent included) must sum to 1.
pub fn loss_coref_marginal(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<f64, LossError> {
    check_table(table, gold)?;
    for (i, row) in table.instances.iter().enumerate() {
        let sum: f64 = row.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(LossError::NotNormalized { instance: i, sum });
        }
    }
    loss_coref_marginal_unchecked(table, gold)
}

/// [`loss_coref_marginal`] without the normalization check, for
/// perturbed tables.
pub fn loss_coref_marginal_unchecked(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<f64, LossError> {
    check_table(table, gold)?;
    Ok(table
        .instances
        .iter()
        .zip(gold)
        .map(|(row, g)| -gold_mass(row, g).max(EPSILON).ln())
        .sum())
}

fn gold_mass(row: &[(CandidateId, f64)], gold: &BTreeSet<CandidateId>) -> f64 {
    row.iter().filter(|(c, _)| gold.contains(c)).map(|(_, p)| p).sum()
}

pub fn loss_coref_marginal_grad(table: &ProbabilityTable, gold: &[BTreeSet<CandidateId>]) -> Result<Vec<Vec<f64>>, LossError> {
    check_table(table, gold)?;
    Ok(table
        .instances
        .iter()
        .zip(gold)
        .map(|(row, g)| {
            let mass = gold_mass(row, g);
            row.iter()
                .map(|(c, _)| if g.contains(c) && mass > EPSILON { -1.0 / mass } else { 0.0 })
                .collect()
        })
        .collect())
}
