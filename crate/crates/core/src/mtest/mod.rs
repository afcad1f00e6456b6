//! Familywise error control with prior weights.
//!
//! Bonferroni rejects `H_j` when `P_j <= alpha / m`. Weighted Bonferroni
//! rejects when `P_j <= alpha * w_j` for non-negative weights summing to
//! one; the union bound still gives `P(reject any true null) <= alpha`, and
//! uniform weights reproduce Bonferroni exactly.

mod sim;
mod weights;

pub use sim::{fwer_simulate, FwerConfig, Hypothesis};
pub use weights::{optimal_weights, optimal_weights_averaged, OptimalWeights, MIN_MEAN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Probability;

/// Tolerance on `sum(w) == 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("at least one p-value is required"));
        }
        if let Some((j, p)) = values.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::domain(format!("p-value #{} = {p} outside [0, 1]", j + 1)));
        }
        Ok(PValueVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for PValueVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        PValueVector::new(v)
    }
}

impl From<PValueVector> for Vec<f64> {
    fn from(v: PValueVector) -> Self {
        v.0
    }
}

/// Non-negative hypothesis weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("weight vector is empty"));
        }
        if let Some((j, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::domain(format!("weight #{} = {w} must be finite and non-negative", j + 1)));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("weight vector is empty"));
        }
        Ok(WeightVector(vec![1.0 / m as f64; m]))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        WeightVector::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(v: WeightVector) -> Self {
        v.0
    }
}

/// Positive alternative means `theta_j` for one-sided tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MeanVector(Vec<f64>);

impl MeanVector {
    /// Rejects means below [`MIN_MEAN`], where the weight formula's `c/theta`
    /// term is not meaningful.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("mean vector is empty"));
        }
        if let Some((j, t)) = values.iter().enumerate().find(|(_, t)| !(**t >= MIN_MEAN && t.is_finite())) {
            return Err(Error::domain(format!("mean #{} = {t} must be finite and at least {MIN_MEAN:e}", j + 1)));
        }
        Ok(MeanVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for MeanVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MeanVector::new(v)
    }
}

impl From<MeanVector> for Vec<f64> {
    fn from(v: MeanVector) -> Self {
        v.0
    }
}

/// Rejected hypotheses as sorted zero-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RejectionSet {
    pub indices: Vec<usize>,
}

impl RejectionSet {
    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Indices numbered from 1, as hypotheses are usually reported.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|j| j + 1).collect()
    }
}

/// How weighted p-values `P_j / w_j` are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionRule {
    /// `P_j / w_j <= alpha`, i.e. `P_j <= alpha * w_j`. Thresholds sum to
    /// `alpha`, and uniform weights give Bonferroni.
    #[default]
    Weighted,
    /// Bonferroni applied to the weighted p-values: `P_j / w_j <= alpha / m`.
    /// Thresholds sum to `alpha / m`, so strictly more conservative.
    WeightedThenBonferroni,
}

/// Per-hypothesis rejection thresholds on the raw p-values.
pub fn thresholds(weights: &WeightVector, alpha: Probability, rule: RejectionRule) -> Result<Vec<f64>> {
    let a = alpha.require_level("alpha")?;
    let m = weights.m() as f64;
    Ok(weights
        .values()
        .iter()
        .map(|w| match rule {
            RejectionRule::Weighted => a * w,
            RejectionRule::WeightedThenBonferroni => a * w / m,
        })
        .collect())
}

/// Rejects `j` when `thresholds[j] > 0` and `P_j <= thresholds[j]`.
/// A zero threshold never rejects, even at `P_j = 0`.
pub fn reject_below(pvalues: &[f64], thresholds: &[f64]) -> RejectionSet {
    let indices = pvalues
        .iter()
        .zip(thresholds)
        .enumerate()
        .filter(|(_, (p, t))| **t > 0.0 && **p <= **t)
        .map(|(j, _)| j)
        .collect();
    RejectionSet { indices }
}

pub fn bonferroni(pvalues: &PValueVector, alpha: Probability) -> Result<RejectionSet> {
    let a = alpha.require_level("alpha")?;
    let t = a / pvalues.m() as f64;
    Ok(RejectionSet {
        indices: pvalues.values().iter().enumerate().filter(|(_, p)| **p <= t).map(|(j, _)| j).collect(),
    })
}

pub fn weighted_bonferroni(pvalues: &PValueVector, weights: &WeightVector, alpha: Probability) -> Result<RejectionSet> {
    weighted_bonferroni_with(pvalues, weights, alpha, RejectionRule::Weighted)
}

pub fn weighted_bonferroni_with(
    pvalues: &PValueVector,
    weights: &WeightVector,
    alpha: Probability,
    rule: RejectionRule,
) -> Result<RejectionSet> {
    if pvalues.m() != weights.m() {
        return Err(Error::domain(format!("{} p-values but {} weights", pvalues.m(), weights.m())));
    }
    Ok(reject_below(pvalues.values(), &thresholds(weights, alpha, rule)?))
}
