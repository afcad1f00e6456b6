use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::stats::RngSeed;

/// Summary of a seeded Monte Carlo run.
///
/// Every entry of `estimates` carries either a standard error or a name in
/// `exact`; [`SimulationReport::is_consistent`] checks that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub estimates: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub exact: BTreeSet<String>,
    pub replicates: usize,
    pub seed: RngSeed,
    pub config: serde_json::Value,
    pub warnings: Vec<String>,
}

impl SimulationReport {
    pub fn new<C: Serialize>(replicates: usize, seed: &RngSeed, config: &C) -> Self {
        SimulationReport {
            estimates: BTreeMap::new(),
            standard_errors: BTreeMap::new(),
            exact: BTreeSet::new(),
            replicates,
            seed: seed.clone(),
            config: serde_json::to_value(config).unwrap_or(serde_json::Value::Null),
            warnings: Vec::new(),
        }
    }

    pub fn record(&mut self, name: &str, estimate: f64, se: f64) {
        self.estimates.insert(name.to_string(), estimate);
        self.standard_errors.insert(name.to_string(), se);
    }

    /// Binomial proportion with its plug-in standard error.
    pub fn record_proportion(&mut self, name: &str, successes: usize, trials: usize) {
        let (p, se) = proportion(successes, trials);
        self.record(name, p, se);
    }

    /// Mean of per-replicate values with the standard error of the mean.
    pub fn record_mean(&mut self, name: &str, values: &[f64]) {
        let (m, se) = mean_se(values);
        self.record(name, m, se);
    }

    pub fn record_exact(&mut self, name: &str, value: f64) {
        self.estimates.insert(name.to_string(), value);
        self.exact.insert(name.to_string());
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).copied()
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.standard_errors.get(name).copied()
    }

    pub fn is_consistent(&self) -> bool {
        self.estimates
            .keys()
            .all(|k| self.standard_errors.contains_key(k) != self.exact.contains(k))
    }
}

pub fn proportion(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, f64::NAN);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}
