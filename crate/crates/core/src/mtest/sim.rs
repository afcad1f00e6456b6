use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{reject_below, thresholds, RejectionRule, WeightVector};
use crate::error::{Error, Result};
use crate::report::SimulationReport;
use crate::stats::{normal_survivor, Probability, RngSeed};
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "theta")]
pub enum Hypothesis {
    Null,
    Alt(f64),
}

impl Hypothesis {
    fn mean(self) -> f64 {
        match self {
            Hypothesis::Null => 0.0,
            Hypothesis::Alt(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerConfig {
    pub truth: Vec<Hypothesis>,
    pub weights: WeightVector,
    pub alpha: Probability,
    pub rule: RejectionRule,
    pub replicates: usize,
}

/// Draws `Z_j ~ N(mean_j, 1)`, forms one-sided p-values `Phibar(Z_j)` and
/// applies weighted Bonferroni. Reports the familywise error rate and,
/// when there are alternatives, the average fraction of them rejected.
pub fn fwer_simulate(cfg: &FwerConfig, seed: &RngSeed) -> Result<SimulationReport> {
    if cfg.replicates < 1000 {
        return Err(Error::domain(format!("FWER simulation needs at least 1000 replicates, got {}", cfg.replicates)));
    }
    if cfg.truth.len() != cfg.weights.m() {
        return Err(Error::domain(format!("{} hypotheses but {} weights", cfg.truth.len(), cfg.weights.m())));
    }
    if cfg.truth.iter().any(|h| !h.mean().is_finite()) {
        return Err(Error::domain("alternative means must be finite"));
    }
    let t = thresholds(&cfg.weights, cfg.alpha, cfg.rule)?;
    let alternatives = cfg.truth.iter().filter(|h| matches!(h, Hypothesis::Alt(_))).count();

    let outcomes: Vec<(bool, usize, usize)> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed.child(r).rng();
            let pvalues: Vec<f64> = cfg
                .truth
                .iter()
                .map(|h| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    normal_survivor(h.mean() + z)
                })
                .collect();
            let rejected = reject_below(&pvalues, &t);
            let false_rejections = rejected.indices.iter().filter(|&&j| cfg.truth[j] == Hypothesis::Null).count();
            let true_rejections = rejected.len() - false_rejections;
            (false_rejections > 0, true_rejections, rejected.len())
        })
        .collect();

    let mut report = SimulationReport::new(cfg.replicates, seed, cfg);
    let errors = outcomes.iter().filter(|o| o.0).count();
    report.record_proportion("fwer", errors, outcomes.len());
    report.record_exact("alpha", cfg.alpha.get());
    report.record_exact("threshold_sum", t.iter().sum());
    let rejections: Vec<f64> = outcomes.iter().map(|o| o.2 as f64).collect();
    report.record_mean("mean_rejections", &rejections);
    if alternatives > 0 {
        let power: Vec<f64> = outcomes.iter().map(|o| o.1 as f64 / alternatives as f64).collect();
        report.record_mean("power", &power);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(truth: Vec<Hypothesis>, replicates: usize) -> FwerConfig {
        let m = truth.len();
        FwerConfig {
            truth,
            weights: WeightVector::uniform(m).unwrap(),
            alpha: Probability::level(0.05).unwrap(),
            rule: RejectionRule::Weighted,
            replicates,
        }
    }

    #[test]
    fn no_alternatives_means_no_power() {
        let r = fwer_simulate(&cfg(vec![Hypothesis::Null; 10], 1000), &RngSeed::new(1)).unwrap();
        assert!(r.estimate("power").is_none());
        assert!(r.estimate("fwer").unwrap() <= 0.05 + 2.0 * r.se("fwer").unwrap());
        assert!(r.is_consistent());
    }

    #[test]
    fn strong_alternatives_are_found() {
        let truth = vec![Hypothesis::Alt(8.0), Hypothesis::Alt(8.0), Hypothesis::Null];
        let r = fwer_simulate(&cfg(truth, 1000), &RngSeed::new(2)).unwrap();
        assert!(r.estimate("power").unwrap() > 0.99);
    }

    #[test]
    fn config_errors() {
        assert!(fwer_simulate(&cfg(vec![Hypothesis::Null; 3], 999), &RngSeed::new(1)).is_err());
        let mut c = cfg(vec![Hypothesis::Null; 3], 1000);
        c.weights = WeightVector::uniform(2).unwrap();
        assert!(fwer_simulate(&c, &RngSeed::new(1)).is_err());
    }
}
