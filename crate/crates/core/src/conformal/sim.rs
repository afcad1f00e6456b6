//! Seeded Monte Carlo studies of the frequentized and Bayes regions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{posterior_update, pvalue_unchecked, ConjugateNormalModel, PValueVariant};
use super::region::{bayes_predictive_interval, default_grid, prediction_region, PredictionRegion};
use crate::error::{Error, Result};
use crate::report::SimulationReport;
use crate::stats::{draw_normal, NormalParams, Probability, RngSeed, Sample};

/// Data `Y_1..Y_n, Z` i.i.d. from `truth`, analysed with `model`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionSimConfig {
    pub model: ConjugateNormalModel,
    pub truth: NormalParams,
    pub n: usize,
    pub alpha: Probability,
    pub replicates: usize,
}

impl PredictionSimConfig {
    /// Prior `N(0, 1)`, unit noise, `n = 2`, `alpha = 0.05`, truth `N(theta, 1)`.
    pub fn two_point(theta: f64, replicates: usize) -> Self {
        PredictionSimConfig {
            model: ConjugateNormalModel::standard(),
            truth: NormalParams { mean: theta, variance: 1.0 },
            n: 2,
            alpha: Probability::level(0.05).expect("0.05 is a level"),
            replicates,
        }
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.truth.validate()?;
        self.alpha.require_level("alpha")?;
        if self.n == 0 {
            return Err(Error::domain("prediction simulation needs n >= 1"));
        }
        if self.replicates == 0 {
            return Err(Error::domain("prediction simulation needs at least one replicate"));
        }
        Ok(())
    }

    fn draw(&self, seed: &RngSeed) -> (Vec<f64>, f64) {
        let mut rng = seed.rng();
        let ys: Vec<f64> = (0..self.n).map(|_| draw_normal(&mut rng, self.truth)).collect();
        let z = draw_normal(&mut rng, self.truth);
        (ys, z)
    }
}

#[derive(Debug, Clone, Copy)]
struct CoverageHit {
    printed: bool,
    self_inclusive: bool,
    bayes: bool,
}

/// Coverage of the frequentized region (under both p-value variants) and
/// of the Bayes predictive interval. Only `p(Z) >= alpha` is evaluated, no
/// region inversion.
pub fn coverage_simulate(cfg: &PredictionSimConfig, seed: &RngSeed) -> Result<SimulationReport> {
    cfg.validate()?;
    let a = cfg.alpha.get();
    let hits: Vec<CoverageHit> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<CoverageHit> {
            let (ys, z) = cfg.draw(&seed.child(r));
            let sum: f64 = ys.iter().sum();
            let printed = pvalue_unchecked(&cfg.model, &ys, sum, z, PValueVariant::Printed);
            let self_inclusive = pvalue_unchecked(&cfg.model, &ys, sum, z, PValueVariant::SelfInclusive);
            let post = posterior_update(&cfg.model, &Sample::new(ys)?);
            let bayes = bayes_predictive_interval(&post, &cfg.model, cfg.alpha)?;
            Ok(CoverageHit { printed: printed >= a, self_inclusive: self_inclusive >= a, bayes: bayes.contains(z) })
        })
        .collect::<Result<_>>()?;

    let mut report = SimulationReport::new(cfg.replicates, seed, cfg);
    let count = |f: fn(&CoverageHit) -> bool| hits.iter().filter(|h| f(h)).count();
    report.record_proportion("conformal_coverage", count(|h| h.printed), hits.len());
    report.record_proportion("conformal_coverage_self_inclusive", count(|h| h.self_inclusive), hits.len());
    report.record_proportion("bayes_coverage", count(|h| h.bayes), hits.len());
    report.record_exact("nominal", 1.0 - a);
    let n = cfg.n as f64;
    if a <= 1.0 / (n + 1.0) {
        report.warn(format!(
            "alpha = {a} <= 1/(n+1): the printed p-value is 0 with probability 1/(n+1), so its coverage is capped at n/(n+1) = {:.6}",
            n / (n + 1.0)
        ));
    }
    Ok(report)
}

/// Histogram of `(n+1) * p(Z)` over replicates for the printed p-value;
/// entry `k` counts replicates with `p(Z) = k/(n+1)`.
pub fn pvalue_rank_counts(cfg: &PredictionSimConfig, seed: &RngSeed) -> Result<Vec<usize>> {
    cfg.validate()?;
    let ranks: Vec<usize> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let (ys, z) = cfg.draw(&seed.child(r));
            let sum: f64 = ys.iter().sum();
            let p = pvalue_unchecked(&cfg.model, &ys, sum, z, PValueVariant::Printed);
            (p * (cfg.n + 1) as f64).round() as usize
        })
        .collect();
    let mut counts = vec![0; cfg.n + 1];
    for k in ranks {
        counts[k] += 1;
    }
    Ok(counts)
}

/// One replicate of the two-region comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionPair {
    pub sample: Sample,
    pub frequentized: PredictionRegion,
    pub bayes: PredictionRegion,
}

impl RegionPair {
    pub fn compute(model: &ConjugateNormalModel, sample: Sample, alpha: Probability) -> Result<Self> {
        let grid = default_grid(model, &sample)?;
        let frequentized = prediction_region(model, &sample, alpha, &grid)?;
        let bayes = bayes_predictive_interval(&posterior_update(model, &sample), model, alpha)?;
        Ok(RegionPair { sample, frequentized, bayes })
    }
}

pub fn region_pairs(cfg: &PredictionSimConfig, seed: &RngSeed) -> Result<Vec<RegionPair>> {
    cfg.validate()?;
    (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let (ys, _) = cfg.draw(&seed.child(r));
            RegionPair::compute(&cfg.model, Sample::new(ys)?, cfg.alpha)
        })
        .collect()
}

/// Lengths of the frequentized region against the Bayes interval on
/// default grids.
pub fn region_length_simulate(cfg: &PredictionSimConfig, seed: &RngSeed) -> Result<(SimulationReport, Vec<RegionPair>)> {
    let pairs = region_pairs(cfg, seed)?;
    let mut report = SimulationReport::new(cfg.replicates, seed, cfg);
    let longer = pairs.iter().filter(|p| p.frequentized.length() > p.bayes.length()).count();
    let clipped = pairs.iter().filter(|p| p.frequentized.is_clipped()).count();
    let empty = pairs.iter().filter(|p| p.frequentized.is_empty()).count();
    report.record_proportion("frequentized_longer", longer, pairs.len());
    report.record_proportion("frequentized_clipped", clipped, pairs.len());
    report.record_proportion("frequentized_empty", empty, pairs.len());
    let freq: Vec<f64> = pairs.iter().map(|p| p.frequentized.length()).collect();
    let bayes: Vec<f64> = pairs.iter().map(|p| p.bayes.length()).collect();
    report.record_mean("frequentized_length", &freq);
    report.record_mean("bayes_length", &bayes);
    if clipped > 0 {
        report.warn(format!("{clipped} frequentized regions touch the grid boundary"));
    }
    Ok((report, pairs))
}
