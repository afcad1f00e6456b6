use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dp::{dp_posterior, dp_posterior_band, posterior_content, BaseMeasure, DpPrior, DEFAULT_TRUNCATION};
use super::{band_grid, dkw_band, BandMethod};
use crate::error::{Error, Result};
use crate::report::SimulationReport;
use crate::stats::{sample_normal, NormalParams, Probability, RngSeed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpBandConfig {
    pub base: NormalParams,
    pub concentration: f64,
    /// Posterior draws used to set the band radius.
    pub draws: usize,
    pub truncation: usize,
    /// Fresh draws per replicate for the posterior-content check; 0 skips it.
    pub content_draws: usize,
}

impl Default for DpBandConfig {
    fn default() -> Self {
        DpBandConfig {
            base: NormalParams::standard(),
            concentration: 10.0,
            draws: 1000,
            truncation: DEFAULT_TRUNCATION,
            content_draws: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandCoverageConfig {
    pub method: BandMethod,
    pub truth: NormalParams,
    pub n: usize,
    pub alpha: Probability,
    pub replicates: usize,
    pub dp: Option<DpBandConfig>,
}

struct ReplicateOutcome {
    covered: bool,
    radius: f64,
    content: Option<f64>,
    max_residual: f64,
    under_truncated: usize,
}

/// Frequentist coverage of a band: draw `n` points from `truth`, build the
/// band on [`band_grid`], and check `lower <= F_true <= upper` at every
/// node. Replicate `r` uses seed path `r/0` for data, `r/1` for band draws
/// and `r/2` for the posterior-content check.
pub fn band_coverage(cfg: &BandCoverageConfig, seed: &RngSeed) -> Result<SimulationReport> {
    cfg.truth.validate()?;
    cfg.alpha.require_level("alpha")?;
    if cfg.replicates < 100 {
        return Err(Error::domain(format!("band coverage needs at least 100 replicates, got {}", cfg.replicates)));
    }
    if cfg.n == 0 {
        return Err(Error::domain("band coverage needs n >= 1"));
    }
    let dp = match (cfg.method, cfg.dp) {
        (BandMethod::DpPosterior, None) => return Err(Error::domain("DP band coverage needs a DP configuration")),
        (BandMethod::DpPosterior, Some(dp)) => Some(dp),
        (BandMethod::Dkw, _) => None,
    };
    let prior = dp
        .map(|d| DpPrior::new(BaseMeasure::Normal { params: d.base }, d.concentration))
        .transpose()?;

    let outcomes: Vec<ReplicateOutcome> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<ReplicateOutcome> {
            let rs = seed.child(r);
            let sample = sample_normal(cfg.truth, cfg.n, &rs.child(0))?;
            let grid = band_grid(&sample)?;
            match (&prior, dp) {
                (Some(prior), Some(d)) => {
                    let post = dp_posterior(prior, &sample)?;
                    let b = dp_posterior_band(&post, cfg.alpha, d.draws, d.truncation, &grid, &rs.child(1))?;
                    let content = (d.content_draws > 0)
                        .then(|| posterior_content(&post, &b.band, d.content_draws, d.truncation, &rs.child(2)))
                        .transpose()?;
                    Ok(ReplicateOutcome {
                        covered: b.band.contains_cdf(|x| cfg.truth.cdf(x)),
                        radius: b.band.radius,
                        content,
                        max_residual: b.max_residual,
                        under_truncated: b.under_truncated_draws,
                    })
                }
                _ => {
                    let band = dkw_band(&sample, cfg.alpha, &grid)?;
                    Ok(ReplicateOutcome {
                        covered: band.contains_cdf(|x| cfg.truth.cdf(x)),
                        radius: band.radius,
                        content: None,
                        max_residual: 0.0,
                        under_truncated: 0,
                    })
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut report = SimulationReport::new(cfg.replicates, seed, cfg);
    let covered = outcomes.iter().filter(|o| o.covered).count();
    report.record_proportion("coverage", covered, outcomes.len());
    report.record_exact("nominal", 1.0 - cfg.alpha.get());
    let radii: Vec<f64> = outcomes.iter().map(|o| o.radius).collect();
    match cfg.method {
        BandMethod::Dkw => report.record_exact("radius", radii[0]),
        BandMethod::DpPosterior => report.record_mean("radius", &radii),
    }
    if let Some(d) = dp {
        let contents: Vec<f64> = outcomes.iter().filter_map(|o| o.content).collect();
        if !contents.is_empty() {
            report.record_mean("posterior_content", &contents);
        }
        let max_residual = outcomes.iter().map(|o| o.max_residual).fold(0.0, f64::max);
        report.record_exact("max_truncation_residual", max_residual);
        report.record_exact("base_weight", d.concentration / (d.concentration + cfg.n as f64));
        let flagged: usize = outcomes.iter().map(|o| o.under_truncated).sum();
        if flagged > 0 {
            report.warn(format!(
                "{flagged} posterior draws left stick mass >= 1e-6 after {} breaks (max {max_residual:.3e}); residual mass sits on one extra base atom",
                d.truncation
            ));
        }
    }
    Ok(report)
}

/// Re-runs [`band_coverage`] with the truth mean moved to each of `shifts`,
/// tracking how coverage changes as the truth moves away from `F_0`.
pub fn dp_shift_sweep(cfg: &BandCoverageConfig, shifts: &[f64], seed: &RngSeed) -> Result<Vec<(f64, SimulationReport)>> {
    shifts
        .iter()
        .enumerate()
        .map(|(i, &shift)| {
            let mut c = *cfg;
            c.truth.mean = shift;
            Ok((shift, band_coverage(&c, &seed.child(i as u64))?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dkw_cfg(replicates: usize) -> BandCoverageConfig {
        BandCoverageConfig {
            method: BandMethod::Dkw,
            truth: NormalParams::standard(),
            n: 50,
            alpha: Probability::level(0.1).unwrap(),
            replicates,
            dp: None,
        }
    }

    #[test]
    fn dkw_coverage_in_unit_interval() {
        let r = band_coverage(&dkw_cfg(300), &RngSeed::new(1)).unwrap();
        let c = r.estimate("coverage").unwrap();
        assert!((0.0..=1.0).contains(&c));
        assert!(c >= 0.9 - 2.0 * r.se("coverage").unwrap());
        assert!(r.is_consistent());
    }

    #[test]
    fn config_errors() {
        assert!(band_coverage(&dkw_cfg(99), &RngSeed::new(1)).is_err());
        let mut c = dkw_cfg(100);
        c.method = BandMethod::DpPosterior;
        assert!(band_coverage(&c, &RngSeed::new(1)).is_err());
    }

    #[test]
    fn dp_report_fields() {
        let mut c = dkw_cfg(100);
        c.method = BandMethod::DpPosterior;
        c.n = 20;
        c.dp = Some(DpBandConfig { draws: 100, truncation: 200, content_draws: 20, ..Default::default() });
        let r = band_coverage(&c, &RngSeed::new(2)).unwrap();
        for key in ["coverage", "posterior_content", "radius", "max_truncation_residual", "base_weight"] {
            assert!(r.estimate(key).is_some(), "{key}");
        }
        assert!(r.is_consistent());
        assert_eq!(r, band_coverage(&c, &RngSeed::new(2)).unwrap());
    }
}
