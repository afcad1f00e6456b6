//! Confidence bands for a CDF.
//!
//! The DKW band `F_n +- eps_n` has coverage at least `1 - alpha` for every
//! `F`. The Dirichlet-process band is built around the posterior mean
//! `Fbar_n = beta/(beta+n) F_0 + n/(beta+n) F_n` with a radius taken from
//! posterior draws; it holds `1 - alpha` posterior mass but its frequentist
//! coverage depends on how far `F_0` sits from the truth.
//! [`band_coverage`] measures both in one pass.

mod coverage;
mod dkw;
mod dp;

pub use coverage::{band_coverage, dp_shift_sweep, BandCoverageConfig, DpBandConfig};
pub use dkw::{dkw_band, dkw_epsilon};
pub use dp::{
    dp_posterior, dp_posterior_band, posterior_content, sample_dp, BaseMeasure, DiscreteCdf,
    DpBand, DpDraw, DpPosterior, DpPrior, DEFAULT_TRUNCATION, RESIDUAL_FLAG,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{Probability, Sample};

/// Number of equally spaced nodes in [`band_grid`].
pub const BAND_GRID_POINTS: usize = 512;
/// Half-width beyond the data range of [`band_grid`], in sample SDs.
pub const BAND_GRID_SDS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandMethod {
    Dkw,
    DpPosterior,
}

/// Pointwise envelope `lower <= F <= upper` on a sorted grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfBand {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    /// Empirical CDF for DKW, posterior mean CDF for the DP band.
    pub center: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha: Probability,
    pub method: BandMethod,
    /// Half-width before clipping to `[0, 1]`.
    pub radius: f64,
}

impl CdfBand {
    pub(crate) fn around(center: Vec<f64>, radius: f64, grid: Vec<f64>, alpha: Probability, method: BandMethod) -> Self {
        let lower = center.iter().map(|c| (c - radius).max(0.0)).collect();
        let upper = center.iter().map(|c| (c + radius).min(1.0)).collect();
        CdfBand { grid, lower, center, upper, alpha, method, radius }
    }

    /// Whether `values[k]` (a CDF evaluated on the band grid) lies inside
    /// the band at every node.
    pub fn contains_values(&self, values: &[f64]) -> bool {
        values
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn contains_cdf(&self, cdf: impl Fn(f64) -> f64) -> bool {
        self.grid
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&x, (l, u))| {
                let f = cdf(x);
                *l <= f && f <= *u
            })
    }
}

/// Evaluation grid for a sample: every observation together with its left
/// neighbour float (the left limit of a jump) and the points half a grid
/// step either side, merged with 512 equally spaced nodes spanning the data
/// range widened by four sample SDs. Sorted, without duplicates.
pub fn band_grid(sample: &Sample) -> Result<Vec<f64>> {
    let (Some(min), Some(max)) = (sample.min(), sample.max()) else {
        return Err(Error::domain("band grid needs at least one observation"));
    };
    let sd = sample.sd().filter(|s| *s > 0.0).unwrap_or(1.0);
    let lo = min - BAND_GRID_SDS * sd;
    let hi = max + BAND_GRID_SDS * sd;
    let step = (hi - lo) / (BAND_GRID_POINTS - 1) as f64;
    let mut grid: Vec<f64> = (0..BAND_GRID_POINTS).map(|k| lo + k as f64 * step).collect();
    grid.reserve(4 * sample.len());
    for &x in sample.values() {
        grid.extend([x, x.next_down(), x - 0.5 * step, x + 0.5 * step]);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("band grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("band grid contains a non-finite point"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("band grid must be sorted ascending"));
    }
    Ok(())
}
