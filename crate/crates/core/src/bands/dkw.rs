use super::{check_grid, BandMethod, CdfBand};
use crate::error::{Error, Result};
use crate::stats::{EmpiricalCdf, Probability, Sample};

/// Half-width `sqrt(log(2/alpha) / (2n))`, the value at which the DKW
/// bound `2 exp(-2 n eps^2)` equals `alpha`.
pub fn dkw_epsilon(n: usize, alpha: Probability) -> Result<f64> {
    let a = alpha.require_level("alpha")?;
    if n == 0 {
        return Err(Error::domain("DKW epsilon needs n >= 1"));
    }
    Ok(((2.0 / a).ln() / (2.0 * n as f64)).sqrt())
}

pub fn dkw_band(sample: &Sample, alpha: Probability, grid: &[f64]) -> Result<CdfBand> {
    check_grid(grid)?;
    let ecdf = EmpiricalCdf::new(sample)?;
    let eps = dkw_epsilon(sample.len(), alpha)?;
    let center = grid.iter().map(|&x| ecdf.eval(x)).collect();
    Ok(CdfBand::around(center, eps, grid.to_vec(), alpha, BandMethod::Dkw))
}
