use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{normal_pdf, NormalParams, Sample};

/// Normal likelihood with known noise variance and a Normal prior on the
/// mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateNormalModel {
    pub prior: NormalParams,
    pub noise_variance: f64,
}

impl ConjugateNormalModel {
    pub fn new(prior: NormalParams, noise_variance: f64) -> Result<Self> {
        let m = ConjugateNormalModel { prior, noise_variance };
        m.validate()?;
        Ok(m)
    }

    /// Prior `N(0, 1)` and unit noise variance.
    pub fn standard() -> Self {
        ConjugateNormalModel { prior: NormalParams::standard(), noise_variance: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.prior.validate()?;
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(Error::domain(format!(
                "noise variance {} must be positive and finite",
                self.noise_variance
            )));
        }
        Ok(())
    }

    pub fn prior_state(&self) -> PosteriorState {
        PosteriorState { post_mean: self.prior.mean, post_variance: self.prior.variance, n: 0 }
    }

    /// Posterior after observing `n` values summing to `sum`.
    pub(crate) fn update_from_stats(&self, sum: f64, n: usize) -> PosteriorState {
        if n == 0 {
            return self.prior_state();
        }
        let precision = self.prior.variance.recip() + n as f64 / self.noise_variance;
        let post_variance = precision.recip();
        let post_mean =
            post_variance * (self.prior.mean / self.prior.variance + sum / self.noise_variance);
        PosteriorState { post_mean, post_variance, n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub post_mean: f64,
    pub post_variance: f64,
    pub n: usize,
}

impl PosteriorState {
    pub fn predictive(&self, model: &ConjugateNormalModel) -> PredictiveDensity {
        PredictiveDensity {
            mean: self.post_mean,
            variance: self.post_variance + model.noise_variance,
        }
    }
}

/// The posterior predictive law of one new observation, `N(mean, variance)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDensity {
    pub mean: f64,
    pub variance: f64,
}

impl PredictiveDensity {
    pub fn params(&self) -> NormalParams {
        NormalParams { mean: self.mean, variance: self.variance }
    }

    pub fn density(&self, z: f64) -> Result<f64> {
        normal_pdf(z, self.params())
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn posterior_update(model: &ConjugateNormalModel, sample: &Sample) -> PosteriorState {
    model.update_from_stats(sample.sum(), sample.len())
}

pub fn predictive_density(post: &PosteriorState, model: &ConjugateNormalModel, z: f64) -> Result<f64> {
    post.predictive(model).density(z)
}

/// How the new point's own discrepancy enters the rank count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PValueVariant {
    /// `(1/(n+1)) * #{i <= n : D_i <= D_{n+1}}`. Takes values in
    /// `{0, 1/(n+1), ..., n/(n+1)}`.
    #[default]
    Printed,
    /// Also counts `i = n + 1`, so `p >= 1/(n+1)` always. This is the usual
    /// full-conformal p-value and is the one with `P(p(Z) <= a) <= a`.
    SelfInclusive,
}

/// Discrepancies `D_1, ..., D_{n+1}`: the predictive density under the
/// posterior of the augmented sample `(Y_1, ..., Y_n, z)`, evaluated at
/// each augmented point. The last entry belongs to `z`.
pub fn discrepancies(model: &ConjugateNormalModel, sample: &Sample, z: f64) -> Result<Vec<f64>> {
    let augmented = sample.augmented(z)?;
    let pred = posterior_update(model, &augmented).predictive(model);
    augmented.values().iter().map(|&y| pred.density(y)).collect()
}

pub fn conformal_pvalue(model: &ConjugateNormalModel, sample: &Sample, z: f64) -> Result<f64> {
    conformal_pvalue_with(model, sample, z, PValueVariant::Printed)
}

pub fn conformal_pvalue_with(
    model: &ConjugateNormalModel,
    sample: &Sample,
    z: f64,
    variant: PValueVariant,
) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::domain("conformal p-value needs at least one observation"));
    }
    if !z.is_finite() {
        return Err(Error::domain(format!("candidate value {z} is not finite")));
    }
    Ok(pvalue_unchecked(model, sample.values(), sample.sum(), z, variant))
}

/// Hot path for grid sweeps and simulations. Inputs are assumed validated.
///
/// The predictive density is a strictly decreasing function of the squared
/// distance to the predictive mean, so `D_i <= D_{n+1}` is decided on
/// distances. This is the same ordering without underflow to zero for far
/// candidates.
pub(crate) fn pvalue_unchecked(
    model: &ConjugateNormalModel,
    ys: &[f64],
    sum: f64,
    z: f64,
    variant: PValueVariant,
) -> f64 {
    let n = ys.len();
    let center = model.update_from_stats(sum + z, n + 1).post_mean;
    let dz = (z - center) * (z - center);
    let mut count = ys.iter().filter(|&&y| (y - center) * (y - center) >= dz).count();
    if variant == PValueVariant::SelfInclusive {
        count += 1;
    }
    count as f64 / (n + 1) as f64
}
