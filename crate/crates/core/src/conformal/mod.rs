//! Conformalized Bayesian prediction.
//!
//! The posterior predictive density of a conjugate Normal model serves as
//! the test statistic for `H0: Z = z`. For each candidate `z` the sample is
//! augmented with `z`, the predictive density under the augmented posterior
//! is evaluated at every point, and the rank of the new point's density
//! gives a p-value. Inverting the test yields the frequentized region
//! `{z : p(z) >= alpha}`; the ordinary Bayes predictive interval is provided
//! alongside for comparison.

mod model;
mod region;
pub mod sim;

pub use model::{
    conformal_pvalue, conformal_pvalue_with, discrepancies, posterior_update, predictive_density,
    ConjugateNormalModel, PValueVariant, PosteriorState, PredictiveDensity,
};
pub use region::{
    bayes_predictive_interval, default_grid, prediction_region, prediction_region_with, pvalue_breakpoints,
    pvalue_curve, region_from_curve, GridSpec, Interval, PredictionRegion, RegionMethod,
    RegionWarning, DEFAULT_GRID_POINTS, DEFAULT_GRID_HALF_WIDTH,
};
