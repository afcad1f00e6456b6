//! Bayesian procedures that keep frequentist guarantees.
//!
//! Three constructions live here, on top of a small numerical substrate
//! ([`stats`]):
//!
//! - [`conformal`]: prediction regions obtained by inverting a test whose
//!   statistic is the Bayesian posterior predictive density. The region has
//!   finite-sample coverage whatever the prior.
//! - [`bands`]: DKW confidence bands for a CDF next to Dirichlet-process
//!   posterior bands, plus a coverage simulator contrasting the two.
//! - [`mtest`]: Bonferroni and weighted-Bonferroni familywise error control
//!   with the optimal one-sided Normal-means weights.
//!
//! Every stochastic routine takes an explicit [`RngSeed`]; results do not
//! depend on thread count.

pub mod bands;
pub mod conformal;
pub mod error;
pub mod mtest;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
pub use report::SimulationReport;
pub use stats::{NormalParams, Probability, RngSeed, Sample};
