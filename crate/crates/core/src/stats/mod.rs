//! Numerical substrate: Gaussian special functions, seeded sampling and
//! the empirical CDF.

mod normal;
mod rng;
mod sample;

pub use normal::{normal_cdf, normal_pdf, normal_quantile, normal_survivor};
pub use rng::{draw_normal, sample_beta, sample_normal, sample_uniform, RngSeed, SeededRng};
pub use sample::{ecdf_eval, EmpiricalCdf, Sample};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability {value} outside [0, 1]")))
        }
    }

    /// Like [`Probability::new`] but additionally rejects the endpoints, as
    /// needed for significance levels.
    pub fn level(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("level {value} must lie strictly inside (0, 1)")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub(crate) fn require_level(self, what: &str) -> Result<f64> {
        if self.0 > 0.0 && self.0 < 1.0 {
            Ok(self.0)
        } else {
            Err(Error::domain(format!("{what} = {} must lie strictly inside (0, 1)", self.0)))
        }
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Mean and variance of a Normal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalParams {
    pub mean: f64,
    pub variance: f64,
}

impl NormalParams {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        let p = NormalParams { mean, variance };
        p.validate()?;
        Ok(p)
    }

    pub fn standard() -> Self {
        NormalParams { mean: 0.0, variance: 1.0 }
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::domain(format!("normal mean {} is not finite", self.mean)));
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::domain(format!(
                "normal variance {} must be positive and finite",
                self.variance
            )));
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.sd())
    }
}
