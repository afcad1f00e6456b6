use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered list of finite observations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::domain(format!("sample value #{i} is not finite: {v}")));
        }
        Ok(Sample(values))
    }

    pub fn empty() -> Self {
        Sample(Vec::new())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> Option<f64> {
        self.0.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.0.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.0.is_empty()).then(|| self.sum() / self.0.len() as f64)
    }

    /// Sample standard deviation with `n - 1` divisor; `None` for `n < 2`.
    pub fn sd(&self) -> Option<f64> {
        let n = self.0.len();
        if n < 2 {
            return None;
        }
        let m = self.sum() / n as f64;
        let ss: f64 = self.0.iter().map(|v| (v - m) * (v - m)).sum();
        Some((ss / (n - 1) as f64).sqrt())
    }

    /// A copy with `extra` appended.
    pub fn augmented(&self, extra: f64) -> Result<Sample> {
        let mut v = self.0.clone();
        v.push(extra);
        Sample::new(v)
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Vec<f64> {
        s.0
    }
}

/// Right-continuous empirical CDF backed by a sorted copy of the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &Sample) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::domain("empirical CDF of an empty sample"));
        }
        let mut sorted = sample.values().to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

pub fn ecdf_eval(sample: &Sample, x: f64) -> Result<f64> {
    Ok(EmpiricalCdf::new(sample)?.eval(x))
}
