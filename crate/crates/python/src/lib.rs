//! Python module `frasian`: conformal prediction regions, CDF bands and
//! weighted Bonferroni on top of `frasian-core`.

use frasian_core::bands::{self, BaseMeasure, CdfBand, DpPrior};
use frasian_core::conformal::{self, sim::PredictionSimConfig, ConjugateNormalModel, GridSpec, PValueVariant};
use frasian_core::mtest::{self, FwerConfig, Hypothesis, MeanVector, PValueVector, RejectionRule, WeightVector};
use frasian_core::{Error, NormalParams, Probability, RngSeed, Sample, SimulationReport};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Solver { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for frasian_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn level(alpha: f64) -> PyResult<Probability> {
    Probability::level(alpha).py()
}

fn sample(values: Vec<f64>) -> PyResult<Sample> {
    Sample::new(values).py()
}

fn variant(self_inclusive: bool) -> PValueVariant {
    if self_inclusive {
        PValueVariant::SelfInclusive
    } else {
        PValueVariant::Printed
    }
}

/// Conjugate Normal model: `theta ~ N(prior_mean, prior_var)`,
/// `Y | theta ~ N(theta, noise_var)`.
#[pyclass(name = "ConjugateNormalModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: ConjugateNormalModel,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (prior_mean = 0.0, prior_var = 1.0, noise_var = 1.0))]
    fn new(prior_mean: f64, prior_var: f64, noise_var: f64) -> PyResult<Self> {
        let prior = NormalParams::new(prior_mean, prior_var).py()?;
        Ok(PyModel { inner: ConjugateNormalModel::new(prior, noise_var).py()? })
    }

    #[getter]
    fn prior_mean(&self) -> f64 {
        self.inner.prior.mean
    }

    #[getter]
    fn prior_var(&self) -> f64 {
        self.inner.prior.variance
    }

    #[getter]
    fn noise_var(&self) -> f64 {
        self.inner.noise_variance
    }

    /// `(post_mean, post_var)` after observing `ys`.
    fn posterior(&self, ys: Vec<f64>) -> PyResult<(f64, f64)> {
        let post = conformal::posterior_update(&self.inner, &sample(ys)?);
        Ok((post.post_mean, post.post_variance))
    }

    /// `(mean, var)` of the posterior predictive for the next observation.
    fn predictive(&self, ys: Vec<f64>) -> PyResult<(f64, f64)> {
        let pred = conformal::posterior_update(&self.inner, &sample(ys)?).predictive(&self.inner);
        Ok((pred.mean, pred.variance))
    }

    #[pyo3(signature = (ys, z, self_inclusive = false))]
    fn pvalue(&self, ys: Vec<f64>, z: f64, self_inclusive: bool) -> PyResult<f64> {
        conformal::conformal_pvalue_with(&self.inner, &sample(ys)?, z, variant(self_inclusive)).py()
    }

    /// Frequentized region `{z : p(z) >= alpha}`. The grid defaults to one
    /// covering every p-value breakpoint; pass `grid=(lo, hi, step)` to override.
    #[pyo3(signature = (ys, alpha = 0.05, grid = None, self_inclusive = false))]
    fn region(
        &self,
        ys: Vec<f64>,
        alpha: f64,
        grid: Option<(f64, f64, f64)>,
        self_inclusive: bool,
    ) -> PyResult<Region> {
        let s = sample(ys)?;
        let grid = match grid {
            Some((lo, hi, step)) => GridSpec::new(lo, hi, step).py()?,
            None => conformal::default_grid(&self.inner, &s).py()?,
        };
        let r = conformal::prediction_region_with(&self.inner, &s, level(alpha)?, &grid, variant(self_inclusive)).py()?;
        Ok(Region::from(r))
    }

    /// Central `1 - alpha` posterior predictive interval.
    #[pyo3(signature = (ys, alpha = 0.05))]
    fn bayes_interval(&self, ys: Vec<f64>, alpha: f64) -> PyResult<Region> {
        let post = conformal::posterior_update(&self.inner, &sample(ys)?);
        Ok(Region::from(conformal::bayes_predictive_interval(&post, &self.inner, level(alpha)?).py()?))
    }

    fn __repr__(&self) -> String {
        format!(
            "ConjugateNormalModel(prior_mean={}, prior_var={}, noise_var={})",
            self.inner.prior.mean, self.inner.prior.variance, self.inner.noise_variance
        )
    }
}

/// A union of closed intervals.
#[pyclass(frozen, get_all, skip_from_py_object)]
struct Region {
    intervals: Vec<(f64, f64)>,
    length: f64,
    empty: bool,
    clipped: bool,
}

impl From<conformal::PredictionRegion> for Region {
    fn from(r: conformal::PredictionRegion) -> Self {
        Region {
            intervals: r.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect(),
            length: r.length(),
            empty: r.is_empty(),
            clipped: r.is_clipped(),
        }
    }
}

#[pymethods]
impl Region {
    fn __contains__(&self, z: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= z && z <= hi)
    }

    fn __repr__(&self) -> String {
        format!("Region(intervals={:?}, length={})", self.intervals, self.length)
    }
}

fn band_dict<'py>(py: Python<'py>, band: &CdfBand) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", &band.grid)?;
    d.set_item("lower", &band.lower)?;
    d.set_item("center", &band.center)?;
    d.set_item("upper", &band.upper)?;
    d.set_item("radius", band.radius)?;
    Ok(d)
}

#[pyfunction]
fn dkw_epsilon(n: usize, alpha: f64) -> PyResult<f64> {
    bands::dkw_epsilon(n, level(alpha)?).py()
}

/// DKW band on the default evaluation grid: dict with `x`, `lower`,
/// `center` (the ECDF), `upper` and `radius`.
#[pyfunction]
#[pyo3(signature = (ys, alpha = 0.05))]
fn dkw_band<'py>(py: Python<'py>, ys: Vec<f64>, alpha: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = sample(ys)?;
    let grid = bands::band_grid(&s).py()?;
    band_dict(py, &bands::dkw_band(&s, level(alpha)?, &grid).py()?)
}

/// Dirichlet-process posterior band under `DP(N(base_mean, base_var), beta)`.
/// Adds `max_residual` and `under_truncated_draws` to the band dict.
#[pyfunction]
#[pyo3(signature = (ys, beta, alpha = 0.05, base_mean = 0.0, base_var = 1.0, draws = 1000, truncation = 1000, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn dp_band<'py>(
    py: Python<'py>,
    ys: Vec<f64>,
    beta: f64,
    alpha: f64,
    base_mean: f64,
    base_var: f64,
    draws: usize,
    truncation: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = sample(ys)?;
    let base = BaseMeasure::Normal { params: NormalParams::new(base_mean, base_var).py()? };
    let post = bands::dp_posterior(&DpPrior::new(base, beta).py()?, &s).py()?;
    let grid = bands::band_grid(&s).py()?;
    let alpha = level(alpha)?;
    let dp = py.detach(|| bands::dp_posterior_band(&post, alpha, draws, truncation, &grid, &RngSeed::new(seed))).py()?;
    let d = band_dict(py, &dp.band)?;
    d.set_item("max_residual", dp.max_residual)?;
    d.set_item("under_truncated_draws", dp.under_truncated_draws)?;
    Ok(d)
}

/// `(weights, c)` for one-sided Normal alternatives with means `thetas`.
#[pyfunction]
#[pyo3(signature = (thetas, alpha = 0.05))]
fn optimal_weights(thetas: Vec<f64>, alpha: f64) -> PyResult<(Vec<f64>, f64)> {
    let w = mtest::optimal_weights(&MeanVector::new(thetas).py()?, level(alpha)?).py()?;
    Ok((w.weights.values().to_vec(), w.c))
}

/// Zero-based indices rejected by weighted Bonferroni (uniform weights when
/// `weights` is None).
#[pyfunction]
#[pyo3(signature = (pvalues, weights = None, alpha = 0.05, literal_rule = false))]
fn weighted_bonferroni(pvalues: Vec<f64>, weights: Option<Vec<f64>>, alpha: f64, literal_rule: bool) -> PyResult<Vec<usize>> {
    let p = PValueVector::new(pvalues).py()?;
    let w = match weights {
        Some(w) => WeightVector::new(w).py()?,
        None => WeightVector::uniform(p.m()).py()?,
    };
    let rule = if literal_rule { RejectionRule::WeightedThenBonferroni } else { RejectionRule::Weighted };
    Ok(mtest::weighted_bonferroni_with(&p, &w, level(alpha)?, rule).py()?.indices)
}

fn report_dict<'py>(py: Python<'py>, r: &SimulationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimates", &r.estimates)?;
    d.set_item("standard_errors", &r.standard_errors)?;
    d.set_item("replicates", r.replicates)?;
    d.set_item("warnings", &r.warnings)?;
    Ok(d)
}

/// Coverage of the frequentized and Bayes regions when data come from
/// `N(theta, noise_var)`.
#[pyfunction]
#[pyo3(signature = (theta, model = None, n = 2, alpha = 0.05, replicates = 10_000, seed = 1))]
fn coverage_simulate<'py>(
    py: Python<'py>,
    theta: f64,
    model: Option<PyModel>,
    n: usize,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = PredictionSimConfig::two_point(theta, replicates);
    if let Some(m) = model {
        cfg.model = m.inner;
        cfg.truth = NormalParams::new(theta, m.inner.noise_variance).py()?;
    }
    cfg.n = n;
    cfg.alpha = level(alpha)?;
    let report = py.detach(|| conformal::sim::coverage_simulate(&cfg, &RngSeed::new(seed))).py()?;
    report_dict(py, &report)
}

/// Familywise error (and power, when `alt_means` has nonzero entries) of
/// weighted Bonferroni; a zero mean marks a true null.
#[pyfunction]
#[pyo3(signature = (alt_means, weights = None, alpha = 0.05, replicates = 10_000, seed = 1))]
fn fwer_simulate<'py>(
    py: Python<'py>,
    alt_means: Vec<f64>,
    weights: Option<Vec<f64>>,
    alpha: f64,
    replicates: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let weights = match weights {
        Some(w) => WeightVector::new(w).py()?,
        None => WeightVector::uniform(alt_means.len()).py()?,
    };
    let truth = alt_means.iter().map(|&t| if t == 0.0 { Hypothesis::Null } else { Hypothesis::Alt(t) }).collect();
    let cfg = FwerConfig { truth, weights, alpha: level(alpha)?, rule: RejectionRule::Weighted, replicates };
    let report = py.detach(|| mtest::fwer_simulate(&cfg, &RngSeed::new(seed))).py()?;
    report_dict(py, &report)
}

#[pymodule]
pub fn frasian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<Region>()?;
    m.add_function(wrap_pyfunction!(dkw_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(dkw_band, m)?)?;
    m.add_function(wrap_pyfunction!(dp_band, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_weights, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(coverage_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fwer_simulate, m)?)?;
    Ok(())
}
