use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::{check_grid, BandMethod, CdfBand};
use crate::error::{Error, Result};
use crate::stats::{draw_normal, EmpiricalCdf, NormalParams, Probability, RngSeed, Sample};

pub const DEFAULT_TRUNCATION: usize = 1000;
/// Leftover stick mass above which a draw is flagged as under-truncated.
pub const RESIDUAL_FLAG: f64 = 1e-6;

/// Base measure `F_0` of a Dirichlet process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum BaseMeasure {
    Normal { params: NormalParams },
    Empirical { sample: Sample },
}

impl BaseMeasure {
    fn validate(&self) -> Result<()> {
        match self {
            BaseMeasure::Normal { params } => params.validate(),
            BaseMeasure::Empirical { sample } if sample.is_empty() => {
                Err(Error::domain("empirical base measure needs at least one atom"))
            }
            BaseMeasure::Empirical { .. } => Ok(()),
        }
    }

    fn sampler(&self) -> Result<AtomSource> {
        self.validate()?;
        Ok(match self {
            BaseMeasure::Normal { params } => AtomSource::Normal(*params),
            BaseMeasure::Empirical { sample } => AtomSource::Atoms(EmpiricalCdf::new(sample)?),
        })
    }
}

/// Something atoms can be drawn from and whose CDF can be evaluated.
#[derive(Debug, Clone)]
enum AtomSource {
    Normal(NormalParams),
    Atoms(EmpiricalCdf),
}

impl AtomSource {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            AtomSource::Normal(p) => p.cdf(x),
            AtomSource::Atoms(e) => e.eval(x),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            AtomSource::Normal(p) => draw_normal(rng, *p),
            AtomSource::Atoms(e) => e.sorted()[rng.random_range(0..e.len())],
        }
    }
}

/// `DP(F_0, beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpPrior {
    pub base: BaseMeasure,
    pub concentration: f64,
}

impl DpPrior {
    pub fn new(base: BaseMeasure, concentration: f64) -> Result<Self> {
        base.validate()?;
        if !(concentration > 0.0 && concentration.is_finite()) {
            return Err(Error::domain(format!("concentration {concentration} must be positive and finite")));
        }
        Ok(DpPrior { base, concentration })
    }
}

/// `DP(Fbar_n, beta + n)` with `Fbar_n = w F_0 + (1 - w) F_n`,
/// `w = beta / (beta + n)`.
#[derive(Debug, Clone)]
pub struct DpPosterior {
    base: AtomSource,
    base_weight: f64,
    empirical: Option<EmpiricalCdf>,
    concentration: f64,
}

pub fn dp_posterior(prior: &DpPrior, sample: &Sample) -> Result<DpPosterior> {
    let prior = DpPrior::new(prior.base.clone(), prior.concentration)?;
    let n = sample.len() as f64;
    let empirical = if sample.is_empty() { None } else { Some(EmpiricalCdf::new(sample)?) };
    Ok(DpPosterior {
        base: prior.base.sampler()?,
        base_weight: prior.concentration / (prior.concentration + n),
        empirical,
        concentration: prior.concentration + n,
    })
}

impl DpPosterior {
    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    /// Mixture weight on `F_0`; the empirical CDF gets the rest.
    pub fn base_weight(&self) -> f64 {
        self.base_weight
    }

    pub fn empirical_weight(&self) -> f64 {
        if self.empirical.is_some() {
            1.0 - self.base_weight
        } else {
            0.0
        }
    }

    /// Posterior mean CDF `Fbar_n(x)`.
    pub fn mean_cdf(&self, x: f64) -> f64 {
        match &self.empirical {
            Some(e) => self.base_weight * self.base.cdf(x) + (1.0 - self.base_weight) * e.eval(x),
            None => self.base.cdf(x),
        }
    }

    fn draw_atom<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.empirical {
            Some(e) if rng.random::<f64>() >= self.base_weight => e.sorted()[rng.random_range(0..e.len())],
            _ => self.base.draw(rng),
        }
    }
}

/// A discrete distribution: sorted atoms and their cumulative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCdf {
    atoms: Vec<f64>,
    cumulative: Vec<f64>,
    total_mass: f64,
}

impl DiscreteCdf {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() || atoms.is_empty() {
            return Err(Error::domain("atoms and weights must be non-empty and of equal length"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("atoms must be finite and weights non-negative"));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut running = 0.0;
        let (atoms, mut cumulative): (Vec<f64>, Vec<f64>) = pairs
            .into_iter()
            .map(|(a, w)| {
                running += w;
                (a, running)
            })
            .unzip();
        if !(running > 0.0) {
            return Err(Error::domain("discrete distribution has zero total mass"));
        }
        // Renormalize so the CDF ends at exactly 1; summation error would
        // otherwise leave it a few ulps above.
        cumulative.iter_mut().for_each(|c| *c = (*c / running).min(1.0));
        Ok(DiscreteCdf { atoms, cumulative, total_mass: running })
    }

    /// Sum of the weights as supplied, before renormalization.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.atoms.partition_point(|&a| a <= x) {
            0 => 0.0,
            k => self.cumulative[k - 1],
        }
    }

    /// Evaluates on an ascending grid in one merge pass.
    pub fn eval_sorted(&self, grid: &[f64]) -> Vec<f64> {
        let mut k = 0;
        grid.iter()
            .map(|&x| {
                while k < self.atoms.len() && self.atoms[k] <= x {
                    k += 1;
                }
                if k == 0 {
                    0.0
                } else {
                    self.cumulative[k - 1]
                }
            })
            .collect()
    }
}

/// One truncated stick-breaking realization.
#[derive(Debug, Clone)]
pub struct DpDraw {
    pub cdf: DiscreteCdf,
    /// Stick mass left after `K` breaks, placed on one extra atom.
    pub residual: f64,
}

impl DpDraw {
    pub fn under_truncated(&self) -> bool {
        self.residual >= RESIDUAL_FLAG
    }
}

/// Stick-breaking with `Beta(1, beta + n)` sticks and atoms from `Fbar_n`.
pub fn sample_dp(posterior: &DpPosterior, truncation: usize, seed: &RngSeed) -> Result<DpDraw> {
    if truncation == 0 {
        return Err(Error::domain("stick-breaking truncation must be at least 1"));
    }
    let sticks = Beta::new(1.0, posterior.concentration)
        .map_err(|e| Error::domain(format!("stick distribution: {e}")))?;
    let mut rng = seed.rng();
    let mut atoms = Vec::with_capacity(truncation + 1);
    let mut weights = Vec::with_capacity(truncation + 1);
    let mut remaining = 1.0;
    for _ in 0..truncation {
        let v: f64 = sticks.sample(&mut rng);
        weights.push(remaining * v);
        remaining *= 1.0 - v;
        atoms.push(posterior.draw_atom(&mut rng));
    }
    atoms.push(posterior.draw_atom(&mut rng));
    weights.push(remaining);
    Ok(DpDraw { cdf: DiscreteCdf::new(atoms, weights)?, residual: remaining })
}

/// A posterior sup-norm band plus the diagnostics of the draws behind it.
#[derive(Debug, Clone)]
pub struct DpBand {
    pub band: CdfBand,
    pub max_residual: f64,
    pub under_truncated_draws: usize,
    pub draws: usize,
}

/// Band `Fbar_n +- r`, clipped to `[0, 1]`, where `r` is the
/// `ceil((1 - alpha)(M + 1))`-th smallest sup-norm distance between `M`
/// posterior draws and `Fbar_n` on `grid`.
pub fn dp_posterior_band(
    posterior: &DpPosterior,
    alpha: Probability,
    draws: usize,
    truncation: usize,
    grid: &[f64],
    seed: &RngSeed,
) -> Result<DpBand> {
    let a = alpha.require_level("alpha")?;
    check_grid(grid)?;
    if draws < 100 {
        return Err(Error::domain(format!("posterior band needs at least 100 draws, got {draws}")));
    }
    let center: Vec<f64> = grid.iter().map(|&x| posterior.mean_cdf(x)).collect();
    let mut deviations = Vec::with_capacity(draws);
    let mut max_residual: f64 = 0.0;
    let mut under_truncated = 0;
    for m in 0..draws as u64 {
        let draw = sample_dp(posterior, truncation, &seed.child(m))?;
        max_residual = max_residual.max(draw.residual);
        under_truncated += usize::from(draw.under_truncated());
        let values = draw.cdf.eval_sorted(grid);
        let dev = values.iter().zip(&center).map(|(g, c)| (g - c).abs()).fold(0.0, f64::max);
        deviations.push(dev);
    }
    deviations.sort_by(f64::total_cmp);
    let rank = ((1.0 - a) * (draws + 1) as f64).ceil() as usize;
    let radius = deviations[rank.clamp(1, draws) - 1];
    Ok(DpBand {
        band: CdfBand::around(center, radius, grid.to_vec(), alpha, BandMethod::DpPosterior),
        max_residual,
        under_truncated_draws: under_truncated,
        draws,
    })
}

/// Fraction of `draws` fresh posterior realizations lying inside `band` at
/// every grid node.
pub fn posterior_content(
    posterior: &DpPosterior,
    band: &CdfBand,
    draws: usize,
    truncation: usize,
    seed: &RngSeed,
) -> Result<f64> {
    if draws == 0 {
        return Err(Error::domain("posterior content check needs at least one draw"));
    }
    let mut inside = 0;
    for m in 0..draws as u64 {
        let draw = sample_dp(posterior, truncation, &seed.child(m))?;
        inside += usize::from(band.contains_values(&draw.cdf.eval_sorted(&band.grid)));
    }
    Ok(inside as f64 / draws as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bands::band_grid;
    use crate::stats::sample_normal;

    fn normal_prior(beta: f64) -> DpPrior {
        DpPrior::new(BaseMeasure::Normal { params: NormalParams::standard() }, beta).unwrap()
    }

    #[test]
    fn empty_sample_gives_prior() {
        let post = dp_posterior(&normal_prior(3.0), &Sample::empty()).unwrap();
        assert_eq!(post.concentration(), 3.0);
        assert_eq!(post.base_weight(), 1.0);
        assert_eq!(post.empirical_weight(), 0.0);
        assert_eq!(post.mean_cdf(0.0), 0.5);
    }

    #[test]
    fn mixture_weights() {
        let s = Sample::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let post = dp_posterior(&normal_prior(4.0), &s).unwrap();
        assert_eq!(post.base_weight(), 0.5);
        assert_eq!(post.empirical_weight(), 0.5);
        assert_eq!(post.concentration(), 8.0);
        assert!((post.mean_cdf(2.5) - (0.5 * crate::stats::normal_cdf(2.5) + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn vanishing_concentration_recovers_ecdf() {
        let s = sample_normal(NormalParams::new(2.0, 1.0).unwrap(), 30, &RngSeed::new(1)).unwrap();
        let post = dp_posterior(&normal_prior(1e-9), &s).unwrap();
        let e = EmpiricalCdf::new(&s).unwrap();
        for x in band_grid(&s).unwrap() {
            assert!((post.mean_cdf(x) - e.eval(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn prior_validation() {
        let base = BaseMeasure::Normal { params: NormalParams::standard() };
        assert!(DpPrior::new(base.clone(), 0.0).is_err());
        assert!(DpPrior::new(base, f64::INFINITY).is_err());
        assert!(DpPrior::new(BaseMeasure::Empirical { sample: Sample::empty() }, 1.0).is_err());
    }

    #[test]
    fn empirical_base_draws_only_its_atoms() {
        let atoms = Sample::new(vec![-1.0, 0.5, 7.0]).unwrap();
        let prior = DpPrior::new(BaseMeasure::Empirical { sample: atoms.clone() }, 2.0).unwrap();
        let post = dp_posterior(&prior, &Sample::empty()).unwrap();
        let draw = sample_dp(&post, 50, &RngSeed::new(3)).unwrap();
        assert!(draw.cdf.atoms().iter().all(|a| atoms.values().contains(a)));
        assert!((draw.cdf.eval(7.0) - 1.0).abs() < 1e-12);
        assert_eq!(draw.cdf.eval(-1.5), 0.0);
    }

    #[test]
    fn stick_weights_sum_to_one() {
        let s = Sample::new(vec![0.1, 0.2]).unwrap();
        let post = dp_posterior(&normal_prior(5.0), &s).unwrap();
        for (i, k) in [1usize, 5, 100, 1000].into_iter().enumerate() {
            let d = sample_dp(&post, k, &RngSeed::new(11).child(i as u64)).unwrap();
            assert!((d.cdf.total_mass() - 1.0).abs() < 1e-9);
        }
        assert!(sample_dp(&post, 0, &RngSeed::new(1)).is_err());
    }

    #[test]
    fn residual_flag_and_truncation_rule() {
        let s = Sample::new(vec![0.0; 3]).unwrap();
        let post = dp_posterior(&normal_prior(7.0), &s).unwrap();
        let k = 50 * (1 + post.concentration() as usize);
        for i in 0..20 {
            let d = sample_dp(&post, k, &RngSeed::new(2).child(i)).unwrap();
            assert!(d.residual < RESIDUAL_FLAG, "residual {}", d.residual);
        }
        let d = sample_dp(&post, 2, &RngSeed::new(2)).unwrap();
        assert!(d.under_truncated());
    }

    #[test]
    fn eval_sorted_matches_eval() {
        let d = DiscreteCdf::new(vec![2.0, -1.0, 0.5, 0.5], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let grid = [-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 9.0];
        let merged = d.eval_sorted(&grid);
        for (x, v) in grid.iter().zip(merged) {
            assert_eq!(d.eval(*x), v);
        }
        assert!((d.eval(0.5) - 0.9).abs() < 1e-15);
        assert!(DiscreteCdf::new(vec![1.0], vec![-0.1]).is_err());
        assert!(DiscreteCdf::new(vec![], vec![]).is_err());
        assert!(DiscreteCdf::new(vec![1.0], vec![0.0]).is_err());
        let d = DiscreteCdf::new(vec![0.0, 1.0, 2.0], vec![0.1, 0.2, 0.7000000000000002]).unwrap();
        assert_eq!(d.eval(2.0), 1.0);
    }

    #[test]
    fn huge_concentration_hugs_the_mean() {
        let s = Sample::new(vec![0.5, -0.5]).unwrap();
        let post = dp_posterior(&normal_prior(1e5), &s).unwrap();
        let grid = band_grid(&s).unwrap();
        let d = sample_dp(&post, 1_000_000, &RngSeed::new(8)).unwrap();
        assert!(d.residual < 1e-4);
        let dev = grid.iter().map(|&x| (d.cdf.eval(x) - post.mean_cdf(x)).abs()).fold(0.0, f64::max);
        assert!(dev < 0.05, "sup deviation {dev}");
    }

    #[test]
    fn band_shape() {
        let s = sample_normal(NormalParams::standard(), 25, &RngSeed::new(5)).unwrap();
        let post = dp_posterior(&normal_prior(2.0), &s).unwrap();
        let grid = band_grid(&s).unwrap();
        let alpha = Probability::level(0.1).unwrap();
        let b = dp_posterior_band(&post, alpha, 200, 300, &grid, &RngSeed::new(6)).unwrap();
        let band = &b.band;
        for k in 0..grid.len() {
            assert!((band.center[k] - post.mean_cdf(grid[k])).abs() < 1e-15);
            assert!(band.lower[k] <= band.center[k] && band.center[k] <= band.upper[k]);
            assert!((band.lower[k] - (band.center[k] - band.radius).max(0.0)).abs() < 1e-15);
        }
        assert!(band.lower.windows(2).all(|w| w[0] <= w[1]));
        assert!(band.upper.windows(2).all(|w| w[0] <= w[1]));
        assert!(dp_posterior_band(&post, alpha, 99, 300, &grid, &RngSeed::new(6)).is_err());
    }
}
