use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{posterior_update, pvalue_unchecked, ConjugateNormalModel, PValueVariant, PosteriorState};
use crate::error::{Error, Result};
use crate::stats::{normal_quantile, Probability, Sample};

pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Half-width of the default grid beyond the data, in predictive SDs.
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 6.0;

/// Equally spaced evaluation grid `lo, lo + step, ...` up to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let g = GridSpec { lo, hi, step };
        g.validate()?;
        Ok(g)
    }

    /// Grid with exactly `points` nodes, the first at `lo` and the last at `hi`.
    pub fn with_points(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(Error::domain(format!("grid needs at least 3 points, got {points}")));
        }
        GridSpec::new(lo, hi, (hi - lo) / (points - 1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) {
            return Err(Error::domain("grid bounds and step must be finite"));
        }
        if !(self.lo < self.hi) {
            return Err(Error::domain(format!("grid lo {} must be below hi {}", self.lo, self.hi)));
        }
        if !(self.step > 0.0) || (self.hi - self.lo) / self.step < 2.0 {
            return Err(Error::domain(format!(
                "grid step {} must be positive and leave at least 2 steps in [{}, {}]",
                self.step, self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

/// Points where `p(z)` can change value.
///
/// With augmented posterior mean `mu(z) = a + b z`, the comparison
/// `|Y_i - mu(z)| >= |z - mu(z)|` flips only at `z = Y_i` and at the
/// reflection `z = (2a - Y_i) / (1 - 2b)`. Beyond all breakpoints `p` is 0.
/// Sorted ascending.
pub fn pvalue_breakpoints(model: &ConjugateNormalModel, sample: &Sample) -> Vec<f64> {
    let n = sample.len();
    let aug = model.update_from_stats(sample.sum(), n + 1);
    let b = aug.post_variance / model.noise_variance;
    let a = aug.post_mean;
    let mut points: Vec<f64> = sample
        .values()
        .iter()
        .flat_map(|&y| [y, (2.0 * a - y) / (1.0 - 2.0 * b)])
        .collect();
    points.sort_by(f64::total_cmp);
    points
}

/// Default sweep: every p-value breakpoint (the data and their
/// reflections) widened by six predictive SDs on each side, 2001 nodes.
pub fn default_grid(model: &ConjugateNormalModel, sample: &Sample) -> Result<GridSpec> {
    if sample.is_empty() {
        return Err(Error::domain("default grid needs at least one observation"));
    }
    model.validate()?;
    let s_pred = posterior_update(model, sample).predictive(model).sd();
    let points = pvalue_breakpoints(model, sample);
    GridSpec::with_points(
        points[0] - DEFAULT_GRID_HALF_WIDTH * s_pred,
        points[points.len() - 1] + DEFAULT_GRID_HALF_WIDTH * s_pred,
        DEFAULT_GRID_POINTS,
    )
}

/// Closed interval `[lo, hi]`; `lo == hi` is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionMethod {
    Frequentized,
    Bayes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionWarning {
    /// No grid point was accepted.
    Empty,
    /// An accepted run reaches the first or last grid node, so the true
    /// region may extend past the grid.
    BoundaryClipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRegion {
    pub intervals: Vec<Interval>,
    pub alpha: Probability,
    pub grid: Option<GridSpec>,
    pub method: RegionMethod,
    pub warnings: Vec<RegionWarning>,
}

impl PredictionRegion {
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_clipped(&self) -> bool {
        self.warnings.contains(&RegionWarning::BoundaryClipped)
    }
}

/// `p(z)` at every grid node, in grid order.
pub fn pvalue_curve(
    model: &ConjugateNormalModel,
    sample: &Sample,
    grid: &GridSpec,
    variant: PValueVariant,
) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    grid.validate()?;
    if sample.is_empty() {
        return Err(Error::domain("conformal p-value needs at least one observation"));
    }
    let ys = sample.values();
    let sum = sample.sum();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|k| {
            let z = grid.point(k);
            (z, pvalue_unchecked(model, ys, sum, z, variant))
        })
        .collect())
}

/// Merges maximal runs of accepted nodes (`p >= alpha`) into intervals.
pub fn region_from_curve(curve: &[(f64, f64)], alpha: Probability, grid: Option<GridSpec>) -> PredictionRegion {
    let a = alpha.get();
    let mut intervals = Vec::new();
    let mut clipped = false;
    let mut run: Option<(usize, usize)> = None;
    let last = curve.len().saturating_sub(1);
    for (k, &(_, p)) in curve.iter().enumerate() {
        if p >= a {
            run = Some(match run {
                Some((start, _)) => (start, k),
                None => (k, k),
            });
        } else if let Some((s, e)) = run.take() {
            intervals.push(Interval { lo: curve[s].0, hi: curve[e].0 });
            clipped |= s == 0;
        }
    }
    if let Some((s, e)) = run {
        intervals.push(Interval { lo: curve[s].0, hi: curve[e].0 });
        clipped |= s == 0 || e == last;
    }
    let mut warnings = Vec::new();
    if intervals.is_empty() {
        warnings.push(RegionWarning::Empty);
    }
    if clipped {
        warnings.push(RegionWarning::BoundaryClipped);
    }
    PredictionRegion { intervals, alpha, grid, method: RegionMethod::Frequentized, warnings }
}

/// The frequentized region `{z : p(z) >= alpha}` on `grid`.
pub fn prediction_region(
    model: &ConjugateNormalModel,
    sample: &Sample,
    alpha: Probability,
    grid: &GridSpec,
) -> Result<PredictionRegion> {
    prediction_region_with(model, sample, alpha, grid, PValueVariant::Printed)
}

pub fn prediction_region_with(
    model: &ConjugateNormalModel,
    sample: &Sample,
    alpha: Probability,
    grid: &GridSpec,
    variant: PValueVariant,
) -> Result<PredictionRegion> {
    alpha.require_level("alpha")?;
    let curve = pvalue_curve(model, sample, grid, variant)?;
    let mut region = region_from_curve(&curve, alpha, Some(*grid));
    snap_to_breakpoints(&mut region, model, sample, grid, variant);
    Ok(region)
}

/// Moves each interval endpoint from its grid node to the exact edge of the
/// accepted set inside the neighbouring grid cell. `p` is constant between
/// breakpoints and `{p >= alpha}` is closed (each count indicator is a
/// non-strict inequality between continuous functions), so the edge is the
/// first breakpoint past which `p` drops. `p` is not evaluated at the
/// breakpoint itself: at a reflection the tie is decided by rounding.
fn snap_to_breakpoints(
    region: &mut PredictionRegion,
    model: &ConjugateNormalModel,
    sample: &Sample,
    grid: &GridSpec,
    variant: PValueVariant,
) {
    let ys = sample.values();
    let sum = sample.sum();
    let a = region.alpha.get();
    let accepted = |z: f64| pvalue_unchecked(model, ys, sum, z, variant) >= a;
    let breaks = pvalue_breakpoints(model, sample);
    let last = grid.len() - 1;
    let node = |z: f64| ((z - grid.lo) / grid.step).round() as usize;

    for iv in &mut region.intervals {
        let k = node(iv.hi);
        if k < last {
            let next = grid.point(k + 1);
            let inside: Vec<f64> = breaks.iter().copied().filter(|&b| b > iv.hi && b < next).collect();
            for (i, &b) in inside.iter().enumerate() {
                let until = inside.get(i + 1).copied().unwrap_or(next);
                iv.hi = b;
                if !accepted(0.5 * (b + until)) {
                    break;
                }
            }
        }
        let k = node(iv.lo);
        if k > 0 {
            let prev = grid.point(k - 1);
            let inside: Vec<f64> = breaks.iter().rev().copied().filter(|&b| b < iv.lo && b > prev).collect();
            for (i, &b) in inside.iter().enumerate() {
                let until = inside.get(i + 1).copied().unwrap_or(prev);
                iv.lo = b;
                if !accepted(0.5 * (b + until)) {
                    break;
                }
            }
        }
    }
}

/// Central `1 - alpha` interval of the posterior predictive. For a Normal
/// predictive this is also the highest-density set.
pub fn bayes_predictive_interval(
    post: &PosteriorState,
    model: &ConjugateNormalModel,
    alpha: Probability,
) -> Result<PredictionRegion> {
    let a = alpha.require_level("alpha")?;
    let pred = post.predictive(model);
    let half = normal_quantile(1.0 - a / 2.0)? * pred.sd();
    Ok(PredictionRegion {
        intervals: vec![Interval { lo: pred.mean - half, hi: pred.mean + half }],
        alpha,
        grid: None,
        method: RegionMethod::Bayes,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::NormalParams;
    use crate::conformal::conformal_pvalue;

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    fn alpha(a: f64) -> Probability {
        Probability::level(a).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 0.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.6).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.0).is_err());
        let g = GridSpec::new(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = GridSpec::with_points(0.0, 10.0, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert!((g.point(2000) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_above_max_pvalue_gives_empty_region() {
        let m = ConjugateNormalModel::standard();
        let s = sample(&[0.4, -1.2]);
        let g = default_grid(&m, &s).unwrap();
        let r = prediction_region(&m, &s, alpha(0.75), &g).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.warnings, vec![RegionWarning::Empty]);
        assert_eq!(r.length(), 0.0);
    }

    #[test]
    fn region_contains_the_data() {
        let m = ConjugateNormalModel::standard();
        for s in [sample(&[0.1, -0.3]), sample(&[4.2, 5.9]), sample(&[-2.0, 2.0]), sample(&[5.2, 4.7])] {
            let g = default_grid(&m, &s).unwrap();
            let r = prediction_region(&m, &s, alpha(0.05), &g).unwrap();
            for &y in s.values() {
                assert!(r.contains(y), "{y} not in {:?}", r.intervals);
            }
            assert!(!r.is_clipped());
        }
    }

    #[test]
    fn grid_reaches_reflections_under_prior_conflict() {
        // One datum far from a tight prior: the region is [-y, y], the datum
        // reflected through the prior mean.
        let m = ConjugateNormalModel::new(NormalParams::new(0.0, 0.1).unwrap(), 0.1).unwrap();
        let s = sample(&[4.453196468083626]);
        let bp = pvalue_breakpoints(&m, &s);
        assert!((bp[0] + 4.453196468083626).abs() < 1e-12);
        let g = default_grid(&m, &s).unwrap();
        let r = prediction_region(&m, &s, alpha(0.01), &g).unwrap();
        assert!(!r.is_clipped());
        assert_eq!(r.intervals.len(), 1);
        assert!((r.intervals[0].lo - bp[0]).abs() <= g.step);
        assert!((r.intervals[0].hi - bp[1]).abs() <= g.step);
    }

    #[test]
    fn pvalue_constant_between_breakpoints() {
        let m = ConjugateNormalModel::new(NormalParams::new(0.5, 0.3).unwrap(), 1.7).unwrap();
        let s = sample(&[-2.0, 0.4, 3.5]);
        let bp = pvalue_breakpoints(&m, &s);
        for w in bp.windows(2) {
            let probe = |t: f64| {
                let z = w[0] + t * (w[1] - w[0]);
                super::super::model::conformal_pvalue(&m, &s, z).unwrap()
            };
            assert_eq!(probe(0.1), probe(0.5));
            assert_eq!(probe(0.5), probe(0.9));
        }
        let beyond = |z| super::super::model::conformal_pvalue(&m, &s, z).unwrap();
        assert_eq!(beyond(bp[0] - 1e-6 - 1.0), 0.0);
        assert_eq!(beyond(bp[bp.len() - 1] + 1.0), 0.0);
    }

    #[test]
    fn endpoints_are_exact_breakpoints() {
        // Region for (5.2, 4.7) at alpha = 0.05 is {p >= 1/3} = [(2a - 5.2)/(1 - 2b), 5.2].
        let m = ConjugateNormalModel::standard();
        let s = sample(&[5.2, 4.7]);
        let g = default_grid(&m, &s).unwrap();
        let r = prediction_region(&m, &s, alpha(0.05), &g).unwrap();
        let breaks = pvalue_breakpoints(&m, &s);
        assert_eq!(r.intervals.len(), 1);
        assert_eq!(r.intervals[0].hi, 5.2);
        assert!(breaks.contains(&r.intervals[0].lo));
        assert!(conformal_pvalue(&m, &s, r.intervals[0].lo + 1e-9).unwrap() >= 0.05);
        assert!(conformal_pvalue(&m, &s, r.intervals[0].lo - 1e-9).unwrap() < 0.05);
    }

    #[test]
    fn nesting_in_alpha() {
        let m = ConjugateNormalModel::new(NormalParams::new(1.0, 0.5).unwrap(), 2.0).unwrap();
        let s = sample(&[0.3, 2.2, -1.4, 4.0, 1.1]);
        let g = default_grid(&m, &s).unwrap();
        let curve = pvalue_curve(&m, &s, &g, PValueVariant::Printed).unwrap();
        let alphas = [0.01, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8];
        let regions: Vec<_> = alphas.iter().map(|&a| region_from_curve(&curve, alpha(a), Some(g))).collect();
        for w in regions.windows(2) {
            for &(z, _) in &curve {
                if w[1].contains(z) {
                    assert!(w[0].contains(z));
                }
            }
        }
    }

    #[test]
    fn run_assembly() {
        let pts = |ps: &[f64]| -> Vec<(f64, f64)> { ps.iter().enumerate().map(|(k, &p)| (k as f64, p)).collect() };
        let r = region_from_curve(&pts(&[0.0, 0.5, 0.5, 0.0, 0.5, 0.0]), alpha(0.1), None);
        assert_eq!(r.intervals, vec![Interval { lo: 1.0, hi: 2.0 }, Interval { lo: 4.0, hi: 4.0 }]);
        assert!(r.warnings.is_empty());
        let r = region_from_curve(&pts(&[0.5, 0.0, 0.5]), alpha(0.1), None);
        assert_eq!(r.warnings, vec![RegionWarning::BoundaryClipped]);
        assert_eq!(r.intervals.len(), 2);
    }

    #[test]
    fn self_inclusive_region_covers_grid_at_small_alpha() {
        // p >= 1/(n+1) > alpha everywhere, so the whole grid is accepted.
        let m = ConjugateNormalModel::standard();
        let s = sample(&[0.1, -0.3]);
        let g = default_grid(&m, &s).unwrap();
        let r = prediction_region_with(&m, &s, alpha(0.05), &g, PValueVariant::SelfInclusive).unwrap();
        assert_eq!(r.intervals.len(), 1);
        assert!(r.is_clipped());
    }

    #[test]
    fn bayes_prior_only_interval() {
        let m = ConjugateNormalModel::standard();
        let r = bayes_predictive_interval(&m.prior_state(), &m, alpha(0.05)).unwrap();
        let iv = r.intervals[0];
        assert!((iv.hi - 2.7718).abs() < 1e-3);
        assert_eq!(iv.lo, -iv.hi);
        let widths: Vec<f64> = [0.01, 0.05, 0.1, 0.5]
            .iter()
            .map(|&a| bayes_predictive_interval(&m.prior_state(), &m, alpha(a)).unwrap().length())
            .collect();
        assert!(widths.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn bayes_interval_symmetric_about_posterior_mean() {
        let m = ConjugateNormalModel::standard();
        let post = posterior_update(&m, &sample(&[5.0, 5.0]));
        let iv = bayes_predictive_interval(&post, &m, alpha(0.05)).unwrap().intervals[0];
        assert!(((iv.lo + iv.hi) / 2.0 - post.post_mean).abs() < 1e-12);
        assert!(bayes_predictive_interval(&post, &m, Probability::new(1.0).unwrap()).is_err());
    }
}
