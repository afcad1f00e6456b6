use serde::{Deserialize, Serialize};

use super::{MeanVector, WeightVector};
use crate::error::{Error, Result};
use crate::stats::{normal_survivor, Probability};

/// Smallest admissible alternative mean.
pub const MIN_MEAN: f64 = 1e-6;

const MAX_EXPANSIONS: usize = 1100;
const MAX_BISECTIONS: usize = 400;
const C_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;

/// Weights `w_j = (m/alpha) * Phibar(theta_j/2 + c/theta_j)` together with
/// the solved normalizing constant `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalWeights {
    pub weights: WeightVector,
    pub c: f64,
    /// `sum_j w_j(c) - 1` before the final division by the sum.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

fn raw_weight(theta: f64, c: f64, scale: f64) -> f64 {
    scale * normal_survivor(theta / 2.0 + c / theta)
}

/// Optimal one-sided Normal-means weights for alternative means `theta`.
pub fn optimal_weights(means: &MeanVector, alpha: Probability) -> Result<OptimalWeights> {
    let a = alpha.require_level("alpha")?;
    let thetas = means.values();
    let scale = thetas.len() as f64 / a;
    solve(thetas.len(), |c, out: &mut Vec<f64>| {
        out.clear();
        out.extend(thetas.iter().map(|&t| raw_weight(t, c, scale)));
    })
}

/// Averages `w_j(c; theta)` over draws of the mean vector (for example from
/// a prior on the `theta_j`) and solves for the `c` that normalizes the
/// averaged weights.
pub fn optimal_weights_averaged(draws: &[MeanVector], alpha: Probability) -> Result<OptimalWeights> {
    let a = alpha.require_level("alpha")?;
    let Some(first) = draws.first() else {
        return Err(Error::domain("need at least one mean vector"));
    };
    let m = first.m();
    if draws.iter().any(|d| d.m() != m) {
        return Err(Error::domain("mean vectors differ in length"));
    }
    let scale = m as f64 / a;
    let k = draws.len() as f64;
    solve(m, |c, out: &mut Vec<f64>| {
        out.clear();
        out.resize(m, 0.0);
        for d in draws {
            for (o, &t) in out.iter_mut().zip(d.values()) {
                *o += raw_weight(t, c, scale);
            }
        }
        out.iter_mut().for_each(|o| *o /= k);
    })
}

/// Bisection on the strictly decreasing `c -> sum_j w_j(c) - 1`, starting
/// from `[-1, 1]` and doubling each end until it brackets the root.
fn solve(m: usize, weights_at: impl Fn(f64, &mut Vec<f64>)) -> Result<OptimalWeights> {
    let mut buf = Vec::with_capacity(m);
    let mut excess = |c: f64| -> f64 {
        weights_at(c, &mut buf);
        buf.iter().sum::<f64>() - 1.0
    };
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let (mut f_lo, mut f_hi) = (excess(lo), excess(hi));
    let mut expansions = 0;
    while !(f_lo > 0.0 && f_hi < 0.0) {
        if expansions == MAX_EXPANSIONS || !lo.is_finite() || !hi.is_finite() || f_lo.is_nan() || f_hi.is_nan() {
            return Err(Error::Solver {
                message: format!("could not bracket the normalizing constant after {expansions} expansions"),
                lo,
                hi,
                f_lo,
                f_hi,
            });
        }
        if f_lo <= 0.0 {
            lo *= 2.0;
            f_lo = excess(lo);
        }
        if f_hi >= 0.0 {
            hi *= 2.0;
            f_hi = excess(hi);
        }
        expansions += 1;
    }
    let bracket = (lo, hi);

    let mut best = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = excess(mid);
        iterations += 1;
        if f.abs() < best.1.abs() {
            best = (mid, f);
        }
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= C_TOL * lo.abs().max(hi.abs()).max(1.0) && best.1.abs() <= SUM_TOL {
            break;
        }
    }
    let (c, residual) = best;
    if residual.abs() > SUM_TOL {
        return Err(Error::Solver {
            message: format!("bisection stalled with weight-sum residual {residual:e}"),
            lo,
            hi,
            f_lo: excess(lo),
            f_hi: excess(hi),
        });
    }
    weights_at(c, &mut buf);
    let total: f64 = buf.iter().sum();
    let weights = WeightVector::new(buf.iter().map(|w| w / total).collect())?;
    Ok(OptimalWeights { weights, c, residual, bracket, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(a: f64) -> Probability {
        Probability::level(a).unwrap()
    }

    #[test]
    fn equal_means_give_uniform_weights() {
        for (m, theta) in [(1, 0.3), (4, 2.0), (50, 1e-3), (200, 7.5)] {
            let means = MeanVector::new(vec![theta; m]).unwrap();
            let w = optimal_weights(&means, level(0.05)).unwrap();
            for &x in w.weights.values() {
                assert!((x - 1.0 / m as f64).abs() < 1e-10, "m={m} theta={theta}");
            }
        }
    }

    #[test]
    fn residual_and_sum() {
        let means = MeanVector::new(vec![0.5, 1.0, 3.0, 4.0, 0.01]).unwrap();
        let w = optimal_weights(&means, level(0.1)).unwrap();
        assert!(w.residual.abs() <= 1e-10);
        assert!((w.weights.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.bracket.0 < w.c && w.c < w.bracket.1);
    }

    #[test]
    fn permutation_equivariant() {
        let t = vec![0.7, 2.5, 1.2, 3.3];
        let perm = [2, 0, 3, 1];
        let w = optimal_weights(&MeanVector::new(t.clone()).unwrap(), level(0.05)).unwrap();
        let tp: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
        let wp = optimal_weights(&MeanVector::new(tp).unwrap(), level(0.05)).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert!((wp.weights.values()[k] - w.weights.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_one_draw_is_plain() {
        let means = MeanVector::new(vec![1.0, 2.0, 0.4]).unwrap();
        let plain = optimal_weights(&means, level(0.05)).unwrap();
        let avg = optimal_weights_averaged(std::slice::from_ref(&means), level(0.05)).unwrap();
        assert_eq!(plain.weights, avg.weights);
        assert!(optimal_weights_averaged(&[], level(0.05)).is_err());
        let short = MeanVector::new(vec![1.0]).unwrap();
        assert!(optimal_weights_averaged(&[means, short], level(0.05)).is_err());
    }

    #[test]
    fn tiny_means_still_solve() {
        let means = MeanVector::new(vec![MIN_MEAN, 1.0, 5.0]).unwrap();
        let w = optimal_weights(&means, level(0.05)).unwrap();
        assert!(w.residual.abs() <= 1e-10);
    }
}
