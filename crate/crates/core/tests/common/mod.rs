//! Independent reference implementations. None of these call into the
//! library's numerical paths.

#![allow(dead_code)]

use std::f64::consts::PI;

/// erf by the all-positive series `2/sqrt(pi) e^{-x^2} sum 2^k x^{2k+1} / (2k+1)!!`.
fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > 1e-17 * sum.abs() {
        k += 1.0;
        term *= 2.0 * x * x / (2.0 * k + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x * x).exp() * sum
}

/// erfc for x > 0 by the continued fraction
/// `e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))`,
/// evaluated with modified Lentz.
fn erfc_cf(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / PI.sqrt() / f
}

pub fn erfc_oracle(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc_oracle(-x)
    } else if x < 3.0 {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

pub fn phi_oracle(x: f64) -> f64 {
    0.5 * erfc_oracle(-x / 2f64.sqrt())
}

pub fn phibar_oracle(x: f64) -> f64 {
    0.5 * erfc_oracle(x / 2f64.sqrt())
}

/// Quantile by bisection on [`phi_oracle`].
pub fn quantile_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_oracle(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn log_normal_density(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - (x - mean) * (x - mean) / (2.0 * var)
}

/// Posterior of the mean under a Normal prior and Normal likelihood,
/// tabulated on a uniform theta grid and normalized by the trapezoid rule.
pub struct QuadraturePosterior {
    thetas: Vec<f64>,
    weights: Vec<f64>,
    noise_var: f64,
}

impl QuadraturePosterior {
    pub fn new(prior_mean: f64, prior_var: f64, noise_var: f64, data: &[f64]) -> Self {
        let all: Vec<f64> = data.iter().copied().chain([prior_mean]).collect();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = prior_var.sqrt().max(noise_var.sqrt());
        let (a, b) = (lo - 14.0 * spread, hi + 14.0 * spread);
        let scale = prior_var.sqrt().min(noise_var.sqrt() / ((data.len() + 1) as f64).sqrt());
        let k = (((b - a) / (scale / 60.0)).ceil() as usize).max(4000);
        let h = (b - a) / k as f64;
        let thetas: Vec<f64> = (0..=k).map(|i| a + i as f64 * h).collect();
        let logs: Vec<f64> = thetas
            .iter()
            .map(|&t| {
                log_normal_density(t, prior_mean, prior_var)
                    + data.iter().map(|&y| log_normal_density(y, t, noise_var)).sum::<f64>()
            })
            .collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut weights: Vec<f64> = logs
            .iter()
            .enumerate()
            .map(|(i, l)| (l - top).exp() * if i == 0 || i == k { 0.5 } else { 1.0 })
            .collect();
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        QuadraturePosterior { thetas, weights, noise_var }
    }

    pub fn mean(&self) -> f64 {
        self.thetas.iter().zip(&self.weights).map(|(t, w)| t * w).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.thetas.iter().zip(&self.weights).map(|(t, w)| (t - m) * (t - m) * w).sum()
    }

    /// `int f(y | theta) pi(theta | data) dtheta`.
    pub fn predictive(&self, y: f64) -> f64 {
        self.thetas
            .iter()
            .zip(&self.weights)
            .map(|(&t, w)| w * log_normal_density(y, t, self.noise_var).exp())
            .sum()
    }
}

/// Straight-line recomputation of the conformal p-value: augment, fit the
/// posterior by quadrature, evaluate predictive densities, count.
pub fn pvalue_oracle(prior_mean: f64, prior_var: f64, noise_var: f64, data: &[f64], z: f64, self_inclusive: bool) -> f64 {
    let mut augmented = data.to_vec();
    augmented.push(z);
    let post = QuadraturePosterior::new(prior_mean, prior_var, noise_var, &augmented);
    let d: Vec<f64> = augmented.iter().map(|&y| post.predictive(y)).collect();
    let last = d[d.len() - 1];
    let upto = if self_inclusive { d.len() } else { d.len() - 1 };
    d[..upto].iter().filter(|&&di| di <= last).count() as f64 / d.len() as f64
}

/// Normalizing constant of the optimal weights by scanning `c` on a grid
/// over a growing range, then rescanning ever finer around the sign change.
pub fn c_scan_oracle(thetas: &[f64], alpha: f64) -> f64 {
    let m = thetas.len() as f64;
    let excess = |c: f64| thetas.iter().map(|&t| (m / alpha) * phibar_oracle(t / 2.0 + c / t)).sum::<f64>() - 1.0;
    let mut range = 1.0;
    while !(excess(-range) > 0.0 && excess(range) < 0.0) {
        range *= 2.0;
        assert!(range < 1e12, "scan range exploded");
    }
    let (mut lo, mut hi) = (-range, range);
    for _ in 0..12 {
        let steps = 1000;
        let h = (hi - lo) / steps as f64;
        let mut k = 0;
        while k < steps && excess(lo + (k + 1) as f64 * h) > 0.0 {
            k += 1;
        }
        let a = lo + k as f64 * h;
        lo = a;
        hi = a + h;
        if h < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Weights from [`c_scan_oracle`].
pub fn weights_oracle(thetas: &[f64], alpha: f64) -> Vec<f64> {
    let c = c_scan_oracle(thetas, alpha);
    let m = thetas.len() as f64;
    thetas.iter().map(|&t| (m / alpha) * phibar_oracle(t / 2.0 + c / t)).collect()
}

/// Upper tail of the chi-square distribution, via statrs.
pub fn chi_square_sf(stat: f64, df: usize) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat)
}

/// Pearson statistic of `counts` against equal cell probabilities.
pub fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
}
