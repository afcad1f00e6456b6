use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{NormalParams, Sample};
use crate::error::{Error, Result};

pub type SeededRng = ChaCha8Rng;

/// A master seed plus a path of child indices.
///
/// Each distinct `(master, path)` names an independent ChaCha stream, so a
/// simulation can hand replicate `r` the seed `seed.child(r)` and get the
/// same numbers whether replicates run in order or in parallel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub master: u64,
    #[serde(default)]
    pub path: Vec<u64>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn new(master: u64) -> Self {
        RngSeed { master, path: Vec::new() }
    }

    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        RngSeed { master: self.master, path }
    }

    fn key(&self) -> [u8; 32] {
        // Path length is folded in so that [] and [0] differ.
        let mut state = splitmix64(self.master ^ 0x6A09_E667_F3BC_C908);
        for &p in &self.path {
            state = splitmix64(state ^ splitmix64(p.wrapping_add(0xA54F_F53A_5F1D_36F1)));
        }
        state = splitmix64(state ^ self.path.len() as u64);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }

    pub fn rng(&self) -> SeededRng {
        ChaCha8Rng::from_seed(self.key())
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.master)?;
        for p in &self.path {
            write!(f, "/{p}")?;
        }
        Ok(())
    }
}

pub fn draw_normal<R: Rng + ?Sized>(rng: &mut R, params: NormalParams) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    params.mean + params.sd() * z
}

pub fn sample_normal(params: NormalParams, n: usize, seed: &RngSeed) -> Result<Sample> {
    params.validate()?;
    let mut rng = seed.rng();
    let values = (0..n).map(|_| draw_normal(&mut rng, params)).collect();
    Sample::new(values)
}

pub fn sample_beta(a: f64, b: f64, seed: &RngSeed) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::domain(format!("beta({a}, {b}): {e}")))?;
    Ok(dist.sample(&mut seed.rng()))
}

/// Uniform draw on `[0, 1)`.
pub fn sample_uniform(seed: &RngSeed) -> f64 {
    seed.rng().random()
}
