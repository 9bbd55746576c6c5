//! Permutation nulls. Each replicate draws its own RNG from the seed tree,
//! so results do not depend on the number of worker threads.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::discretize::{discretize, Binned, DiscretizationSpec};
use super::estimators::{mi_binned, te_binned};
use crate::error::{check_len, Error, Result};
use crate::seed;

pub const DEFAULT_SHUFFLES: usize = 100;

/// Sorted replicate statistics under the null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    samples: Vec<f64>,
}

impl NullDistribution {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid(
                "null distribution needs at least one replicate",
            ));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Linearly interpolated quantile, `q` in [0, 1].
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let pos = q * (self.samples.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.samples[lo] + frac * (self.samples[hi] - self.samples[lo])
    }

    pub fn p95(&self) -> f64 {
        self.quantile(0.95)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Runs `replicates` independent draws of `stat`, each with an RNG derived
/// from `seed` and the replicate index.
pub fn permutation_null<F>(replicates: usize, seed: u64, stat: F) -> Result<NullDistribution>
where
    F: Fn(&mut seed::Rng) -> Result<f64> + Sync,
{
    let samples = (0..replicates)
        .into_par_iter()
        .map(|r| stat(&mut seed::child_rng(seed, &[r as u64])))
        .collect::<Result<Vec<f64>>>()?;
    NullDistribution::from_samples(samples)
}

fn shuffled(b: &Binned, rng: &mut seed::Rng) -> Binned {
    let mut out = b.clone();
    out.indices.shuffle(rng);
    out
}

/// Null of I(x;y) obtained by permuting `y`.
pub fn mi_shuffle_null(
    x: &[f64],
    y: &[f64],
    spec: &DiscretizationSpec,
    replicates: usize,
    seed: u64,
) -> Result<NullDistribution> {
    check_len("shuffle null inputs", x.len(), y.len())?;
    let bx = discretize(x, spec)?;
    let by = discretize(y, spec)?;
    permutation_null(replicates, seed, |rng| mi_binned(&bx, &shuffled(&by, rng)))
}

/// Null of TE(source -> target) obtained by permuting the source.
pub fn te_shuffle_null(
    source: &[f64],
    target: &[f64],
    lag: usize,
    spec: &DiscretizationSpec,
    replicates: usize,
    seed: u64,
) -> Result<NullDistribution> {
    check_len("shuffle null inputs", source.len(), target.len())?;
    let bs = discretize(source, spec)?;
    let bt = discretize(target, spec)?;
    permutation_null(replicates, seed, |rng| {
        te_binned(&shuffled(&bs, rng), &bt, lag)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let d = NullDistribution::from_samples((0..=10).rev().map(f64::from).collect()).unwrap();
        assert_eq!(d.quantile(0.0), 0.0);
        assert_eq!(d.quantile(1.0), 10.0);
        assert!((d.p95() - 9.5).abs() < 1e-12);
        assert!((d.mean() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn null_is_reproducible_across_pools() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 31) % 97) as f64).collect();
        let y: Vec<f64> = (0..500).map(|i| ((i * 17) % 89) as f64).collect();
        let spec = DiscretizationSpec::quantile(5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mi_shuffle_null(&x, &y, &spec, 20, 9).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
