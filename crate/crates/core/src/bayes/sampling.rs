use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AbcParams, Forcing, HymodParams, ModelKind, ModelParams, NashParams};
use crate::error::{Error, Result};
use crate::seed;

/// Tank counts of the HyMod structure used as synthetic truth.
pub const TRUTH_QUICK_TANKS: usize = 3;
pub const TRUTH_SLOW_TANKS: usize = 3;

/// Uniform HyMod draw: c_max over (0, 1000] mm, b_exp over [0, 10], the
/// partition and outflow ratios over [0, 1].
pub fn sample_hymod(rng: &mut seed::Rng) -> HymodParams {
    HymodParams {
        c_max: 1000.0 * (1.0 - rng.random::<f64>()),
        b_exp: 10.0 * rng.random::<f64>(),
        alpha: rng.random(),
        k_quick: rng.random(),
        k_slow: rng.random(),
        n_quick: TRUTH_QUICK_TANKS,
        n_slow: TRUTH_SLOW_TANKS,
    }
}

pub fn sample_nash(rng: &mut seed::Rng) -> NashParams {
    NashParams {
        k: [rng.random(), rng.random(), rng.random()],
    }
}

/// Uniform draw on {a + b <= 1} x [0, 1] by rejection. Returns the sample
/// and the number of proposals it took.
pub fn sample_abc(rng: &mut seed::Rng) -> (AbcParams, usize) {
    let mut proposals = 0;
    loop {
        proposals += 1;
        let (a, b, c) = (
            rng.random::<f64>(),
            rng.random::<f64>(),
            rng.random::<f64>(),
        );
        if a + b <= 1.0 {
            return (AbcParams { a, b, c }, proposals);
        }
    }
}

/// `n` parameter sets for `kind`, deterministic in `seed`.
pub fn sample_parameters(kind: ModelKind, n: usize, seed: u64) -> Result<Vec<ModelParams>> {
    if n == 0 {
        return Err(Error::invalid("need at least one parameter sample"));
    }
    let mut rng = seed::rng(seed);
    Ok((0..n)
        .map(|_| match kind {
            ModelKind::Hymod => ModelParams::Hymod(sample_hymod(&mut rng)),
            ModelKind::Nash => ModelParams::Nash(sample_nash(&mut rng)),
            ModelKind::Abc => ModelParams::Abc(sample_abc(&mut rng).0),
        })
        .collect())
}

/// iid Gaussian noise on daily precipitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    /// Noise standard deviation [mm].
    pub sigma_u: f64,
    pub n_series: usize,
}

impl PerturbationSpec {
    pub fn new(sigma_u: f64, n_series: usize) -> Result<Self> {
        if !(sigma_u > 0.0 && sigma_u.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma_u must be positive, got {sigma_u}"
            )));
        }
        if n_series == 0 {
            return Err(Error::invalid("need at least one perturbed series"));
        }
        Ok(Self { sigma_u, n_series })
    }
}

/// Adds noise to one precipitation series; negative values are clipped to
/// zero, which biases dry days upward.
pub fn perturb_precip(precip: &[f64], sigma_u: f64, rng: &mut seed::Rng) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma_u).expect("sigma_u validated");
    precip
        .iter()
        .map(|&p| (p + noise.sample(rng)).max(0.0))
        .collect()
}

/// `spec.n_series` independently perturbed copies of `forcing`. PET is
/// left unchanged.
pub fn perturb_forcing(
    forcing: &Forcing,
    spec: &PerturbationSpec,
    seed: u64,
) -> Result<Vec<Forcing>> {
    (0..spec.n_series)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::child_rng(seed, &[i as u64]);
            forcing.with_precip(perturb_precip(forcing.precip(), spec.sigma_u, &mut rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_respect_ranges() {
        for p in sample_parameters(ModelKind::Hymod, 200, 3).unwrap() {
            p.validate().unwrap();
        }
        for p in sample_parameters(ModelKind::Abc, 200, 3).unwrap() {
            p.validate().unwrap();
        }
        assert!(sample_parameters(ModelKind::Nash, 0, 3).is_err());
    }

    #[test]
    fn perturbation_clips_at_zero() {
        let mut rng = seed::rng(1);
        let out = perturb_precip(&[0.0; 1000], 0.5, &mut rng);
        assert!(out.iter().all(|p| *p >= 0.0));
        assert!(out.iter().any(|p| *p > 0.0));
    }
}
