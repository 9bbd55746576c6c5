use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::seed;

/// iid Gaussian measurement density on streamflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodSpec {
    /// Standard deviation [mm].
    pub sigma_y: f64,
}

impl LikelihoodSpec {
    pub fn new(sigma_y: f64) -> Result<Self> {
        if !(sigma_y > 0.0 && sigma_y.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma_y must be positive, got {sigma_y}"
            )));
        }
        Ok(Self { sigma_y })
    }

    /// -ln(sigma sqrt(2 pi))
    fn log_norm(&self) -> f64 {
        -(self.sigma_y * (2.0 * std::f64::consts::PI).sqrt()).ln()
    }

    pub fn log_density(&self, obs: f64, sim: f64) -> f64 {
        let z = (obs - sim) / self.sigma_y;
        self.log_norm() - 0.5 * z * z
    }
}

/// Sum over days of log N(obs; sim, sigma_y^2).
pub fn log_likelihood(obs: &[f64], sim: &[f64], spec: &LikelihoodSpec) -> Result<f64> {
    check_len("observations vs simulation", obs.len(), sim.len())?;
    Ok(obs
        .iter()
        .zip(sim)
        .map(|(&o, &s)| spec.log_density(o, s))
        .sum())
}

/// Log-likelihood with per-day multiplicities (a bootstrap resample).
pub fn weighted_log_likelihood(
    obs: &[f64],
    sim: &[f64],
    counts: &[u32],
    spec: &LikelihoodSpec,
) -> Result<f64> {
    check_len("observations vs simulation", obs.len(), sim.len())?;
    check_len("observations vs bootstrap counts", obs.len(), counts.len())?;
    let mut sum_sq = 0.0;
    let mut total = 0u64;
    for ((&o, &s), &c) in obs.iter().zip(sim).zip(counts) {
        if c > 0 {
            let z = (o - s) / spec.sigma_y;
            sum_sq += c as f64 * z * z;
            total += c as u64;
        }
    }
    Ok(total as f64 * spec.log_norm() - 0.5 * sum_sq)
}

/// Day multiplicities for `replicates` resamples of `n_days` days drawn with
/// replacement at full length.
pub fn bootstrap_counts(n_days: usize, replicates: usize, seed: u64) -> Vec<Vec<u32>> {
    (0..replicates)
        .map(|r| {
            let mut rng = seed::child_rng(seed, &[r as u64]);
            let mut counts = vec![0u32; n_days];
            for _ in 0..n_days {
                counts[rng.random_range(0..n_days)] += 1;
            }
            counts
        })
        .collect()
}
