use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{bootstrap_counts, weighted_log_likelihood, LikelihoodSpec};
use crate::dynamics::ModelKind;
use crate::error::{check_len, Error, Result};

/// ln(sum(exp(values))). Returns -inf for an empty or all -inf input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Simulations of one model structure over every parameter/forcing
/// combination, restricted to the observation period.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRuns {
    pub model: ModelKind,
    pub simulations: Vec<Vec<f64>>,
}

/// Model probabilities for one pair of measurement distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorCell {
    pub models: Vec<ModelKind>,
    /// `[replicate][model]`, each row summing to one.
    pub replicates: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Every combination of every model had zero likelihood in some
    /// replicate; probabilities are NaN.
    pub degenerate: bool,
}

/// Normalised model probabilities from per-combination log-likelihoods
/// under a uniform prior over combinations.
///
/// `log_liks[m][r][c]` is the log-likelihood of combination `c` of model
/// `m` in bootstrap replicate `r`.
pub fn posterior_from_log_likelihoods(
    models: &[ModelKind],
    log_liks: &[Vec<Vec<f64>>],
) -> Result<PosteriorCell> {
    check_len(
        "models vs log-likelihood sets",
        models.len(),
        log_liks.len(),
    )?;
    if models.is_empty() {
        return Err(Error::invalid("need at least one model"));
    }
    let replicates = log_liks[0].len();
    if replicates == 0 {
        return Err(Error::invalid("need at least one bootstrap replicate"));
    }
    for m in log_liks {
        check_len("bootstrap replicates per model", replicates, m.len())?;
        if m.iter().any(|combos| combos.is_empty()) {
            return Err(Error::invalid("a model has no simulations"));
        }
    }

    let mut degenerate = false;
    let probs: Vec<Vec<f64>> = (0..replicates)
        .map(|r| {
            // log marginal likelihood: log mean over combinations
            let evidence: Vec<f64> = log_liks
                .iter()
                .map(|m| log_sum_exp(&m[r]) - (m[r].len() as f64).ln())
                .collect();
            let total = log_sum_exp(&evidence);
            if !total.is_finite() {
                degenerate = true;
                return vec![f64::NAN; models.len()];
            }
            let p: Vec<f64> = evidence.iter().map(|e| (e - total).exp()).collect();
            let s: f64 = p.iter().sum();
            p.into_iter().map(|v| v / s).collect()
        })
        .collect();
    if degenerate {
        log::warn!("degenerate posterior cell: all likelihoods are zero");
    }

    let n = replicates as f64;
    let mean: Vec<f64> = (0..models.len())
        .map(|m| probs.iter().map(|row| row[m]).sum::<f64>() / n)
        .collect();
    let std = (0..models.len())
        .map(|m| {
            if replicates < 2 {
                return 0.0;
            }
            let ss: f64 = probs.iter().map(|row| (row[m] - mean[m]).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect();
    Ok(PosteriorCell {
        models: models.to_vec(),
        replicates: probs,
        mean,
        std,
        degenerate,
    })
}

/// Per-combination log-likelihoods of `simulations` for every bootstrap
/// resample in `counts`: result is `[replicate][combination]`.
pub fn bootstrap_log_likelihoods(
    obs: &[f64],
    simulations: &[Vec<f64>],
    counts: &[Vec<u32>],
    spec: &LikelihoodSpec,
) -> Result<Vec<Vec<f64>>> {
    let per_combo: Vec<Vec<f64>> = simulations
        .par_iter()
        .map(|sim| {
            counts
                .iter()
                .map(|c| weighted_log_likelihood(obs, sim, c, spec))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..counts.len())
        .map(|r| per_combo.iter().map(|c| c[r]).collect())
        .collect())
}

/// Bootstrapped model probabilities. Every model is scored on the same
/// resampled days in each replicate.
pub fn model_posterior(
    runs: &[ModelRuns],
    obs: &[f64],
    spec: &LikelihoodSpec,
    bootstrap: usize,
    seed: u64,
) -> Result<PosteriorCell> {
    if bootstrap == 0 {
        return Err(Error::invalid("need at least one bootstrap replicate"));
    }
    let counts = bootstrap_counts(obs.len(), bootstrap, seed);
    let log_liks = runs
        .iter()
        .map(|run| bootstrap_log_likelihoods(obs, &run.simulations, &counts, spec))
        .collect::<Result<Vec<_>>>()?;
    let models: Vec<ModelKind> = runs.iter().map(|r| r.model).collect();
    posterior_from_log_likelihoods(&models, &log_liks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_handles_extremes() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[-1e5, -1e5]) - (-1e5 + 2f64.ln())).abs() < 1e-9);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn identical_runs_are_even() {
        let sims = vec![vec![1.0, 2.0, 3.0], vec![1.5, 2.5, 2.0]];
        let runs = [
            ModelRuns {
                model: ModelKind::Nash,
                simulations: sims.clone(),
            },
            ModelRuns {
                model: ModelKind::Abc,
                simulations: sims,
            },
        ];
        let cell = model_posterior(
            &runs,
            &[1.0, 2.0, 3.0],
            &LikelihoodSpec::new(0.1).unwrap(),
            5,
            1,
        )
        .unwrap();
        for m in 0..2 {
            assert!((cell.mean[m] - 0.5).abs() < 1e-12);
            assert!(cell.std[m] < 1e-12);
        }
    }

    #[test]
    fn degenerate_cell_is_flagged() {
        let models = [ModelKind::Nash, ModelKind::Abc];
        let ll = vec![vec![vec![f64::NEG_INFINITY]], vec![vec![f64::NEG_INFINITY]]];
        let cell = posterior_from_log_likelihoods(&models, &ll).unwrap();
        assert!(cell.degenerate);
        assert!(cell.mean[0].is_nan());
    }
}
