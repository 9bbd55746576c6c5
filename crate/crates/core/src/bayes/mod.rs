//! Bayesian model probabilities over a two-structure ensemble, marginalised
//! over sampled parameters and perturbed forcings. Used to show how the
//! ranking of structures depends on the assumed measurement distributions.

mod likelihood;
mod posterior;
mod sampling;

pub use likelihood::{bootstrap_counts, log_likelihood, weighted_log_likelihood, LikelihoodSpec};
pub use posterior::{
    bootstrap_log_likelihoods, log_sum_exp, model_posterior, posterior_from_log_likelihoods,
    ModelRuns, PosteriorCell,
};
pub use sampling::{
    perturb_forcing, perturb_precip, sample_abc, sample_hymod, sample_nash, sample_parameters,
    PerturbationSpec, TRUTH_QUICK_TANKS, TRUTH_SLOW_TANKS,
};

use serde::{Deserialize, Serialize};

use crate::dynamics::ModelKind;

/// One row of the model-probability table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub sigma_u: f64,
    pub sigma_y: f64,
    pub model: ModelKind,
    pub prob_mean: f64,
    pub prob_std: f64,
}

/// Bootstrapped model probabilities for every (sigma_u, sigma_y) cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelProbabilityTable {
    pub rows: Vec<ProbabilityRow>,
}

impl ModelProbabilityTable {
    pub fn push_cell(&mut self, sigma_u: f64, sigma_y: f64, cell: &PosteriorCell) {
        for (m, &model) in cell.models.iter().enumerate() {
            self.rows.push(ProbabilityRow {
                sigma_u,
                sigma_y,
                model,
                prob_mean: cell.mean[m],
                prob_std: cell.std[m],
            });
        }
    }

    /// Mean probability of `model` in each cell, in row order.
    pub fn means_for(&self, model: ModelKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.model == model)
            .map(|r| r.prob_mean)
            .collect()
    }

    /// Some cell favours `a` and some other cell favours `b`.
    pub fn ranking_flips(&self, a: ModelKind, b: ModelKind) -> bool {
        self.means_for(a).iter().any(|&p| p > 0.5) && self.means_for(b).iter().any(|&p| p > 0.5)
    }
}
