use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::runner::{experiment_forcing, task_seed, with_manifest, write_rows};
use crate::bayes::{
    model_posterior, perturb_forcing, sample_parameters, LikelihoodSpec, ModelProbabilityTable,
    ModelRuns, PerturbationSpec,
};
use crate::dynamics::{simulate, simulate_streamflow, Forcing, ModelKind, ModelParams};
use crate::error::{Error, Result};

pub const PROBABILITIES_FILE: &str = "model_probabilities.csv";

/// Competing structures, in table order.
pub const STRUCTURES: [ModelKind; 2] = [ModelKind::Nash, ModelKind::Abc];

const NORMALISATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentAReport {
    pub table: ModelProbabilityTable,
    /// Some cell favours Nash and another favours abc.
    pub ranking_flip: bool,
    pub files: Vec<PathBuf>,
}

/// Observation-period simulations of every parameter set on every forcing.
fn ensemble_runs(
    kind: ModelKind,
    params: &[ModelParams],
    forcings: &[Forcing],
    warmup: usize,
) -> ModelRuns {
    let simulations = params
        .par_iter()
        .flat_map_iter(|p| {
            forcings.iter().map(move |f| {
                let mut q = simulate_streamflow(p, f.precip(), f.pet(), &p.zero_state());
                q.drain(..warmup);
                q
            })
        })
        .collect();
    ModelRuns {
        model: kind,
        simulations,
    }
}

/// Bayesian model probabilities of Nash vs abc on every (sigma_u, sigma_y)
/// pair, bootstrapped over observation days.
pub fn run_experiment_a(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentAReport> {
    let kind = ExperimentKind::AppendixA;
    with_manifest(config, kind, out_dir, |manifest| {
        let a = &config.a;
        let forcing = experiment_forcing(config, kind, a.n_days)?;
        let truth = ModelParams::Hymod(config.truth);
        let obs = manifest.stage("truth", || {
            let run = simulate(&truth, &forcing, &truth.zero_state(), a.warmup)?;
            Ok(run.observed_streamflow().to_vec())
        })?;
        let params = manifest.stage("parameters", || {
            STRUCTURES
                .iter()
                .enumerate()
                .map(|(i, &m)| {
                    sample_parameters(m, a.n_params, task_seed(config, kind, &[1, i as u64]))
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let mut table = ModelProbabilityTable::default();
        for (iu, &sigma_u) in a.sigma_u.iter().enumerate() {
            let runs = manifest.stage(&format!("simulate sigma_u={sigma_u}"), || {
                let spec = PerturbationSpec::new(sigma_u, a.n_forcings)?;
                let forcings =
                    perturb_forcing(&forcing, &spec, task_seed(config, kind, &[2, iu as u64]))?;
                Ok(STRUCTURES
                    .iter()
                    .zip(&params)
                    .map(|(&m, p)| ensemble_runs(m, p, &forcings, a.warmup))
                    .collect::<Vec<_>>())
            })?;
            for (iy, &sigma_y) in a.sigma_y.iter().enumerate() {
                let boot_seed = task_seed(config, kind, &[3, iu as u64, iy as u64]);
                let cell = manifest.stage(
                    &format!("posterior sigma_u={sigma_u} sigma_y={sigma_y}"),
                    || {
                        let cell = model_posterior(
                            &runs,
                            &obs,
                            &LikelihoodSpec::new(sigma_y)?,
                            a.bootstrap,
                            boot_seed,
                        )?;
                        if cell.degenerate {
                            return Err(Error::DegenerateLikelihood(format!(
                                "sigma_u={sigma_u}, sigma_y={sigma_y}"
                            )));
                        }
                        for row in &cell.replicates {
                            let total: f64 = row.iter().sum();
                            if (total - 1.0).abs() > NORMALISATION_TOLERANCE {
                                return Err(Error::invalid(format!(
                                    "model probabilities sum to {total}"
                                )));
                            }
                        }
                        Ok(cell)
                    },
                )?;
                table.push_cell(sigma_u, sigma_y, &cell);
            }
        }

        let path = write_rows(manifest, out_dir, PROBABILITIES_FILE, &table.rows)?;
        Ok(ExperimentAReport {
            ranking_flip: table.ranking_flips(ModelKind::Nash, ModelKind::Abc),
            table,
            files: vec![path],
        })
    })
}
