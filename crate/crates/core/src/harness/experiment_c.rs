use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::runner::{experiment_forcing, task_seed, with_manifest, write_rows};
use crate::dynamics::{run_from, Forcing, HymodParams, ModelParams, ModelState};
use crate::error::Result;
use crate::info::{mse, DiscretizationSpec};
use crate::network::{
    assimilate, build_hymod_network, edge_transfer_entropy, identify_system,
    predict_with_identified, record_trajectories, te_difference_report, AssimilationConfig,
    EdgeInfoReport, PRECIP, SOIL,
};

pub const MSE_FILE: &str = "mse.csv";
pub const EDGE_TE_FILE: &str = "edge_te.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Calibration,
    Evaluation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// The hypothesis model as given.
    Prior,
    /// Best prior-ensemble member by calibration mse.
    Calibrated,
    /// Filter analysis, then a forecast from the posterior final states.
    Assimilated,
    /// Residual-corrected network run from the start of calibration.
    Identified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub period: Period,
    pub variant: Variant,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCReport {
    pub mse: Vec<MseRow>,
    pub edges: EdgeInfoReport,
    /// 1-based rank of the precipitation-to-soil edge by absolute TE change.
    pub infiltration_rank: Option<usize>,
    pub files: Vec<PathBuf>,
}

impl ExperimentCReport {
    pub fn mse_of(&self, period: Period, variant: Variant) -> Option<f64> {
        self.mse
            .iter()
            .find(|r| r.period == period && r.variant == variant)
            .map(|r| r.mse)
    }
}

fn run_hymod(
    params: &HymodParams,
    forcing: &Forcing,
    initial: &ModelState,
) -> (Vec<f64>, ModelState) {
    run_from(
        &ModelParams::Hymod(*params),
        forcing.precip(),
        forcing.pet(),
        initial,
    )
}

/// Twin experiment: assimilate the truth's streamflow into a hypothesis
/// model with a degraded infiltration function, identify a corrected
/// network, and compare per-edge transfer entropy before and after.
pub fn run_experiment_c(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentCReport> {
    let kind = ExperimentKind::AppendixC;
    with_manifest(config, kind, out_dir, |manifest| {
        let c = &config.c;
        let (n_cal, n_eval) = (c.calibration_days, c.evaluation_days);
        let forcing = experiment_forcing(config, kind, c.spinup + n_cal + n_eval)?;
        let spinup = forcing.window(0..c.spinup)?;
        let cal = forcing.window(c.spinup..c.spinup + n_cal)?;
        let eval = forcing.window(c.spinup + n_cal..forcing.len())?;
        let hypothesis = c.hypothesis;

        let (obs_cal, obs_eval) = manifest.stage("truth", || {
            let (_, s0) = run_hymod(
                &config.truth,
                &spinup,
                &ModelState::zeroed(0.0, config.truth.n_tanks()),
            );
            let (q_cal, s1) = run_hymod(&config.truth, &cal, &s0);
            let (q_eval, _) = run_hymod(&config.truth, &eval, &s1);
            Ok((q_cal, q_eval))
        })?;
        let (_, h_init) = run_hymod(
            &hypothesis,
            &spinup,
            &ModelState::zeroed(0.0, hypothesis.n_tanks()),
        );

        let mut rows = Vec::new();
        let mut push = |period, variant, sim: &[f64], obs: &[f64]| -> Result<()> {
            rows.push(MseRow {
                period,
                variant,
                mse: mse(obs, sim)?,
            });
            Ok(())
        };

        let (prior_cal, prior_end) = run_hymod(&hypothesis, &cal, &h_init);
        let (prior_eval, _) = run_hymod(&hypothesis, &eval, &prior_end);
        push(Period::Calibration, Variant::Prior, &prior_cal, &obs_cal)?;
        push(Period::Evaluation, Variant::Prior, &prior_eval, &obs_eval)?;

        let network = build_hymod_network(hypothesis.n_quick, hypothesis.n_slow)?;
        let prior = manifest.stage("prior ensemble", || {
            record_trajectories(
                &hypothesis,
                &cal,
                &h_init,
                c.prior_members,
                task_seed(config, kind, &[1]),
                c.assimilation.param_jitter,
                c.assimilation.state_noise,
            )
        })?;

        manifest.stage("calibration", || {
            let y = prior
                .trajectories
                .node_index(crate::network::STREAMFLOW)
                .expect("streamflow node");
            let scores = (0..prior.trajectories.n_members())
                .into_par_iter()
                .map(|m| mse(&obs_cal, &prior.trajectories.series(m, y)))
                .collect::<Result<Vec<f64>>>()?;
            let best = scores
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .expect("non-empty ensemble");
            let params = prior.member_params[best];
            let (q_cal, end) = run_hymod(&params, &cal, &h_init);
            let (q_eval, _) = run_hymod(&params, &eval, &end);
            push(Period::Calibration, Variant::Calibrated, &q_cal, &obs_cal)?;
            push(Period::Evaluation, Variant::Calibrated, &q_eval, &obs_eval)
        })?;

        let da_config = AssimilationConfig {
            seed: task_seed(config, kind, &[2]),
            ..c.assimilation
        };
        let posterior = manifest.stage("assimilation", || {
            let result = assimilate(&hypothesis, &cal, &h_init, &obs_cal, &da_config)?;
            log::info!(
                "assimilation: {} resamples, {} weight resets, mean ESS fraction {:.3}",
                result.resample_events,
                result.weight_resets,
                result.mean_ess_fraction
            );
            Ok(result)
        })?;
        let forecast: Vec<Vec<f64>> = posterior
            .draw_params
            .par_iter()
            .zip(&posterior.final_states)
            .map(|(p, s)| run_hymod(p, &eval, s).0)
            .collect();
        let draws = forecast.len() as f64;
        let mean_forecast: Vec<f64> = (0..n_eval)
            .map(|t| forecast.iter().map(|f| f[t]).sum::<f64>() / draws)
            .collect();
        push(
            Period::Calibration,
            Variant::Assimilated,
            &posterior.analysis_streamflow,
            &obs_cal,
        )?;
        push(
            Period::Evaluation,
            Variant::Assimilated,
            &mean_forecast,
            &obs_eval,
        )?;

        manifest.stage("identification", || {
            let model = identify_system(
                &posterior.posterior,
                &network,
                &hypothesis,
                &DiscretizationSpec::quantile(c.identify_bins),
            )?;
            let whole = forcing.window(c.spinup..forcing.len())?;
            let q = predict_with_identified(&model, &whole, &h_init, n_cal + n_eval)?;
            push(
                Period::Calibration,
                Variant::Identified,
                &q[..n_cal],
                &obs_cal,
            )?;
            push(
                Period::Evaluation,
                Variant::Identified,
                &q[n_cal..],
                &obs_eval,
            )
        })?;

        let edges = manifest.stage("transfer entropy", || {
            let spec = DiscretizationSpec::quantile(c.te_bins);
            let before = edge_transfer_entropy(&prior.trajectories, &network, c.te_lag, &spec)?;
            let after = edge_transfer_entropy(&posterior.posterior, &network, c.te_lag, &spec)?;
            te_difference_report(&before, &after)
        })?;
        for r in &rows {
            log::info!("{:?} {:?} mse {:.5}", r.period, r.variant, r.mse);
        }

        rows.sort_by_key(|r| (r.period as u8, r.variant as u8));
        let mse_path = write_rows(manifest, out_dir, MSE_FILE, &rows)?;
        let edge_path = write_rows(manifest, out_dir, EDGE_TE_FILE, &edges.rows)?;
        Ok(ExperimentCReport {
            infiltration_rank: edges.rank_of(PRECIP, SOIL),
            mse: rows,
            edges,
            files: vec![mse_path, edge_path],
        })
    })
}
