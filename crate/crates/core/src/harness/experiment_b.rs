use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigB, ExperimentConfig, ExperimentKind};
use super::runner::{experiment_forcing, task_seed, with_manifest, write_rows};
use crate::bayes::{perturb_forcing, sample_parameters, PerturbationSpec};
use crate::dynamics::{simulate_streamflow, Forcing, ModelKind, ModelParams};
use crate::error::Result;
use crate::info::{mutual_information, DiscretizationSpec};
use crate::regression::{
    build_multi_lag_matrix, convergence_protocol, train_ensemble, ConvergenceReport, InputChannel,
    LagEmbedding, RegressorConfig,
};

pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const MISSING_INFO_FILE: &str = "missing_information.csv";

/// One noise level of the missing-information sweep. Information values are
/// computed on the held-out rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma_u: f64,
    /// I(z_y; truth run on z_u)
    pub i_truth: f64,
    /// I(z_y; r(z_u))
    pub i_regression: f64,
    /// I(z_y; hypothesis prediction), one per replicate.
    pub i_models: Vec<f64>,
    /// Mean over replicates of `i_truth - i_model`.
    pub missing_true: f64,
    /// Mean over replicates of `i_regression - i_model`.
    pub missing_est: f64,
    /// Replicate standard deviation of the estimate.
    pub missing_est_std: f64,
    pub train_rows: usize,
    pub test_rows: usize,
}

impl SweepPoint {
    /// Shortfall of the estimate relative to the true value.
    pub fn relative_underestimation(&self) -> f64 {
        (self.missing_true - self.missing_est) / self.missing_true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SweepRow {
    sigma_u: f64,
    missing_info_true: f64,
    missing_info_est: f64,
    std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ConvergenceRow {
    fraction: f64,
    i_in_sample: f64,
    i_out_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentBReport {
    pub convergence: ConvergenceReport,
    pub sweep: Vec<SweepPoint>,
    pub files: Vec<PathBuf>,
}

impl ExperimentBReport {
    /// Mean over noise levels of the relative underestimation.
    pub fn mean_relative_underestimation(&self) -> f64 {
        self.sweep
            .iter()
            .map(SweepPoint::relative_underestimation)
            .sum::<f64>()
            / self.sweep.len() as f64
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Lag matrix of the perturbed forcing against the (transformed) record.
fn embed(b: &ConfigB, forcing: &Forcing, target: &[f64]) -> Result<LagEmbedding> {
    let precip = &forcing.precip()[b.spinup..];
    let pet = &forcing.pet()[b.spinup..];
    let mut channels = vec![InputChannel::dense(precip, b.lag)];
    if b.pet_lags > 0 {
        let stride = if b.pet_lags > 1 {
            (b.lag - 1) / (b.pet_lags - 1)
        } else {
            1
        };
        channels.push(InputChannel {
            values: pet,
            lags: b.pet_lags,
            stride,
        });
    }
    build_multi_lag_matrix(&channels, target, b.lag)
}

fn regressor_config(b: &ConfigB, seed: u64) -> RegressorConfig {
    RegressorConfig {
        seed: crate::seed::derive(seed, &[b.regressor.seed]),
        ..b.regressor
    }
}

/// Record values on embedding rows.
fn on_rows(series: &[f64], emb: &LagEmbedding, rows: std::ops::Range<usize>) -> Vec<f64> {
    rows.map(|r| series[emb.time_of(r)]).collect()
}

#[allow(clippy::too_many_arguments)]
fn sweep_point(
    b: &ConfigB,
    truth: &ModelParams,
    hypotheses: &[ModelParams],
    forcing: &Forcing,
    record: &[f64],
    target: &[f64],
    sigma_u: f64,
    noise_seed: u64,
    train_seed: u64,
) -> Result<SweepPoint> {
    let spec = DiscretizationSpec::quantile(b.bins);
    let zu = perturb_forcing(forcing, &PerturbationSpec::new(sigma_u, 1)?, noise_seed)?.remove(0);
    let emb = embed(b, &zu, target)?;
    let (train, test) = emb.split_fraction(b.train_fraction)?;
    let regressor = train_ensemble(&emb, train.clone(), &regressor_config(b, train_seed))?;

    let z = on_rows(record, &emb, test.clone());
    let r = regressor.predict_rows(&emb, test.clone());
    let i_regression = mutual_information(&z, &r, &spec)?.value;

    let run = |p: &ModelParams| -> Vec<f64> {
        let q = simulate_streamflow(p, zu.precip(), zu.pet(), &p.zero_state());
        on_rows(&q[b.spinup..], &emb, test.clone())
    };
    let i_truth = mutual_information(&z, &run(truth), &spec)?.value;
    let i_models = hypotheses
        .par_iter()
        .map(|p| Ok(mutual_information(&z, &run(p), &spec)?.value))
        .collect::<Result<Vec<f64>>>()?;

    let truth_gaps: Vec<f64> = i_models.iter().map(|m| i_truth - m).collect();
    let est_gaps: Vec<f64> = i_models.iter().map(|m| i_regression - m).collect();
    let (missing_true, _) = mean_std(&truth_gaps);
    let (missing_est, missing_est_std) = mean_std(&est_gaps);
    log::info!(
        "sigma_u={sigma_u}: I(z;truth)={i_truth:.4} I(z;r)={i_regression:.4} eps={missing_true:.4} eps_hat={missing_est:.4}"
    );
    Ok(SweepPoint {
        sigma_u,
        i_truth,
        i_regression,
        i_models,
        missing_true,
        missing_est,
        missing_est_std,
        train_rows: train.len(),
        test_rows: test.len(),
    })
}

/// Regression bound on missing information across forcing noise levels,
/// checked against the truth, plus the training-size convergence curve.
pub fn run_experiment_b(config: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentBReport> {
    let kind = ExperimentKind::AppendixB;
    with_manifest(config, kind, out_dir, |manifest| {
        let b = &config.b;
        let forcing = experiment_forcing(config, kind, b.spinup + b.n_days)?;
        let truth = ModelParams::Hymod(config.truth);
        let record = manifest.stage("truth", || {
            let q =
                simulate_streamflow(&truth, forcing.precip(), forcing.pet(), &truth.zero_state());
            Ok(q[b.spinup..].to_vec())
        })?;
        let target: Vec<f64> = if b.log_offset > 0.0 {
            record.iter().map(|q| (q + b.log_offset).ln()).collect()
        } else {
            record.clone()
        };
        let hypotheses =
            sample_parameters(ModelKind::Nash, b.replicates, task_seed(config, kind, &[1]))?;

        let convergence = manifest.stage("convergence", || {
            let spec = PerturbationSpec::new(b.convergence_sigma, 1)?;
            let zu = perturb_forcing(&forcing, &spec, task_seed(config, kind, &[4]))?.remove(0);
            let emb = embed(b, &zu, &target)?;
            let cfg = regressor_config(b, task_seed(config, kind, &[5]));
            let report = convergence_protocol(
                &emb,
                &cfg,
                &b.fractions,
                &DiscretizationSpec::quantile(b.bins),
            )?;
            for p in &report.points {
                log::info!(
                    "fraction {}: {} rows, I_in={:.4} I_out={:.4}",
                    p.fraction,
                    p.train_rows,
                    p.i_in_sample,
                    p.i_out_sample
                );
            }
            Ok(report)
        })?;

        let mut sweep = Vec::with_capacity(b.sigma_u.len());
        for (i, &sigma_u) in b.sigma_u.iter().enumerate() {
            let point = manifest.stage(&format!("sweep sigma_u={sigma_u}"), || {
                sweep_point(
                    b,
                    &truth,
                    &hypotheses,
                    &forcing,
                    &record,
                    &target,
                    sigma_u,
                    task_seed(config, kind, &[2, i as u64]),
                    task_seed(config, kind, &[3, i as u64]),
                )
            })?;
            sweep.push(point);
        }

        let conv_path = write_rows(
            manifest,
            out_dir,
            CONVERGENCE_FILE,
            convergence.points.iter().map(|p| ConvergenceRow {
                fraction: p.fraction,
                i_in_sample: p.i_in_sample,
                i_out_sample: p.i_out_sample,
            }),
        )?;
        let sweep_path = write_rows(
            manifest,
            out_dir,
            MISSING_INFO_FILE,
            sweep.iter().map(|p| SweepRow {
                sigma_u: p.sigma_u,
                missing_info_true: p.missing_true,
                missing_info_est: p.missing_est,
                std: p.missing_est_std,
            }),
        )?;
        Ok(ExperimentBReport {
            convergence,
            sweep,
            files: vec![conv_path, sweep_path],
        })
    })
}
