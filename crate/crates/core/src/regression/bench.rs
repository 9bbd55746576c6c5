use std::ops::Range;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::LagEmbedding;
use super::train::{train_ensemble, RegressorConfig};
use crate::dynamics::{simulate_streamflow, Forcing, ModelParams, ModelState};
use crate::error::{check_len, Error, Result};
use crate::info::{
    discretize, mutual_information, permutation_null, DiscretizationSpec, InfoValue,
    JointHistogram, NullDistribution,
};

/// Relative in/out-of-sample gap below which a training fraction counts as
/// converged.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub fraction: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub i_in_sample: f64,
    pub i_out_sample: f64,
}

impl ConvergencePoint {
    pub fn relative_gap(&self) -> f64 {
        (self.i_in_sample - self.i_out_sample).abs()
            / self.i_out_sample.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub points: Vec<ConvergencePoint>,
    /// Gap below tolerance at the largest fraction.
    pub converged: bool,
    /// Smallest fraction from which every later gap stays below tolerance.
    pub convergence_fraction: Option<f64>,
}

/// Trains on growing prefixes of the record and compares I(z_y; r(z_u)) on
/// the training rows with the same statistic on held-out rows.
pub fn convergence_protocol(
    embedding: &LagEmbedding,
    config: &RegressorConfig,
    fractions: &[f64],
    spec: &DiscretizationSpec,
) -> Result<ConvergenceReport> {
    if fractions.is_empty() {
        return Err(Error::invalid("no training fractions given"));
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "training fractions must be strictly ascending",
        ));
    }
    let points = fractions
        .par_iter()
        .map(|&fraction| {
            convergence_point(embedding, config, fraction, spec)
                .map_err(|e| e.in_stage(format!("training fraction {fraction}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let ok: Vec<bool> = points
        .iter()
        .map(|p| p.relative_gap() < CONVERGENCE_TOLERANCE)
        .collect();
    let converged = *ok.last().expect("non-empty");
    let convergence_fraction = converged.then(|| {
        let first_stable = ok.iter().rposition(|o| !o).map_or(0, |i| i + 1);
        points[first_stable].fraction
    });
    Ok(ConvergenceReport {
        points,
        converged,
        convergence_fraction,
    })
}

fn convergence_point(
    embedding: &LagEmbedding,
    config: &RegressorConfig,
    fraction: f64,
    spec: &DiscretizationSpec,
) -> Result<ConvergencePoint> {
    let (train, test) = embedding.split_fraction(fraction)?;
    let model = train_ensemble(embedding, train.clone(), config)?;
    let info = |rows: Range<usize>| -> Result<f64> {
        let pred = model.predict_rows(embedding, rows.clone());
        Ok(mutual_information(embedding.targets(rows), &pred, spec)?.value)
    };
    Ok(ConvergencePoint {
        fraction,
        train_rows: train.len(),
        test_rows: test.len(),
        i_in_sample: info(train)?,
        i_out_sample: info(test)?,
    })
}

/// Information about the observations carried by the regression bound and
/// by the model, and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingInfoReport {
    /// I(z_y; r(z_u))
    pub i_data: InfoValue,
    /// I(z_y; model prediction)
    pub i_model: InfoValue,
    /// `i_data - i_model`, a lower bound on the information the model misses.
    pub eps_hat: f64,
}

/// Computes the missing-information bound on aligned out-of-sample series.
pub fn missing_information(
    obs: &[f64],
    model_pred: &[f64],
    regression_pred: &[f64],
    spec: &DiscretizationSpec,
) -> Result<MissingInfoReport> {
    check_len(
        "observations vs model predictions",
        obs.len(),
        model_pred.len(),
    )?;
    check_len(
        "observations vs regression predictions",
        obs.len(),
        regression_pred.len(),
    )?;
    let i_data = mutual_information(obs, regression_pred, spec)?;
    let i_model = mutual_information(obs, model_pred, spec)?;
    Ok(MissingInfoReport {
        i_data,
        i_model,
        eps_hat: i_data.value - i_model.value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingInfoTest {
    pub report: MissingInfoReport,
    /// 95th percentile of `eps_hat` under exchangeable predictors.
    pub threshold: f64,
    /// The benchmark extracted more information than the model: the model
    /// can be improved from the data at hand.
    pub reject: bool,
}

/// Normalised ranks in (0, 1]. Quantile-binned information only depends on
/// ranks, so this puts two predictors on a common scale.
fn rank_scores(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; x.len()];
    let n = x.len() as f64;
    for (rank, &i) in order.iter().enumerate() {
        out[i] = (rank + 1) as f64 / n;
    }
    out
}

/// Null distribution of `eps_hat` when model and regression predictions are
/// exchangeable: each replicate swaps the two rank-scored predictions at
/// every time step with probability one half.
pub fn missing_info_null(
    obs: &[f64],
    model_pred: &[f64],
    regression_pred: &[f64],
    spec: &DiscretizationSpec,
    replicates: usize,
    seed: u64,
) -> Result<NullDistribution> {
    check_len(
        "observations vs model predictions",
        obs.len(),
        model_pred.len(),
    )?;
    check_len(
        "observations vs regression predictions",
        obs.len(),
        regression_pred.len(),
    )?;
    let ob = discretize(obs, spec)?;
    let rm = rank_scores(model_pred);
    let rr = rank_scores(regression_pred);
    permutation_null(replicates, seed, |rng| {
        let mut a = rr.clone();
        let mut b = rm.clone();
        for t in 0..a.len() {
            if rng.random::<bool>() {
                std::mem::swap(&mut a[t], &mut b[t]);
            }
        }
        let ia = mi_with_binned(&ob, &a, spec)?;
        let ib = mi_with_binned(&ob, &b, spec)?;
        Ok(ia - ib)
    })
}

fn mi_with_binned(
    ob: &crate::info::Binned,
    pred: &[f64],
    spec: &DiscretizationSpec,
) -> Result<f64> {
    let bp = discretize(pred, spec)?;
    let h = JointHistogram::from_indices(&[&ob.indices, &bp.indices], &[ob.n_bins(), bp.n_bins()])?;
    crate::info::mi_from_histogram(&h)
}

/// `missing_information` plus a permutation significance threshold.
pub fn missing_information_test(
    obs: &[f64],
    model_pred: &[f64],
    regression_pred: &[f64],
    spec: &DiscretizationSpec,
    replicates: usize,
    seed: u64,
) -> Result<MissingInfoTest> {
    let report = missing_information(obs, model_pred, regression_pred, spec)?;
    let null = missing_info_null(obs, model_pred, regression_pred, spec, replicates, seed)?;
    let threshold = null.p95();
    Ok(MissingInfoTest {
        report,
        threshold,
        reject: report.eps_hat > threshold,
    })
}

/// Information quantities that are only computable when the true system is
/// known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueInformation {
    /// H(z_y | z_u), with z_u represented by the true system's response to it.
    pub h_given_forcing: f64,
    /// H(z_y | model prediction)
    pub h_given_model: f64,
    /// I(z_y; z_u) through the true system.
    pub i_forcing: f64,
    /// H(z_y | model) - H(z_y | z_u), the information the model misses.
    pub missing: f64,
}

fn conditional_entropy(target: &[f64], given: &[f64], spec: &DiscretizationSpec) -> Result<f64> {
    let bt = discretize(target, spec)?;
    let bg = discretize(given, spec)?;
    let joint =
        JointHistogram::from_indices(&[&bt.indices, &bg.indices], &[bt.n_bins(), bg.n_bins()])?;
    Ok((joint.entropy_nats() - joint.marginal(&[1])?.entropy_nats()).max(0.0))
}

/// Runs the perturbed `forcing` through the true system and compares the
/// conditional entropy of the observations given that response with the
/// conditional entropy given the hypothesis model's predictions. Statistics
/// use the days in `window` only.
#[allow(clippy::too_many_arguments)]
pub fn true_information_oracle(
    truth: &ModelParams,
    initial: &ModelState,
    forcing: &Forcing,
    obs: &[f64],
    model_pred: &[f64],
    window: Range<usize>,
    spec: &DiscretizationSpec,
) -> Result<TrueInformation> {
    check_len("observations vs forcing", obs.len(), forcing.len())?;
    check_len(
        "observations vs model predictions",
        obs.len(),
        model_pred.len(),
    )?;
    if window.end > obs.len() || window.is_empty() {
        return Err(Error::invalid("evaluation window outside the record"));
    }
    let response = simulate_streamflow(truth, forcing.precip(), forcing.pet(), initial);
    let z = &obs[window.clone()];
    let h_given_forcing = conditional_entropy(z, &response[window.clone()], spec)?;
    let h_given_model = conditional_entropy(z, &model_pred[window.clone()], spec)?;
    let i_forcing = mutual_information(z, &response[window], spec)?.value;
    Ok(TrueInformation {
        h_given_forcing,
        h_given_model,
        i_forcing,
        missing: h_given_model - h_given_forcing,
    })
}
