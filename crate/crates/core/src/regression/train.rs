use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::LagEmbedding;
use super::mlp::Mlp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Heavy-ball momentum.
    Momentum,
    /// Momentum with per-parameter scaling by the running squared gradient.
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "momentum" => Ok(Optimizer::Momentum),
            "adam" => Ok(Optimizer::Adam),
            other => Err(Error::invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

impl std::fmt::Display for Optimizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Optimizer::Momentum => "momentum",
            Optimizer::Adam => "adam",
        })
    }
}

const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressorConfig {
    pub hidden: usize,
    pub max_epochs: usize,
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    /// Momentum coefficient (first-moment decay for Adam).
    pub momentum: f64,
    /// L2 penalty coefficient on all network parameters.
    pub weight_decay: f64,
    /// Epochs without validation improvement before the learning rate is
    /// multiplied by `backoff` and the best weights restored.
    pub stall_epochs: usize,
    pub backoff: f64,
    /// Epochs without validation improvement before training stops.
    pub patience: usize,
    pub min_learning_rate: f64,
    /// Trailing share of the training rows held out for early stopping.
    pub validation_fraction: f64,
    /// Independently initialised networks whose predictions are averaged.
    pub ensemble: usize,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            hidden: 20,
            max_epochs: 3000,
            optimizer: Optimizer::Adam,
            learning_rate: 0.01,
            momentum: 0.9,
            weight_decay: 0.0,
            stall_epochs: 40,
            backoff: 0.5,
            patience: 200,
            min_learning_rate: 1e-4,
            validation_fraction: 0.2,
            ensemble: 1,
            seed: 0,
        }
    }
}

impl RegressorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.ensemble == 0 {
            return Err(Error::invalid(
                "regressor needs at least one hidden unit and one member",
            ));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "validation fraction {} outside (0,1)",
                self.validation_fraction
            )));
        }
        if self.learning_rate.is_nan()
            || self.learning_rate <= 0.0
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(Error::invalid(
                "learning rate must be positive and momentum in [0,1)",
            ));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight decay must be non-negative"));
        }
        if !(self.backoff > 0.0 && self.backoff < 1.0) {
            return Err(Error::invalid("backoff must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Per-feature affine standardisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Column statistics of row-major `xs` with `width` columns. Constant
    /// columns get unit scale.
    pub fn fit(xs: &[f64], width: usize) -> Self {
        let n = (xs.len() / width) as f64;
        let mut mean = vec![0.0; width];
        for row in xs.chunks_exact(width) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for row in xs.chunks_exact(width) {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn apply(&self, xs: &[f64]) -> Vec<f64> {
        let w = self.mean.len();
        xs.chunks_exact(w)
            .flat_map(|row| {
                row.iter()
                    .zip(&self.mean)
                    .zip(&self.scale)
                    .map(|((v, m), s)| (v - m) / s)
            })
            .collect()
    }
}

/// A fitted regression map from a lag window to a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedRegressor {
    pub net: Mlp,
    pub inputs: Standardizer,
    pub target: Standardizer,
    pub epochs_run: usize,
    /// Validation loss (standardised units) of the returned weights.
    pub best_validation_loss: f64,
    /// Validation loss after every epoch.
    pub validation_history: Vec<f64>,
}

impl TrainedRegressor {
    pub fn predict(&self, window: &[f64]) -> f64 {
        let x = self.inputs.apply(window);
        self.net.forward(&x) * self.target.scale[0] + self.target.mean[0]
    }

    pub fn predict_rows(&self, embedding: &LagEmbedding, rows: Range<usize>) -> Vec<f64> {
        rows.map(|r| self.predict(embedding.row(r))).collect()
    }
}

/// Average of independently trained regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorEnsemble {
    pub members: Vec<TrainedRegressor>,
}

impl RegressorEnsemble {
    pub fn predict(&self, window: &[f64]) -> f64 {
        self.members.iter().map(|m| m.predict(window)).sum::<f64>() / self.members.len() as f64
    }

    pub fn predict_rows(&self, embedding: &LagEmbedding, rows: Range<usize>) -> Vec<f64> {
        rows.map(|r| self.predict(embedding.row(r))).collect()
    }
}

/// Trains `config.ensemble` networks on `rows`. Member 0 uses `config.seed`,
/// so a one-member ensemble equals [`train_on_rows`].
pub fn train_ensemble(
    embedding: &LagEmbedding,
    rows: Range<usize>,
    config: &RegressorConfig,
) -> Result<RegressorEnsemble> {
    config.validate()?;
    let members = (0..config.ensemble)
        .into_par_iter()
        .map(|k| {
            let seed = if k == 0 {
                config.seed
            } else {
                crate::seed::derive(config.seed, &[k as u64])
            };
            train_on_rows(
                embedding,
                rows.clone(),
                &RegressorConfig { seed, ..*config },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegressorEnsemble { members })
}

/// Trains on every row of `embedding`.
pub fn train_regressor(
    embedding: &LagEmbedding,
    config: &RegressorConfig,
) -> Result<TrainedRegressor> {
    train_on_rows(embedding, 0..embedding.rows(), config)
}

/// Full-batch gradient descent with momentum. The trailing
/// `validation_fraction` of `rows` drives learning-rate backoff and early
/// stopping; the weights with the lowest validation loss are returned.
pub fn train_on_rows(
    embedding: &LagEmbedding,
    rows: Range<usize>,
    config: &RegressorConfig,
) -> Result<TrainedRegressor> {
    config.validate()?;
    let n = rows.len();
    if n < config.hidden + 2 {
        return Err(Error::invalid(format!(
            "{n} training rows for {} hidden units",
            config.hidden
        )));
    }
    let n_val = ((n as f64 * config.validation_fraction).round() as usize).clamp(1, n - 1);
    let fit_rows = rows.start..rows.end - n_val;
    let val_rows = rows.end - n_val..rows.end;
    let width = embedding.width();

    let inputs = Standardizer::fit(embedding.features(rows.clone()), width);
    let target = Standardizer::fit(embedding.targets(rows.clone()), 1);
    let x_fit = inputs.apply(embedding.features(fit_rows.clone()));
    let y_fit = target.apply(embedding.targets(fit_rows));
    let x_val = inputs.apply(embedding.features(val_rows.clone()));
    let y_val = target.apply(embedding.targets(val_rows));

    let mut net = Mlp::new(width, config.hidden, config.seed);
    let mut velocity = vec![0.0; net.params().len()];
    let mut second = vec![0.0; net.params().len()];
    let mut step = 0i32;
    let mut lr = config.learning_rate;
    let mut best = net.clone();
    let mut best_val = net.loss(&x_val, &y_val);
    let mut since_best = 0;
    let mut since_backoff = 0;
    let mut history = Vec::new();
    let mut epochs_run = 0;

    for epoch in 0..config.max_epochs {
        epochs_run = epoch + 1;
        let (loss, mut grad) = net.loss_and_gradient(&x_fit, &y_fit);
        if config.weight_decay > 0.0 {
            for (g, p) in grad.iter_mut().zip(net.params()) {
                *g += config.weight_decay * p;
            }
        }
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch, loss });
        }
        step += 1;
        match config.optimizer {
            Optimizer::Momentum => {
                for ((p, v), g) in net.params_mut().iter_mut().zip(&mut velocity).zip(&grad) {
                    *v = config.momentum * *v - lr * g;
                    *p += *v;
                }
            }
            Optimizer::Adam => {
                let c1 = 1.0 - config.momentum.powi(step);
                let c2 = 1.0 - ADAM_BETA2.powi(step);
                for (((p, m), v), g) in net
                    .params_mut()
                    .iter_mut()
                    .zip(&mut velocity)
                    .zip(&mut second)
                    .zip(&grad)
                {
                    *m = config.momentum * *m + (1.0 - config.momentum) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
                }
            }
        }

        let val = net.loss(&x_val, &y_val);
        if !val.is_finite() {
            return Err(Error::Diverged { epoch, loss: val });
        }
        history.push(val);
        if val < best_val {
            best_val = val;
            best = net.clone();
            since_best = 0;
            since_backoff = 0;
        } else {
            since_best += 1;
            since_backoff += 1;
        }
        if since_backoff >= config.stall_epochs {
            lr *= config.backoff;
            net = best.clone();
            velocity.iter_mut().for_each(|v| *v = 0.0);
            second.iter_mut().for_each(|v| *v = 0.0);
            step = 0;
            since_backoff = 0;
        }
        if since_best >= config.patience || lr < config.min_learning_rate {
            break;
        }
    }
    log::debug!(
        "regressor: {epochs_run} epochs, best validation loss {best_val:.5}, final lr {lr:.2e}"
    );

    Ok(TrainedRegressor {
        net: best,
        inputs,
        target,
        epochs_run,
        best_validation_loss: best_val,
        validation_history: history,
    })
}
