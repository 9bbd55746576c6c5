use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Mean-squared error, Pearson correlation and additive bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearMetrics {
    pub mse: f64,
    /// `None` when either series has zero variance.
    pub pearson_r: Option<f64>,
    /// mean(pred - obs)
    pub mean_bias: f64,
}

pub fn linear_metrics(obs: &[f64], pred: &[f64]) -> Result<LinearMetrics> {
    check_len("linear metrics inputs", obs.len(), pred.len())?;
    if obs.len() < 2 {
        return Err(Error::invalid("linear metrics need at least two samples"));
    }
    let n = obs.len() as f64;
    let mean_o = obs.iter().sum::<f64>() / n;
    let mean_p = pred.iter().sum::<f64>() / n;
    let (mut sse, mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0);
    for (&o, &p) in obs.iter().zip(pred) {
        sse += (p - o) * (p - o);
        let (dx, dy) = (o - mean_o, p - mean_p);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let pearson_r = (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0));
    Ok(LinearMetrics {
        mse: sse / n,
        pearson_r,
        mean_bias: mean_p - mean_o,
    })
}

pub fn mse(obs: &[f64], pred: &[f64]) -> Result<f64> {
    check_len("mse inputs", obs.len(), pred.len())?;
    if obs.is_empty() {
        return Err(Error::invalid("mse of empty series"));
    }
    Ok(obs
        .iter()
        .zip(pred)
        .map(|(o, p)| (p - o) * (p - o))
        .sum::<f64>()
        / obs.len() as f64)
}
