use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trajectories::{
    check_hymod_state, hymod_node_names, hymod_outflow, hymod_row, jitter_params, jitter_state,
    perturb_state, TrajectoryEnsemble,
};
use crate::dynamics::{hymod, Forcing, HymodParams, ModelState};
use crate::error::{check_len, Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssimilationConfig {
    /// Particles per filter.
    pub particles: usize,
    /// Observation error standard deviation [mm/day].
    pub sigma_obs: f64,
    /// Resample when the effective sample size drops below this fraction of
    /// `particles`.
    pub resample_threshold: f64,
    /// Relative spread of parameters and initial stores across particles.
    pub param_jitter: f64,
    /// Standard deviation of the multiplicative log-normal noise applied to
    /// every store after each step.
    pub state_noise: f64,
    /// Number of independent smoothed trajectories drawn for the posterior.
    pub posterior_draws: usize,
    pub seed: u64,
}

impl Default for AssimilationConfig {
    fn default() -> Self {
        Self {
            particles: 200,
            sigma_obs: 0.5,
            resample_threshold: 0.5,
            param_jitter: 0.05,
            state_noise: 0.05,
            posterior_draws: 50,
            seed: 0,
        }
    }
}

impl AssimilationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 10 {
            return Err(Error::invalid(format!(
                "assimilation needs at least 10 particles, got {}",
                self.particles
            )));
        }
        if self.sigma_obs.is_nan() || self.sigma_obs <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma_obs={} must be positive",
                self.sigma_obs
            )));
        }
        if !(self.resample_threshold > 0.0 && self.resample_threshold <= 1.0) {
            return Err(Error::invalid(format!(
                "resample_threshold={} outside (0,1]",
                self.resample_threshold
            )));
        }
        if !(0.0..1.0).contains(&self.param_jitter) {
            return Err(Error::invalid(format!(
                "param_jitter={} outside [0,1)",
                self.param_jitter
            )));
        }
        if !(self.state_noise >= 0.0 && self.state_noise.is_finite()) {
            return Err(Error::invalid(format!(
                "state_noise={} must be non-negative",
                self.state_noise
            )));
        }
        if self.posterior_draws == 0 {
            return Err(Error::invalid("posterior_draws must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AssimilationResult {
    /// One smoothed trajectory per posterior draw.
    pub posterior: TrajectoryEnsemble,
    /// Filtered (analysis) streamflow, averaged over filters.
    pub analysis_streamflow: Vec<f64>,
    pub draw_params: Vec<HymodParams>,
    /// State of each draw after the last assimilated step.
    pub final_states: Vec<ModelState>,
    pub resample_events: usize,
    pub weight_resets: usize,
    pub mean_ess_fraction: f64,
}

/// Systematic resampling with offset `u` in `[0,1)`. Weights must be
/// non-negative and sum to one.
pub fn systematic_resample(weights: &[f64], u: f64) -> Vec<usize> {
    let m = weights.len();
    let mut out = Vec::with_capacity(m);
    let mut cum = weights[0];
    let mut j = 0;
    for i in 0..m {
        let pos = (u + i as f64) / m as f64;
        while pos > cum && j + 1 < m {
            j += 1;
            cum += weights[j];
        }
        out.push(j);
    }
    out
}

/// Normalises log-weights in place into `weights`. Returns false when every
/// weight underflowed.
fn normalise(log_w: &[f64], weights: &mut [f64]) -> bool {
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return false;
    }
    let mut sum = 0.0;
    for (w, &l) in weights.iter_mut().zip(log_w) {
        *w = (l - max).exp();
        sum += *w;
    }
    weights.iter_mut().for_each(|w| *w /= sum);
    true
}

struct FilterRun {
    rows: Vec<f64>,
    analysis: Vec<f64>,
    params: HymodParams,
    final_state: ModelState,
    resamples: usize,
    resets: usize,
    ess_fraction: f64,
}

fn run_filter(
    prior: &HymodParams,
    forcing: &Forcing,
    initial: &ModelState,
    obs: &[f64],
    cfg: &AssimilationConfig,
    replicate: u64,
) -> FilterRun {
    let m = cfg.particles;
    let n = forcing.len();
    let mut rng = seed::child_rng(cfg.seed, &[replicate]);

    let mut params = Vec::with_capacity(m);
    let mut states = Vec::with_capacity(m);
    for i in 0..m {
        let mut prng = seed::child_rng(cfg.seed, &[replicate, i as u64 + 1]);
        params.push(jitter_params(prior, cfg.param_jitter, &mut prng));
        states.push(jitter_state(initial, cfg.param_jitter, &mut prng));
    }

    // history of start-of-step states and ancestry, for the backward trace
    let mut history: Vec<Vec<ModelState>> = Vec::with_capacity(n);
    let mut lineage: Vec<Vec<u32>> = Vec::with_capacity(n.saturating_sub(1));
    let mut analysis = Vec::with_capacity(n);
    let mut log_w = vec![0.0; m];
    let mut weights = vec![1.0 / m as f64; m];
    let (mut resamples, mut resets, mut ess_sum) = (0, 0, 0.0);
    let norm = -0.5 * (2.0 * std::f64::consts::PI).ln() - cfg.sigma_obs.ln();

    for (t, &o) in obs.iter().enumerate().take(n) {
        let mut estimate = 0.0;
        for i in 0..m {
            let y = hymod_outflow(&states[i], &params[i]);
            let r = (o - y) / cfg.sigma_obs;
            log_w[i] += norm - 0.5 * r * r;
        }
        if !normalise(&log_w, &mut weights) {
            log::warn!("particle weights underflowed at step {t}; reinitialising uniformly");
            resets += 1;
            log_w.iter_mut().for_each(|l| *l = 0.0);
            weights.iter_mut().for_each(|w| *w = 1.0 / m as f64);
        }
        for i in 0..m {
            estimate += weights[i] * hymod_outflow(&states[i], &params[i]);
        }
        analysis.push(estimate);
        let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        ess_sum += ess / m as f64;
        history.push(states.clone());
        if t + 1 == n {
            break;
        }

        let idx: Vec<usize> = if ess < cfg.resample_threshold * m as f64 {
            resamples += 1;
            log_w.iter_mut().for_each(|l| *l = 0.0);
            systematic_resample(&weights, rng.random::<f64>())
        } else {
            (0..m).collect()
        };
        let (p, e) = (forcing.precip()[t], forcing.pet()[t]);
        let mut next_params = Vec::with_capacity(m);
        let mut next_states = Vec::with_capacity(m);
        let mut next_log_w = Vec::with_capacity(m);
        for &a in &idx {
            let mut s = states[a].clone();
            hymod::step_in_place(&mut s, &params[a], p, e);
            perturb_state(&mut s, cfg.state_noise, &mut rng);
            next_params.push(params[a]);
            next_states.push(s);
            next_log_w.push(log_w[a]);
        }
        lineage.push(idx.iter().map(|&a| a as u32).collect());
        params = next_params;
        states = next_states;
        log_w = next_log_w;
    }

    // draw the final particle from the last filtering weights and trace back
    let u: f64 = rng.random();
    let mut j = weights
        .iter()
        .scan(0.0, |c, w| {
            *c += w;
            Some(*c)
        })
        .position(|c| u < c)
        .unwrap_or(m - 1);
    let chosen = params[j];
    let mut final_state = states[j].clone();
    hymod::step_in_place(
        &mut final_state,
        &chosen,
        forcing.precip()[n - 1],
        forcing.pet()[n - 1],
    );

    let mut path = vec![0usize; n];
    path[n - 1] = j;
    for t in (0..n - 1).rev() {
        j = lineage[t][j] as usize;
        path[t] = j;
    }
    let mut rows = Vec::with_capacity(n * (chosen.n_tanks() + 4));
    for t in 0..n {
        hymod_row(
            &history[t][path[t]],
            &chosen,
            forcing.precip()[t],
            forcing.pet()[t],
            &mut rows,
        );
    }
    FilterRun {
        rows,
        analysis,
        params: chosen,
        final_state,
        resamples,
        resets,
        ess_fraction: ess_sum / n as f64,
    }
}

/// Sequential importance resampling of HyMod states against observed
/// streamflow. Each posterior draw comes from an independent filter whose
/// genealogy is traced back from a particle drawn at the final step.
pub fn assimilate(
    prior: &HymodParams,
    forcing: &Forcing,
    initial: &ModelState,
    obs: &[f64],
    config: &AssimilationConfig,
) -> Result<AssimilationResult> {
    config.validate()?;
    check_hymod_state(prior, initial)?;
    check_len("observations and forcing", obs.len(), forcing.len())?;
    if obs.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("observations must be finite"));
    }

    let runs: Vec<FilterRun> = (0..config.posterior_draws as u64)
        .into_par_iter()
        .map(|r| run_filter(prior, forcing, initial, obs, config, r))
        .collect();

    let draws = runs.len() as f64;
    let mut analysis = vec![0.0; forcing.len()];
    for run in &runs {
        for (a, v) in analysis.iter_mut().zip(&run.analysis) {
            *a += v / draws;
        }
    }
    let resample_events = runs.iter().map(|r| r.resamples).sum();
    let weight_resets = runs.iter().map(|r| r.resets).sum();
    let mean_ess_fraction = runs.iter().map(|r| r.ess_fraction).sum::<f64>() / draws;
    let draw_params = runs.iter().map(|r| r.params).collect();
    let mut final_states = Vec::with_capacity(runs.len());
    let mut blocks = Vec::with_capacity(runs.len());
    for run in runs {
        final_states.push(run.final_state);
        blocks.push(run.rows);
    }
    Ok(AssimilationResult {
        posterior: TrajectoryEnsemble::from_members(hymod_node_names(prior), blocks)?,
        analysis_streamflow: analysis,
        draw_params,
        final_states,
        resample_events,
        weight_resets,
        mean_ess_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systematic_resampling_edges() {
        assert_eq!(systematic_resample(&[1.0, 0.0, 0.0], 0.3), vec![0, 0, 0]);
        assert_eq!(systematic_resample(&[0.0, 0.0, 1.0], 0.3), vec![2, 2, 2]);
        assert_eq!(systematic_resample(&[0.5, 0.5], 0.25), vec![0, 1]);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = AssimilationConfig {
            particles: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AssimilationConfig {
            sigma_obs: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
