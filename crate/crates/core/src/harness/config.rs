use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::HymodParams;
use crate::error::{Error, Result};
use crate::network::AssimilationConfig;
use crate::regression::{Optimizer, RegressorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Desk,
    Full,
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            other => Err(Error::Config(format!(
                "unknown scale {other:?} (desk|full)"
            ))),
        }
    }
}

impl Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AppendixA,
    AppendixB,
    AppendixC,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::AppendixA => "appendix_a",
            ExperimentKind::AppendixB => "appendix_b",
            ExperimentKind::AppendixC => "appendix_c",
        }
    }

    /// Stage id of the experiment in the seed tree.
    pub(crate) fn seed_id(self) -> u64 {
        match self {
            ExperimentKind::AppendixA => 1,
            ExperimentKind::AppendixB => 2,
            ExperimentKind::AppendixC => 3,
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "appendix_a" => Ok(ExperimentKind::AppendixA),
            "appendix_b" => Ok(ExperimentKind::AppendixB),
            "appendix_c" => Ok(ExperimentKind::AppendixC),
            other => Err(Error::Config(format!("unknown experiment {other:?}"))),
        }
    }
}

impl Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ForcingSource {
    Synthetic,
    Csv(PathBuf),
}

impl Display for ForcingSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ForcingSource::Synthetic => f.write_str("synthetic"),
            ForcingSource::Csv(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Bayesian-inconsistency experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigA {
    /// Parameter sets per model structure.
    pub n_params: usize,
    /// Perturbed forcing series per noise level.
    pub n_forcings: usize,
    pub n_days: usize,
    /// Leading days excluded from the likelihood.
    pub warmup: usize,
    pub sigma_u: Vec<f64>,
    pub sigma_y: Vec<f64>,
    pub bootstrap: usize,
}

/// Regression-bound experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigB {
    pub n_days: usize,
    /// Truth spin-up days simulated before the record starts.
    pub spinup: usize,
    pub sigma_u: Vec<f64>,
    /// Hypothesis-model parameter draws per noise level.
    pub replicates: usize,
    pub lag: usize,
    pub fractions: Vec<f64>,
    /// Training share used for the missing-information estimates.
    pub train_fraction: f64,
    pub bins: usize,
    /// PET values spread evenly over the lag window as extra regressor
    /// inputs; 0 uses precipitation only.
    pub pet_lags: usize,
    /// Noise level of the perturbed forcing used for the convergence curve.
    pub convergence_sigma: f64,
    /// The regressor is trained on ln(streamflow + offset); 0 disables it.
    pub log_offset: f64,
    pub regressor: RegressorConfig,
}

/// Assimilation and system-identification experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigC {
    pub spinup: usize,
    pub calibration_days: usize,
    pub evaluation_days: usize,
    /// Hypothesis model: the truth with a degraded infiltration function.
    pub hypothesis: HymodParams,
    pub prior_members: usize,
    pub assimilation: AssimilationConfig,
    pub te_lag: usize,
    pub te_bins: usize,
    pub identify_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub scale: Scale,
    pub forcing: ForcingSource,
    /// Rayon worker threads; 0 uses the global pool.
    pub workers: usize,
    /// Synthetic-truth HyMod parameters.
    pub truth: HymodParams,
    pub a: ConfigA,
    pub b: ConfigB,
    pub c: ConfigC,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn default_truth() -> HymodParams {
    HymodParams {
        c_max: 100.0,
        b_exp: 0.5,
        alpha: 0.5,
        k_quick: 0.6,
        k_slow: 0.25,
        n_quick: 3,
        n_slow: 3,
    }
}

impl ExperimentConfig {
    pub fn defaults(scale: Scale) -> Self {
        let truth = default_truth();
        let full = scale == Scale::Full;
        Self {
            experiment: None,
            seed: DEFAULT_SEED,
            scale,
            forcing: ForcingSource::Synthetic,
            workers: 0,
            truth,
            a: ConfigA {
                n_params: if full { 500 } else { 100 },
                n_forcings: if full { 500 } else { 100 },
                n_days: 1000,
                warmup: 500,
                sigma_u: vec![0.01, 0.1, 0.5],
                sigma_y: vec![0.01, 0.1, 0.5],
                bootstrap: 10,
            },
            b: ConfigB {
                n_days: 10_000,
                spinup: 365,
                sigma_u: vec![0.1, 0.5, 1.0, 2.0, 4.0, 8.0],
                replicates: 30,
                lag: 90,
                fractions: vec![0.1, 0.2, 0.4, 0.6, 0.8],
                train_fraction: 0.6,
                bins: 20,
                pet_lags: 10,
                convergence_sigma: 0.1,
                log_offset: 0.01,
                regressor: RegressorConfig {
                    weight_decay: 0.003,
                    patience: 400,
                    stall_epochs: 80,
                    ensemble: 3,
                    ..RegressorConfig::default()
                },
            },
            c: ConfigC {
                spinup: 365,
                calibration_days: 3 * 365,
                evaluation_days: 365,
                hypothesis: HymodParams {
                    b_exp: 3.0,
                    ..truth
                },
                prior_members: 200,
                assimilation: AssimilationConfig {
                    particles: if full { 1000 } else { 200 },
                    ..AssimilationConfig::default()
                },
                te_lag: 1,
                te_bins: 11,
                identify_bins: 8,
            },
        }
    }

    /// Defaults for the scale named in `pairs` (last one wins), then every
    /// pair applied in order.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let scale = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "scale")
            .map(|(_, v)| v.parse())
            .transpose()?
            .unwrap_or(Scale::Desk);
        let mut cfg = Self::defaults(scale);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = parse_pairs(&text).map_err(|(line, message)| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        pairs.extend_from_slice(overrides);
        Self::from_pairs(&pairs)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.truth.validate()?;
        self.c.hypothesis.validate()?;
        if self.c.hypothesis.n_tanks() != self.truth.n_tanks() {
            return bad("c.hypothesis must have the truth's tank counts".into());
        }
        let a = &self.a;
        if a.n_params == 0 || a.n_forcings == 0 || a.bootstrap == 0 {
            return bad("a.n_params, a.n_forcings and a.bootstrap must be positive".into());
        }
        if a.warmup >= a.n_days {
            return bad(format!(
                "a.warmup {} must be below a.n_days {}",
                a.warmup, a.n_days
            ));
        }
        for (name, grid) in [
            ("a.sigma_u", &a.sigma_u),
            ("a.sigma_y", &a.sigma_y),
            ("b.sigma_u", &self.b.sigma_u),
        ] {
            if grid.is_empty() || grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                return bad(format!(
                    "{name} must be a non-empty list of positive values"
                ));
            }
        }
        let b = &self.b;
        if b.replicates == 0 || b.lag == 0 || b.bins < 2 {
            return bad("b.replicates, b.lag must be positive and b.bins at least 2".into());
        }
        if b.lag >= b.n_days / 2 {
            return bad(format!("b.lag {} too long for {} days", b.lag, b.n_days));
        }
        if !(b.train_fraction > 0.0 && b.train_fraction < 1.0) {
            return bad(format!(
                "b.train_fraction {} outside (0,1)",
                b.train_fraction
            ));
        }
        if b.fractions.is_empty()
            || b.fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0))
            || b.fractions.windows(2).any(|w| w[0] >= w[1])
        {
            return bad("b.fractions must be strictly ascending values in (0,1)".into());
        }
        if b.log_offset.is_nan() || b.log_offset < 0.0 {
            return bad("b.log_offset must be non-negative".into());
        }
        if !(b.convergence_sigma > 0.0 && b.convergence_sigma.is_finite()) {
            return bad("b.convergence_sigma must be positive".into());
        }
        if b.pet_lags > b.lag {
            return bad(format!("b.pet_lags {} exceeds b.lag {}", b.pet_lags, b.lag));
        }
        b.regressor.validate()?;
        let c = &self.c;
        if c.calibration_days == 0 || c.evaluation_days == 0 || c.prior_members == 0 {
            return bad(
                "c.calibration_days, c.evaluation_days and c.prior_members must be positive".into(),
            );
        }
        if c.te_lag == 0 || c.te_bins < 2 || c.identify_bins < 2 {
            return bad("c.te_lag must be positive and bin counts at least 2".into());
        }
        c.assimilation.validate()?;
        Ok(())
    }

    /// Sets one key. Unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "experiment" => self.experiment = Some(parse(key, v)?),
            "seed" => self.seed = parse(key, v)?,
            "scale" => self.scale = parse(key, v)?,
            "workers" => self.workers = parse(key, v)?,
            "forcing" => {
                self.forcing = if v == "synthetic" {
                    ForcingSource::Synthetic
                } else {
                    ForcingSource::Csv(PathBuf::from(v))
                }
            }
            _ => {
                if let Some(k) = key.strip_prefix("truth.") {
                    return set_hymod(&mut self.truth, k, key, v, true);
                }
                if let Some(k) = key.strip_prefix("c.hypothesis.") {
                    return set_hymod(&mut self.c.hypothesis, k, key, v, false);
                }
                if let Some(k) = key.strip_prefix("b.regressor.") {
                    return set_regressor(&mut self.b.regressor, k, key, v);
                }
                self.set_experiment_key(key, v)?;
            }
        }
        Ok(())
    }

    fn set_experiment_key(&mut self, key: &str, v: &str) -> Result<()> {
        let (a, b, c) = (&mut self.a, &mut self.b, &mut self.c);
        let da = &mut c.assimilation;
        match key {
            "a.n_params" => a.n_params = parse(key, v)?,
            "a.n_forcings" => a.n_forcings = parse(key, v)?,
            "a.n_days" => a.n_days = parse(key, v)?,
            "a.warmup" => a.warmup = parse(key, v)?,
            "a.sigma_u" => a.sigma_u = parse_list(key, v)?,
            "a.sigma_y" => a.sigma_y = parse_list(key, v)?,
            "a.bootstrap" => a.bootstrap = parse(key, v)?,
            "b.n_days" => b.n_days = parse(key, v)?,
            "b.spinup" => b.spinup = parse(key, v)?,
            "b.sigma_u" => b.sigma_u = parse_list(key, v)?,
            "b.replicates" => b.replicates = parse(key, v)?,
            "b.lag" => b.lag = parse(key, v)?,
            "b.fractions" => b.fractions = parse_list(key, v)?,
            "b.train_fraction" => b.train_fraction = parse(key, v)?,
            "b.bins" => b.bins = parse(key, v)?,
            "b.pet_lags" => b.pet_lags = parse(key, v)?,
            "b.convergence_sigma" => b.convergence_sigma = parse(key, v)?,
            "b.log_offset" => b.log_offset = parse(key, v)?,
            "c.spinup" => c.spinup = parse(key, v)?,
            "c.calibration_days" => c.calibration_days = parse(key, v)?,
            "c.evaluation_days" => c.evaluation_days = parse(key, v)?,
            "c.prior_members" => c.prior_members = parse(key, v)?,
            "c.te_lag" => c.te_lag = parse(key, v)?,
            "c.te_bins" => c.te_bins = parse(key, v)?,
            "c.identify_bins" => c.identify_bins = parse(key, v)?,
            "c.particles" => da.particles = parse(key, v)?,
            "c.sigma_obs" => da.sigma_obs = parse(key, v)?,
            "c.resample_threshold" => da.resample_threshold = parse(key, v)?,
            "c.param_jitter" => da.param_jitter = parse(key, v)?,
            "c.state_noise" => da.state_noise = parse(key, v)?,
            "c.posterior_draws" => da.posterior_draws = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Every key with its current value, in a stable order.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        if let Some(e) = self.experiment {
            put("experiment", e.to_string());
        }
        put("seed", self.seed.to_string());
        put("scale", self.scale.to_string());
        put("workers", self.workers.to_string());
        put("forcing", self.forcing.to_string());
        for (prefix, p, counts) in [
            ("truth", &self.truth, true),
            ("c.hypothesis", &self.c.hypothesis, false),
        ] {
            put(&format!("{prefix}.c_max"), p.c_max.to_string());
            put(&format!("{prefix}.b_exp"), p.b_exp.to_string());
            put(&format!("{prefix}.alpha"), p.alpha.to_string());
            put(&format!("{prefix}.k_quick"), p.k_quick.to_string());
            put(&format!("{prefix}.k_slow"), p.k_slow.to_string());
            if counts {
                put(&format!("{prefix}.n_quick"), p.n_quick.to_string());
                put(&format!("{prefix}.n_slow"), p.n_slow.to_string());
            }
        }
        let (a, b, c) = (&self.a, &self.b, &self.c);
        put("a.n_params", a.n_params.to_string());
        put("a.n_forcings", a.n_forcings.to_string());
        put("a.n_days", a.n_days.to_string());
        put("a.warmup", a.warmup.to_string());
        put("a.sigma_u", join(&a.sigma_u));
        put("a.sigma_y", join(&a.sigma_y));
        put("a.bootstrap", a.bootstrap.to_string());
        put("b.n_days", b.n_days.to_string());
        put("b.spinup", b.spinup.to_string());
        put("b.sigma_u", join(&b.sigma_u));
        put("b.replicates", b.replicates.to_string());
        put("b.lag", b.lag.to_string());
        put("b.fractions", join(&b.fractions));
        put("b.train_fraction", b.train_fraction.to_string());
        put("b.bins", b.bins.to_string());
        put("b.pet_lags", b.pet_lags.to_string());
        put("b.convergence_sigma", b.convergence_sigma.to_string());
        put("b.log_offset", b.log_offset.to_string());
        let r = &b.regressor;
        put("b.regressor.hidden", r.hidden.to_string());
        put("b.regressor.max_epochs", r.max_epochs.to_string());
        put("b.regressor.optimizer", r.optimizer.to_string());
        put("b.regressor.learning_rate", r.learning_rate.to_string());
        put("b.regressor.momentum", r.momentum.to_string());
        put("b.regressor.weight_decay", r.weight_decay.to_string());
        put("b.regressor.stall_epochs", r.stall_epochs.to_string());
        put("b.regressor.backoff", r.backoff.to_string());
        put("b.regressor.patience", r.patience.to_string());
        put(
            "b.regressor.min_learning_rate",
            r.min_learning_rate.to_string(),
        );
        put(
            "b.regressor.validation_fraction",
            r.validation_fraction.to_string(),
        );
        put("b.regressor.ensemble", r.ensemble.to_string());
        put("b.regressor.seed", r.seed.to_string());
        put("c.spinup", c.spinup.to_string());
        put("c.calibration_days", c.calibration_days.to_string());
        put("c.evaluation_days", c.evaluation_days.to_string());
        put("c.prior_members", c.prior_members.to_string());
        put("c.te_lag", c.te_lag.to_string());
        put("c.te_bins", c.te_bins.to_string());
        put("c.identify_bins", c.identify_bins.to_string());
        let da = &c.assimilation;
        put("c.particles", da.particles.to_string());
        put("c.sigma_obs", da.sigma_obs.to_string());
        put("c.resample_threshold", da.resample_threshold.to_string());
        put("c.param_jitter", da.param_jitter.to_string());
        put("c.state_noise", da.state_noise.to_string());
        put("c.posterior_draws", da.posterior_draws.to_string());
        m
    }

    /// The config as `key = value` lines.
    pub fn to_text(&self) -> String {
        self.entries()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn set_hymod(p: &mut HymodParams, field: &str, key: &str, v: &str, counts: bool) -> Result<()> {
    match field {
        "c_max" => p.c_max = parse(key, v)?,
        "b_exp" => p.b_exp = parse(key, v)?,
        "alpha" => p.alpha = parse(key, v)?,
        "k_quick" => p.k_quick = parse(key, v)?,
        "k_slow" => p.k_slow = parse(key, v)?,
        "n_quick" if counts => p.n_quick = parse(key, v)?,
        "n_slow" if counts => p.n_slow = parse(key, v)?,
        _ => return Err(Error::Config(format!("unknown key {key:?}"))),
    }
    Ok(())
}

fn set_regressor(r: &mut RegressorConfig, field: &str, key: &str, v: &str) -> Result<()> {
    match field {
        "hidden" => r.hidden = parse(key, v)?,
        "max_epochs" => r.max_epochs = parse(key, v)?,
        "optimizer" => r.optimizer = parse::<Optimizer>(key, v)?,
        "learning_rate" => r.learning_rate = parse(key, v)?,
        "momentum" => r.momentum = parse(key, v)?,
        "weight_decay" => r.weight_decay = parse(key, v)?,
        "stall_epochs" => r.stall_epochs = parse(key, v)?,
        "backoff" => r.backoff = parse(key, v)?,
        "patience" => r.patience = parse(key, v)?,
        "min_learning_rate" => r.min_learning_rate = parse(key, v)?,
        "validation_fraction" => r.validation_fraction = parse(key, v)?,
        "ensemble" => r.ensemble = parse(key, v)?,
        "seed" => r.seed = parse(key, v)?,
        _ => return Err(Error::Config(format!("unknown key {key:?}"))),
    }
    Ok(())
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: Display,
{
    v.parse()
        .map_err(|e| Error::Config(format!("{key} = {v:?}: {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse(key, s.trim())).collect()
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `key = value` lines; `#` starts a comment. Errors carry the
/// 1-based line number.
pub fn parse_pairs(text: &str) -> std::result::Result<Vec<(String, String)>, (usize, String)> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err((i + 1, format!("expected key = value, got {line:?}")));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err((i + 1, "empty key".into()));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_round_trip() {
        let cfg = ExperimentConfig::defaults(Scale::Desk);
        let pairs: Vec<(String, String)> = cfg.entries().into_iter().collect();
        assert_eq!(ExperimentConfig::from_pairs(&pairs).unwrap(), cfg);
    }

    #[test]
    fn scale_selects_defaults_and_overrides_apply() {
        let pairs = vec![
            ("a.bootstrap".to_string(), "4".to_string()),
            ("scale".to_string(), "full".to_string()),
        ];
        let cfg = ExperimentConfig::from_pairs(&pairs).unwrap();
        assert_eq!(cfg.a.n_params, 500);
        assert_eq!(cfg.a.bootstrap, 4);
    }

    #[test]
    fn bad_lines_and_keys() {
        assert_eq!(parse_pairs("seed = 1\n\nnonsense\n").unwrap_err().0, 3);
        let pairs = vec![("nope".to_string(), "1".to_string())];
        assert!(ExperimentConfig::from_pairs(&pairs).is_err());
        let pairs = vec![("a.sigma_u".to_string(), "0.1,x".to_string())];
        assert!(ExperimentConfig::from_pairs(&pairs).is_err());
    }
}
