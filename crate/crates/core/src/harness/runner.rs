use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, ForcingSource};
use super::forcing::{generate_synthetic_forcing, load_forcing_csv};
use super::manifest::RunManifest;
use crate::dynamics::Forcing;
use crate::error::{Error, Result};
use crate::seed;

/// Seed of task `path` inside `kind`'s branch of the seed tree.
pub(crate) fn task_seed(config: &ExperimentConfig, kind: ExperimentKind, path: &[u64]) -> u64 {
    let mut full = vec![kind.seed_id()];
    full.extend_from_slice(path);
    seed::derive(config.seed, &full)
}

/// The first `n_days` of the configured forcing.
pub(crate) fn experiment_forcing(
    config: &ExperimentConfig,
    kind: ExperimentKind,
    n_days: usize,
) -> Result<Forcing> {
    configured_forcing(
        config,
        seed::derive(config.seed, &[kind.seed_id(), 0]),
        kind.name(),
        n_days,
    )
}

pub(crate) fn configured_forcing(
    config: &ExperimentConfig,
    synthetic_seed: u64,
    user: &str,
    n_days: usize,
) -> Result<Forcing> {
    match &config.forcing {
        ForcingSource::Synthetic => generate_synthetic_forcing(synthetic_seed, n_days),
        ForcingSource::Csv(path) => {
            let f = load_forcing_csv(path)?;
            if f.len() < n_days {
                return Err(Error::Config(format!(
                    "{} has {} days, {user} needs {n_days}",
                    path.display(),
                    f.len()
                )));
            }
            f.window(0..n_days)
        }
    }
}

/// Runs `f` on a pool of `workers` threads, or the global pool for 0.
pub fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) fn check_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    match config.experiment {
        Some(k) if k != kind => Err(Error::Config(format!(
            "config is for {k}, cannot run {kind}"
        ))),
        _ => config.validate(),
    }
}

/// Writes the manifest, runs `body` inside the worker pool and finalises
/// the manifest with the outcome.
pub(crate) fn with_manifest<T: Send>(
    config: &ExperimentConfig,
    kind: ExperimentKind,
    out_dir: &Path,
    body: impl FnOnce(&mut RunManifest) -> Result<T> + Send,
) -> Result<T> {
    check_kind(config, kind)?;
    let mut manifest = RunManifest::begin(out_dir, kind.name(), config)?;
    let out = in_pool(config.workers, || body(&mut manifest)).and_then(|r| r);
    manifest.finish(out.as_ref().err())?;
    out
}

/// Writes `rows` as a headed CSV and records it in the manifest.
pub(crate) fn write_rows<R: Serialize>(
    manifest: &mut RunManifest,
    out_dir: &Path,
    name: &str,
    rows: impl IntoIterator<Item = R>,
) -> Result<PathBuf> {
    let path = out_dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    manifest.add_output(&path);
    Ok(path)
}
