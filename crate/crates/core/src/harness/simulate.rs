use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::manifest::RunManifest;
use super::runner::{configured_forcing, in_pool, write_rows};
use crate::dynamics::{simulate, ModelParams};
use crate::error::Result;
use crate::seed;

pub const SIMULATION_FILE: &str = "simulation.csv";

/// Seed-tree branch of the standalone simulation.
const SIMULATE_BRANCH: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct SimulationRow {
    day: usize,
    precip_mm: f64,
    pet_mm: f64,
    streamflow_mm: f64,
    soil_store_mm: f64,
    mass_residual: f64,
}

/// Runs the truth model over `n_days` of the configured forcing from empty
/// stores and writes the daily record.
pub fn run_simulation(config: &ExperimentConfig, n_days: usize, out_dir: &Path) -> Result<PathBuf> {
    config.validate()?;
    let mut manifest = RunManifest::begin(out_dir, "simulate", config)?;
    let out = in_pool(config.workers, || -> Result<PathBuf> {
        let forcing = configured_forcing(
            config,
            seed::derive(config.seed, &[SIMULATE_BRANCH, 0]),
            "simulate",
            n_days,
        )?;
        let truth = ModelParams::Hymod(config.truth);
        let run = manifest.stage("simulate", || {
            simulate(&truth, &forcing, &truth.zero_state(), 0)
        })?;
        let rows = (0..n_days).map(|t| SimulationRow {
            day: t,
            precip_mm: forcing.precip()[t],
            pet_mm: forcing.pet()[t],
            streamflow_mm: run.streamflow[t],
            soil_store_mm: run.states[t].soil_store,
            mass_residual: run.mass_residual[t],
        });
        write_rows(&mut manifest, out_dir, SIMULATION_FILE, rows)
    })
    .and_then(|r| r);
    manifest.finish(out.as_ref().err())?;
    out
}
