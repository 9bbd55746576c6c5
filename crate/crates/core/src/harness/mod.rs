//! Configuration, synthetic forcing, run manifests and the three experiment
//! runners.

mod config;
mod experiment_a;
mod experiment_b;
mod experiment_c;
mod forcing;
mod manifest;
mod runner;
mod simulate;

pub use config::{
    default_truth, parse_pairs, ConfigA, ConfigB, ConfigC, ExperimentConfig, ExperimentKind,
    ForcingSource, Scale, DEFAULT_SEED,
};
pub use experiment_a::{run_experiment_a, ExperimentAReport, PROBABILITIES_FILE, STRUCTURES};
pub use experiment_b::{
    run_experiment_b, ExperimentBReport, SweepPoint, CONVERGENCE_FILE, MISSING_INFO_FILE,
};
pub use experiment_c::{
    run_experiment_c, ExperimentCReport, MseRow, Period, Variant, EDGE_TE_FILE, MSE_FILE,
};
pub use forcing::{
    generate_synthetic_forcing, load_forcing_csv, write_forcing_csv, MEAN_WET_AMOUNT,
    PET_AMPLITUDE, PET_MEAN, PET_PERIOD, WET_DAY_PROBABILITY,
};
pub use manifest::{RunManifest, RunStatus, StageTiming, MANIFEST_FILE};
pub use runner::in_pool;
pub use simulate::{run_simulation, SIMULATION_FILE};
