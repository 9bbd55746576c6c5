//! Daily conceptual rainfall-runoff simulators.
//!
//! Every linear tank uses explicit daily stepping: outflow is computed from
//! start-of-step storage, then the tank receives its inflow.

mod abc;
mod forcing;
pub(crate) mod hymod;
mod nash;

use serde::{Deserialize, Serialize};

pub use abc::{step_abc, AbcParams};
pub use forcing::Forcing;
pub use hymod::{soil_evaporation, soil_excess, step_hymod, HymodParams, SoilExcess};
pub use nash::{step_nash, NashParams};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hymod,
    Nash,
    Abc,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Hymod => "hymod",
            ModelKind::Nash => "nash",
            ModelKind::Abc => "abc",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hymod" => Ok(ModelKind::Hymod),
            "nash" => Ok(ModelKind::Nash),
            "abc" => Ok(ModelKind::Abc),
            other => Err(Error::invalid(format!("unknown model kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters for one of the three model structures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Hymod(HymodParams),
    Nash(NashParams),
    Abc(AbcParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Hymod(_) => ModelKind::Hymod,
            ModelParams::Nash(_) => ModelKind::Nash,
            ModelParams::Abc(_) => ModelKind::Abc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelParams::Hymod(p) => p.validate(),
            ModelParams::Nash(p) => p.validate(),
            ModelParams::Abc(p) => p.validate(),
        }
    }

    /// All-empty state with the right number of tanks.
    pub fn zero_state(&self) -> ModelState {
        let tanks = match self {
            ModelParams::Hymod(p) => p.n_tanks(),
            ModelParams::Nash(_) => 3,
            ModelParams::Abc(_) => 1,
        };
        ModelState::zeroed(0.0, tanks)
    }

    fn step(&self, state: &mut ModelState, p: f64, pet: f64) -> StepFluxes {
        match self {
            ModelParams::Hymod(params) => hymod::step_in_place(state, params, p, pet),
            ModelParams::Nash(params) => nash::step_in_place(state, params, p),
            ModelParams::Abc(params) => abc::step_in_place(state, params, p),
        }
    }
}

/// Model storages. HyMod keeps its quick tanks first, then its slow tanks;
/// Nash keeps its three buckets; abc keeps its single store in `tank_stores`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelState {
    pub soil_store: f64,
    pub tank_stores: Vec<f64>,
}

impl ModelState {
    pub fn zeroed(soil_store: f64, n_tanks: usize) -> Self {
        Self {
            soil_store,
            tank_stores: vec![0.0; n_tanks],
        }
    }

    pub fn total_storage(&self) -> f64 {
        self.soil_store + self.tank_stores.iter().sum::<f64>()
    }

    fn is_valid(&self) -> bool {
        std::iter::once(&self.soil_store)
            .chain(&self.tank_stores)
            .all(|s| s.is_finite() && *s >= 0.0)
    }
}

/// Water fluxes of one step [mm].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepFluxes {
    pub streamflow: f64,
    pub evaporation: f64,
    /// Water leaving the system by other routes (abc's `b` fraction).
    pub loss: f64,
    pub effective_rain: f64,
}

/// Routes `inflow` through a series of linear tanks; returns the outflow of
/// the last tank.
pub(crate) fn cascade(stores: &mut [f64], k: impl Fn(usize) -> f64, inflow: f64) -> f64 {
    let mut input = inflow;
    for (i, store) in stores.iter_mut().enumerate() {
        let out = k(i) * *store;
        *store += input - out;
        input = out;
    }
    input
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub streamflow: TimeSeries,
    /// End-of-step state for every day.
    pub states: Vec<ModelState>,
    /// Inflow minus outflows minus storage change, per step.
    pub mass_residual: Vec<f64>,
    /// Leading days that belong to the spin-up period.
    pub warmup: usize,
}

impl SimulationResult {
    /// Streamflow after the warm-up period.
    pub fn observed_streamflow(&self) -> &[f64] {
        &self.streamflow[self.warmup..]
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.mass_residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

fn check_initial(params: &ModelParams, initial: &ModelState) -> Result<()> {
    let expected = params.zero_state().tank_stores.len();
    if initial.tank_stores.len() != expected {
        return Err(Error::invalid(format!(
            "{} state needs {expected} tanks, got {}",
            params.kind(),
            initial.tank_stores.len()
        )));
    }
    if !initial.is_valid() {
        return Err(Error::invalid(
            "initial stores must be finite and non-negative",
        ));
    }
    Ok(())
}

/// Runs a model over `forcing`, recording states, streamflow and the
/// per-step water balance. The first `warmup` days are flagged for exclusion.
pub fn simulate(
    params: &ModelParams,
    forcing: &Forcing,
    initial: &ModelState,
    warmup: usize,
) -> Result<SimulationResult> {
    params.validate()?;
    check_initial(params, initial)?;
    if warmup >= forcing.len() {
        return Err(Error::invalid(format!(
            "warmup {warmup} must be shorter than the {} day record",
            forcing.len()
        )));
    }

    let n = forcing.len();
    let mut state = initial.clone();
    let mut streamflow = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut mass_residual = Vec::with_capacity(n);
    for (&p, &pet) in forcing.precip().iter().zip(forcing.pet()) {
        let before = state.total_storage();
        let fluxes = params.step(&mut state, p, pet);
        let after = state.total_storage();
        mass_residual
            .push(p - fluxes.streamflow - fluxes.evaporation - fluxes.loss - (after - before));
        streamflow.push(fluxes.streamflow);
        states.push(state.clone());
    }
    Ok(SimulationResult {
        streamflow: TimeSeries::daily_mm(streamflow),
        states,
        mass_residual,
        warmup,
    })
}

/// Streamflow-only simulation for ensemble work. Parameters and state are
/// assumed valid and `precip`/`pet` of equal length.
pub fn simulate_streamflow(
    params: &ModelParams,
    precip: &[f64],
    pet: &[f64],
    initial: &ModelState,
) -> Vec<f64> {
    debug_assert_eq!(precip.len(), pet.len());
    let mut state = initial.clone();
    precip
        .iter()
        .zip(pet)
        .map(|(&p, &e)| params.step(&mut state, p, e).streamflow)
        .collect()
}

/// Like [`simulate_streamflow`] but also returns the final state.
pub fn run_from(
    params: &ModelParams,
    precip: &[f64],
    pet: &[f64],
    initial: &ModelState,
) -> (Vec<f64>, ModelState) {
    let mut state = initial.clone();
    let flows = precip
        .iter()
        .zip(pet)
        .map(|(&p, &e)| params.step(&mut state, p, e).streamflow)
        .collect();
    (flows, state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forcing(n: usize) -> Forcing {
        let precip = (0..n).map(|i| if i % 3 == 0 { 8.0 } else { 0.0 }).collect();
        let pet = vec![2.0; n];
        Forcing::new(precip, pet).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero_flow() {
        let f = Forcing::new(vec![0.0; 20], vec![0.0; 20]).unwrap();
        for params in [
            ModelParams::Hymod(HymodParams::new(300.0, 2.0, 0.4, 0.6, 0.05, 3, 3).unwrap()),
            ModelParams::Nash(NashParams::new([0.3, 0.4, 0.5]).unwrap()),
            ModelParams::Abc(AbcParams::new(0.3, 0.2, 0.1).unwrap()),
        ] {
            let r = simulate(&params, &f, &params.zero_state(), 5).unwrap();
            assert!(r.streamflow.iter().all(|q| *q == 0.0));
            assert_eq!(r.observed_streamflow().len(), 15);
        }
    }

    #[test]
    fn deterministic() {
        let params =
            ModelParams::Hymod(HymodParams::new(150.0, 0.7, 0.3, 0.5, 0.02, 3, 3).unwrap());
        let f = forcing(200);
        let a = simulate(&params, &f, &params.zero_state(), 10).unwrap();
        let b = simulate(&params, &f, &params.zero_state(), 10).unwrap();
        assert_eq!(a, b);
        assert!(a.max_abs_residual() < 1e-9);
    }

    #[test]
    fn streamflow_fast_path_matches() {
        let params = ModelParams::Nash(NashParams::new([0.3, 0.4, 0.5]).unwrap());
        let f = forcing(50);
        let full = simulate(&params, &f, &params.zero_state(), 0).unwrap();
        let fast = simulate_streamflow(&params, f.precip(), f.pet(), &params.zero_state());
        assert_eq!(full.streamflow.values(), fast.as_slice());
    }

    #[test]
    fn rejects_bad_warmup_and_state() {
        let params = ModelParams::Abc(AbcParams::new(0.3, 0.2, 0.1).unwrap());
        let f = forcing(10);
        assert!(simulate(&params, &f, &params.zero_state(), 10).is_err());
        assert!(simulate(&params, &f, &ModelState::zeroed(0.0, 3), 0).is_err());
    }
}
