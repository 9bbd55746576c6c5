use serde::{Deserialize, Serialize};

use super::{cascade, ModelState, StepFluxes};
use crate::error::{Error, Result};

/// HyMod: Pareto-distributed soil moisture capacity feeding a quick cascade
/// of `n_quick` linear tanks and a slow cascade of `n_slow` linear tanks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HymodParams {
    /// Maximum point storage capacity [mm].
    pub c_max: f64,
    /// Shape of the capacity distribution.
    pub b_exp: f64,
    /// Fraction of effective rainfall routed to the quick cascade.
    pub alpha: f64,
    pub k_quick: f64,
    pub k_slow: f64,
    pub n_quick: usize,
    pub n_slow: usize,
}

impl HymodParams {
    pub fn new(
        c_max: f64,
        b_exp: f64,
        alpha: f64,
        k_quick: f64,
        k_slow: f64,
        n_quick: usize,
        n_slow: usize,
    ) -> Result<Self> {
        let p = Self {
            c_max,
            b_exp,
            alpha,
            k_quick,
            k_slow,
            n_quick,
            n_slow,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("hymod {name}={v} outside [0,1]")))
            }
        };
        if !(self.c_max > 0.0 && self.c_max <= 1000.0) {
            return Err(Error::invalid(format!(
                "hymod c_max={} outside (0,1000]",
                self.c_max
            )));
        }
        if !(0.0..=10.0).contains(&self.b_exp) {
            return Err(Error::invalid(format!(
                "hymod b_exp={} outside [0,10]",
                self.b_exp
            )));
        }
        unit("alpha", self.alpha)?;
        unit("k_quick", self.k_quick)?;
        unit("k_slow", self.k_slow)?;
        if self.n_quick == 0 || self.n_slow == 0 {
            return Err(Error::invalid(
                "hymod needs at least one quick and one slow tank",
            ));
        }
        Ok(())
    }

    /// Mean soil storage capacity of the Pareto distribution [mm].
    pub fn max_storage(&self) -> f64 {
        self.c_max / (self.b_exp + 1.0)
    }

    pub fn n_tanks(&self) -> usize {
        self.n_quick + self.n_slow
    }
}

/// Result of applying rainfall to the soil store, before evaporation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilExcess {
    pub effective_rain: f64,
    /// Soil storage after infiltration.
    pub storage: f64,
}

/// Splits rainfall `p` into infiltration and effective rainfall given the
/// current soil storage.
pub fn soil_excess(params: &HymodParams, storage: f64, p: f64) -> SoilExcess {
    let c_max = params.c_max;
    let shape = params.b_exp + 1.0;
    let s_max = params.max_storage();

    // critical capacity consistent with the current storage
    let ratio = (1.0 - storage / s_max).clamp(0.0, 1.0);
    let c_prev = c_max * (1.0 - ratio.powf(1.0 / shape));

    let overflow = (p - (c_max - c_prev)).max(0.0);
    let p_net = p - overflow;
    let c_new = ((c_prev + p_net) / c_max).min(1.0);
    let s_new = s_max * (1.0 - (1.0 - c_new).powf(shape));

    let infiltration = (s_new - storage).clamp(0.0, p_net);
    SoilExcess {
        effective_rain: overflow + (p_net - infiltration),
        storage: storage + infiltration,
    }
}

/// Actual evaporation from soil storage `storage` under potential rate `pet`.
pub fn soil_evaporation(params: &HymodParams, storage: f64, pet: f64) -> f64 {
    (pet * storage / params.max_storage()).min(storage).max(0.0)
}

pub(crate) fn step_in_place(
    state: &mut ModelState,
    params: &HymodParams,
    p: f64,
    pet: f64,
) -> StepFluxes {
    let excess = soil_excess(params, state.soil_store, p);
    let evap = soil_evaporation(params, excess.storage, pet);
    state.soil_store = excess.storage - evap;

    let quick_in = params.alpha * excess.effective_rain;
    let slow_in = excess.effective_rain - quick_in;
    let (quick, slow) = state.tank_stores.split_at_mut(params.n_quick);
    let q_quick = cascade(quick, |_| params.k_quick, quick_in);
    let q_slow = cascade(slow, |_| params.k_slow, slow_in);

    StepFluxes {
        streamflow: q_quick + q_slow,
        evaporation: evap,
        loss: 0.0,
        effective_rain: excess.effective_rain,
    }
}

/// One daily HyMod step.
pub fn step_hymod(state: &ModelState, params: &HymodParams, p: f64, pet: f64) -> (ModelState, f64) {
    let mut next = state.clone();
    let fluxes = step_in_place(&mut next, params, p, pet);
    (next, fluxes.streamflow)
}
