use serde::{Deserialize, Serialize};

use super::{cascade, ModelState, StepFluxes};
use crate::error::{Error, Result};

/// Three linear reservoirs in series; `k[i]` is the daily outflow ratio of
/// bucket `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashParams {
    pub k: [f64; 3],
}

impl NashParams {
    pub fn new(k: [f64; 3]) -> Result<Self> {
        let p = Self { k };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.k.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::invalid(format!(
                "nash outflow ratio {k} outside [0,1]"
            )));
        }
        Ok(())
    }
}

pub(crate) fn step_in_place(
    state: &mut ModelState,
    params: &NashParams,
    inflow: f64,
) -> StepFluxes {
    let q = cascade(&mut state.tank_stores, |i| params.k[i], inflow);
    StepFluxes {
        streamflow: q,
        ..StepFluxes::default()
    }
}

/// One daily Nash cascade step. Outflows use start-of-step storage.
pub fn step_nash(state: &ModelState, params: &NashParams, inflow: f64) -> (ModelState, f64) {
    let mut next = state.clone();
    let fluxes = step_in_place(&mut next, params, inflow);
    (next, fluxes.streamflow)
}
