use serde::{Deserialize, Serialize};

use super::{ModelState, StepFluxes};
use crate::error::{Error, Result};

/// The three-parameter abc model: a fraction `a` of rain recharges a single
/// store, `b` is lost, the rest runs off directly, and the store drains at
/// rate `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbcParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl AbcParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = Self { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("abc {name}={v} outside [0,1]")));
            }
        }
        if self.a + self.b > 1.0 {
            return Err(Error::invalid(format!(
                "abc requires a + b <= 1, got {}",
                self.a + self.b
            )));
        }
        Ok(())
    }
}

pub(crate) fn step_in_place(state: &mut ModelState, params: &AbcParams, p: f64) -> StepFluxes {
    let store = &mut state.tank_stores[0];
    let drainage = params.c * *store;
    let direct = (1.0 - params.a - params.b).max(0.0) * p;
    *store += params.a * p - drainage;
    StepFluxes {
        streamflow: direct + drainage,
        loss: params.b * p,
        ..StepFluxes::default()
    }
}

/// One daily abc step.
pub fn step_abc(state: &ModelState, params: &AbcParams, p: f64) -> (ModelState, f64) {
    let mut next = state.clone();
    let fluxes = step_in_place(&mut next, params, p);
    (next, fluxes.streamflow)
}
