use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Daily precipitation and potential evaporation, both in mm/day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    precip: Vec<f64>,
    pet: Vec<f64>,
}

impl Forcing {
    pub fn new(precip: Vec<f64>, pet: Vec<f64>) -> Result<Self> {
        check_len("forcing precip/pet", precip.len(), pet.len())?;
        if precip.is_empty() {
            return Err(Error::invalid("forcing must have at least one day"));
        }
        for (name, series) in [("precip", &precip), ("pet", &pet)] {
            if let Some((day, v)) = series
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                return Err(Error::invalid(format!("{name} on day {day} is {v}")));
            }
        }
        Ok(Self { precip, pet })
    }

    pub fn len(&self) -> usize {
        self.precip.len()
    }

    pub fn is_empty(&self) -> bool {
        self.precip.is_empty()
    }

    pub fn precip(&self) -> &[f64] {
        &self.precip
    }

    pub fn pet(&self) -> &[f64] {
        &self.pet
    }

    /// Copy of days `range`.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(
            self.precip[range.clone()].to_vec(),
            self.pet[range].to_vec(),
        )
    }

    /// Same PET, new precipitation. Used by the perturbation experiments.
    pub fn with_precip(&self, precip: Vec<f64>) -> Result<Self> {
        Self::new(precip, self.pet.clone())
    }
}
