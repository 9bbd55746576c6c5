use std::ops::Deref;

use serde::{Deserialize, Serialize};

/// A uniformly sampled scalar sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    pub units: String,
    pub step: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, units: impl Into<String>) -> Self {
        Self {
            values,
            units: units.into(),
            step: "day".to_string(),
        }
    }

    pub fn daily_mm(values: Vec<f64>) -> Self {
        Self::new(values, "mm/day")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Copy of the samples in `range`, keeping units and step.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            values: self.values[range].to_vec(),
            units: self.units.clone(),
            step: self.step.clone(),
        }
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl From<Vec<f64>> for TimeSeries {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values, "")
    }
}
