use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::dynamics::Forcing;
use crate::error::{Error, Result};
use crate::seed;

pub const WET_DAY_PROBABILITY: f64 = 0.3;
pub const MEAN_WET_AMOUNT: f64 = 9.0;
pub const PET_MEAN: f64 = 3.5;
pub const PET_AMPLITUDE: f64 = 2.5;
pub const PET_PERIOD: f64 = 365.0;

/// Daily precipitation from a wet/dry occurrence process with exponential
/// wet-day amounts, and PET from an annual sinusoid.
pub fn generate_synthetic_forcing(seed: u64, n_days: usize) -> Result<Forcing> {
    if n_days == 0 {
        return Err(Error::invalid("synthetic forcing needs at least one day"));
    }
    let mut rng = seed::rng(seed);
    let amount = Exp::new(1.0 / MEAN_WET_AMOUNT).expect("positive rate");
    let precip = (0..n_days)
        .map(|_| {
            if rng.random::<f64>() < WET_DAY_PROBABILITY {
                amount.sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let pet = (0..n_days)
        .map(|t| {
            PET_MEAN + PET_AMPLITUDE * (2.0 * std::f64::consts::PI * t as f64 / PET_PERIOD).sin()
        })
        .collect();
    Forcing::new(precip, pet)
}

#[derive(Debug, Serialize, Deserialize)]
struct ForcingRecord {
    day: usize,
    precip_mm: f64,
    pet_mm: f64,
}

/// Reads a `day,precip_mm,pet_mm` file. Errors name the offending line.
pub fn load_forcing_csv(path: &Path) -> Result<Forcing> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as usize,
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["day", "precip_mm", "pet_mm"] {
        return Err(parse_err(
            1,
            format!(
                "expected header day,precip_mm,pet_mm, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let (mut precip, mut pet) = (Vec::new(), Vec::new());
    for record in reader.deserialize::<ForcingRecord>() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(parse_err(line, e.to_string()));
            }
        };
        let line = precip.len() as u64 + 2;
        for (name, v) in [("precip_mm", record.precip_mm), ("pet_mm", record.pet_mm)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(
                    line,
                    format!("{name}={v} must be finite and non-negative"),
                ));
            }
        }
        precip.push(record.precip_mm);
        pet.push(record.pet_mm);
    }
    if precip.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    Forcing::new(precip, pet)
}

pub fn write_forcing_csv(path: &Path, forcing: &Forcing) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for (day, (&p, &e)) in forcing.precip().iter().zip(forcing.pet()).enumerate() {
        writer.serialize(ForcingRecord {
            day,
            precip_mm: p,
            pet_mm: e,
        })?;
    }
    writer.flush()?;
    Ok(())
}
