use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinScheme {
    /// Edges at empirical quantiles; near-equal occupancy.
    Quantile,
    /// Equal-width bins between the observed minimum and maximum.
    FixedWidth,
}

impl std::str::FromStr for BinScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" => Ok(BinScheme::Quantile),
            "fixed_width" | "fixed" => Ok(BinScheme::FixedWidth),
            other => Err(Error::invalid(format!("unknown bin scheme {other:?}"))),
        }
    }
}

impl std::fmt::Display for BinScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BinScheme::Quantile => "quantile",
            BinScheme::FixedWidth => "fixed_width",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub scheme: BinScheme,
    /// Requested bins per variable.
    pub bins: usize,
}

impl DiscretizationSpec {
    /// Default bin count for one- and two-variable statistics.
    pub const DEFAULT_BINS: usize = 20;
    /// Default bin count for three-variable statistics (CMI, TE).
    pub const DEFAULT_TE_BINS: usize = 11;

    pub fn new(scheme: BinScheme, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::invalid(format!("need at least 2 bins, got {bins}")));
        }
        Ok(Self { scheme, bins })
    }

    pub fn quantile(bins: usize) -> Self {
        Self::new(BinScheme::Quantile, bins).expect("bins >= 2")
    }

    pub fn fixed_width(bins: usize) -> Self {
        Self::new(BinScheme::FixedWidth, bins).expect("bins >= 2")
    }
}

impl Default for DiscretizationSpec {
    fn default() -> Self {
        Self::quantile(Self::DEFAULT_BINS)
    }
}

/// A series mapped to bin indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Binned {
    pub indices: Vec<usize>,
    /// `n_bins + 1` strictly increasing edges (a single repeated edge when
    /// the series is constant).
    pub edges: Vec<f64>,
}

impl Binned {
    pub fn n_bins(&self) -> usize {
        self.edges.len().saturating_sub(1).max(1)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Maps each value to a bin. Bins are left-closed; the last bin is also
/// right-closed so the observed range is fully covered.
pub fn discretize(series: &[f64], spec: &DiscretizationSpec) -> Result<Binned> {
    if series.is_empty() {
        return Err(Error::invalid("cannot discretize an empty series"));
    }
    if let Some(v) = series.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value {v} in series")));
    }
    if series.len() < spec.bins {
        return Err(Error::invalid(format!(
            "series of length {} is shorter than {} bins",
            series.len(),
            spec.bins
        )));
    }

    let (min, max) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if min == max {
        log::warn!(
            "constant series of length {}: collapsing to one bin",
            series.len()
        );
        return Ok(Binned {
            indices: vec![0; series.len()],
            edges: vec![min, max],
        });
    }

    let interior = match spec.scheme {
        BinScheme::Quantile => quantile_edges(series, spec.bins, min),
        BinScheme::FixedWidth => {
            let width = (max - min) / spec.bins as f64;
            return Ok(Binned {
                indices: series
                    .iter()
                    .map(|&v| (((v - min) / width) as usize).min(spec.bins - 1))
                    .collect(),
                edges: (0..=spec.bins)
                    .map(|j| {
                        if j == spec.bins {
                            max
                        } else {
                            min + j as f64 * width
                        }
                    })
                    .collect(),
            });
        }
    };
    if interior.len() + 1 < spec.bins {
        log::debug!(
            "quantile edges tied: {} of {} bins kept",
            interior.len() + 1,
            spec.bins
        );
    }

    let indices = series
        .iter()
        .map(|&v| interior.partition_point(|&e| e <= v))
        .collect();
    let mut edges = Vec::with_capacity(interior.len() + 2);
    edges.push(min);
    edges.extend_from_slice(&interior);
    edges.push(max);
    Ok(Binned { indices, edges })
}

/// Interior quantile edges with ties removed.
fn quantile_edges(series: &[f64], bins: usize, min: f64) -> Vec<f64> {
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for j in 1..bins {
        let e = sorted[j * n / bins];
        if e > min && edges.last().is_none_or(|&last| e > last) {
            edges.push(e);
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_width_midpoint_split() {
        let b = discretize(&[1.0, 2.0, 3.0, 4.0], &DiscretizationSpec::fixed_width(2)).unwrap();
        assert_eq!(b.indices, vec![0, 0, 1, 1]);
        assert_eq!(b.edges, vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn constant_series_collapses() {
        for spec in [
            DiscretizationSpec::quantile(4),
            DiscretizationSpec::fixed_width(4),
        ] {
            let b = discretize(&[3.0; 10], &spec).unwrap();
            assert_eq!(b.indices, vec![0; 10]);
            assert_eq!(b.n_bins(), 1);
        }
    }

    #[test]
    fn quantile_ties_merge_bins() {
        let x = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0];
        let b = discretize(&x, &DiscretizationSpec::quantile(5)).unwrap();
        assert_eq!(b.n_bins(), 3);
        assert_eq!(b.indices, vec![0, 0, 0, 0, 0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn binary_data_gets_one_bin_per_value() {
        let x = [0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
        let b = discretize(&x, &DiscretizationSpec::quantile(2)).unwrap();
        assert_eq!(b.indices, vec![0, 1, 1, 0, 1, 0]);
    }

    #[test]
    fn rejects_nan_and_short_series() {
        assert!(discretize(&[1.0, f64::NAN], &DiscretizationSpec::quantile(2)).is_err());
        assert!(discretize(&[1.0, 2.0], &DiscretizationSpec::quantile(3)).is_err());
        assert!(DiscretizationSpec::new(BinScheme::Quantile, 1).is_err());
    }
}
