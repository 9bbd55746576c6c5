use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Joint frequency table over one to three binned variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointHistogram {
    shape: Vec<usize>,
    /// Row-major counts; the last dimension varies fastest.
    counts: Vec<u64>,
    total: u64,
    /// Bin edges per dimension, when the variables came from real values.
    pub edges: Vec<Vec<f64>>,
}

impl JointHistogram {
    pub const MAX_DIMS: usize = 3;

    /// Counts aligned tuples of bin indices. `shape[d]` bounds the indices
    /// of column `d`.
    pub fn from_indices(columns: &[&[usize]], shape: &[usize]) -> Result<Self> {
        if columns.is_empty() || columns.len() > Self::MAX_DIMS {
            return Err(Error::invalid(format!(
                "joint histograms take 1 to 3 variables, got {}",
                columns.len()
            )));
        }
        check_len("histogram columns vs shape", columns.len(), shape.len())?;
        let n = columns[0].len();
        for c in &columns[1..] {
            check_len("histogram columns", n, c.len())?;
        }
        for (d, (col, &size)) in columns.iter().zip(shape).enumerate() {
            if let Some(&i) = col.iter().find(|&&i| i >= size) {
                return Err(Error::invalid(format!(
                    "index {i} out of range for dimension {d} of size {size}"
                )));
            }
        }

        let mut counts = vec![0u64; shape.iter().product()];
        for t in 0..n {
            let flat = columns
                .iter()
                .zip(shape)
                .fold(0, |acc, (col, &size)| acc * size + col[t]);
            counts[flat] += 1;
        }
        Ok(Self {
            shape: shape.to_vec(),
            counts,
            total: n as u64,
            edges: Vec::new(),
        })
    }

    /// Histogram from raw counts in row-major order.
    pub fn from_counts(counts: Vec<u64>, shape: &[usize]) -> Result<Self> {
        if shape.is_empty() || shape.len() > Self::MAX_DIMS {
            return Err(Error::invalid("joint histograms take 1 to 3 dimensions"));
        }
        check_len("counts vs shape", counts.len(), shape.iter().product())?;
        let total = counts.iter().sum();
        Ok(Self {
            shape: shape.to_vec(),
            counts,
            total,
            edges: Vec::new(),
        })
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Sums out every dimension not listed in `keep` (which must be
    /// ascending).
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "marginal dimensions must be ascending and non-empty",
            ));
        }
        if let Some(&d) = keep.iter().find(|&&d| d >= self.dims()) {
            return Err(Error::invalid(format!(
                "no dimension {d} in a {}-d histogram",
                self.dims()
            )));
        }
        let shape: Vec<usize> = keep.iter().map(|&d| self.shape[d]).collect();
        let mut counts = vec![0u64; shape.iter().product()];
        let mut idx = vec![0usize; self.dims()];
        for &c in &self.counts {
            if c > 0 {
                let flat = keep
                    .iter()
                    .zip(&shape)
                    .fold(0, |acc, (&d, &size)| acc * size + idx[d]);
                counts[flat] += c;
            }
            // advance the multi-index, last dimension fastest
            for d in (0..self.dims()).rev() {
                idx[d] += 1;
                if idx[d] < self.shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Self {
            shape,
            counts,
            total: self.total,
            edges: keep
                .iter()
                .filter_map(|&d| self.edges.get(d).cloned())
                .collect(),
        })
    }

    /// Plug-in Shannon entropy in nats; empty cells contribute nothing.
    pub fn entropy_nats(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let n = self.total as f64;
        let sum_c_ln_c: f64 = self
            .counts
            .iter()
            .filter(|&&c| c > 1)
            .map(|&c| {
                let c = c as f64;
                c * c.ln()
            })
            .sum();
        (n.ln() - sum_c_ln_c / n).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_marginals() {
        let x = [0, 0, 1, 1, 2];
        let y = [1, 0, 1, 1, 0];
        let h = JointHistogram::from_indices(&[&x, &y], &[3, 2]).unwrap();
        assert_eq!(h.counts(), &[1, 1, 0, 2, 1, 0]);
        assert_eq!(h.marginal(&[0]).unwrap().counts(), &[2, 2, 1]);
        assert_eq!(h.marginal(&[1]).unwrap().counts(), &[2, 3]);
        assert_eq!(h.marginal(&[0, 1]).unwrap(), h);
    }

    #[test]
    fn three_way_marginal() {
        let a = [0, 1, 1, 0];
        let b = [1, 1, 0, 0];
        let c = [0, 0, 1, 1];
        let h = JointHistogram::from_indices(&[&a, &b, &c], &[2, 2, 2]).unwrap();
        let ac = h.marginal(&[0, 2]).unwrap();
        let direct = JointHistogram::from_indices(&[&a, &c], &[2, 2]).unwrap();
        assert_eq!(ac.counts(), direct.counts());
    }

    #[test]
    fn entropy_cases() {
        let uniform = JointHistogram::from_counts(vec![5, 5, 5, 5], &[4]).unwrap();
        assert!((uniform.entropy_nats() - 4f64.ln()).abs() < 1e-12);
        let point = JointHistogram::from_counts(vec![0, 9, 0], &[3]).unwrap();
        assert_eq!(point.entropy_nats(), 0.0);
        let skew = JointHistogram::from_counts(vec![1, 3], &[2]).unwrap();
        let expected = -(0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
        assert!((skew.entropy_nats() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(JointHistogram::from_indices(&[&[0, 3]], &[3]).is_err());
        assert!(JointHistogram::from_indices(&[&[0], &[0, 1]], &[2, 2]).is_err());
        let four: [&[usize]; 4] = [&[0], &[0], &[0], &[0]];
        assert!(JointHistogram::from_indices(&four, &[1, 1, 1, 1]).is_err());
        let h = JointHistogram::from_counts(vec![1, 1], &[2]).unwrap();
        assert!(h.marginal(&[1]).is_err());
    }
}
