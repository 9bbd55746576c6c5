use std::ops::Range;

use crate::error::{check_len, Error, Result};

/// Lagged-forcing design matrix: row `r` holds, for each input channel, the
/// `lag` values ending at time `r + lag - 1`, and the target at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct LagEmbedding {
    lag: usize,
    width: usize,
    features: Vec<f64>,
    targets: Vec<f64>,
}

impl LagEmbedding {
    pub fn lag(&self) -> usize {
        self.lag
    }

    /// Features per row: `lag` times the number of channels.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.features[r * self.width..(r + 1) * self.width]
    }

    /// Row-major features of `rows`.
    pub fn features(&self, rows: Range<usize>) -> &[f64] {
        &self.features[rows.start * self.width..rows.end * self.width]
    }

    pub fn targets(&self, rows: Range<usize>) -> &[f64] {
        &self.targets[rows]
    }

    /// Time index of the target in row `r`.
    pub fn time_of(&self, r: usize) -> usize {
        r + self.lag - 1
    }

    /// Splits into a training prefix of `n_train` rows and an evaluation
    /// suffix. The first `lag - 1` rows after the prefix are dropped so no
    /// evaluation window reaches back into the training period.
    pub fn split(&self, n_train: usize) -> Result<(Range<usize>, Range<usize>)> {
        let test_start = n_train + self.lag - 1;
        if n_train == 0 || test_start >= self.rows() {
            return Err(Error::invalid(format!(
                "cannot split {} rows with {} for training and lag {}",
                self.rows(),
                n_train,
                self.lag
            )));
        }
        Ok((0..n_train, test_start..self.rows()))
    }

    /// Split by training fraction of all rows.
    pub fn split_fraction(&self, fraction: f64) -> Result<(Range<usize>, Range<usize>)> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::invalid(format!(
                "training fraction {fraction} outside (0,1)"
            )));
        }
        self.split((fraction * self.rows() as f64).round() as usize)
    }
}

/// Builds the lag matrix of `inputs` against `target`.
pub fn build_lag_matrix(inputs: &[f64], target: &[f64], lag: usize) -> Result<LagEmbedding> {
    build_multi_lag_matrix(&[InputChannel::dense(inputs, lag)], target, lag)
}

/// One input series of a lag matrix: `lags` values spaced `stride` days
/// apart, ending at the row's time.
#[derive(Debug, Clone, Copy)]
pub struct InputChannel<'a> {
    pub values: &'a [f64],
    pub lags: usize,
    pub stride: usize,
}

impl<'a> InputChannel<'a> {
    pub fn dense(values: &'a [f64], lags: usize) -> Self {
        Self {
            values,
            lags,
            stride: 1,
        }
    }
}

/// Lag matrix over several aligned input channels; each row holds the
/// channels' windows one after another, oldest value first. No channel may
/// reach further back than `lag - 1` days.
pub fn build_multi_lag_matrix(
    channels: &[InputChannel<'_>],
    target: &[f64],
    lag: usize,
) -> Result<LagEmbedding> {
    if channels.is_empty() {
        return Err(Error::invalid(
            "lag matrix needs at least one input channel",
        ));
    }
    if lag == 0 {
        return Err(Error::invalid("lag must be at least 1"));
    }
    for c in channels {
        check_len("lag matrix inputs/target", c.values.len(), target.len())?;
        if c.lags == 0 || c.stride == 0 || (c.lags - 1) * c.stride > lag - 1 {
            return Err(Error::invalid(format!(
                "channel with {} lags at stride {} does not fit a {lag}-day window",
                c.lags, c.stride
            )));
        }
    }
    let n = target.len();
    if n <= lag {
        return Err(Error::invalid(format!(
            "{n} samples do not exceed lag {lag}"
        )));
    }
    let rows = n - lag + 1;
    let width: usize = channels.iter().map(|c| c.lags).sum();
    let mut features = Vec::with_capacity(rows * width);
    for r in 0..rows {
        let t = r + lag - 1;
        for c in channels {
            features.extend((0..c.lags).rev().map(|k| c.values[t - k * c.stride]));
        }
    }
    Ok(LagEmbedding {
        lag,
        width,
        features,
        targets: target[lag - 1..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_count_and_alignment() {
        let u: Vec<f64> = (0..100).map(f64::from).collect();
        let y: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let e = build_lag_matrix(&u, &y, 90).unwrap();
        assert_eq!(e.rows(), 11);
        assert_eq!(e.row(0), &u[0..90]);
        assert_eq!(e.targets(0..1), &[y[89]]);
        assert_eq!(e.row(10), &u[10..100]);
        assert_eq!(e.time_of(10), 99);
    }

    #[test]
    fn strided_channels() {
        let u: Vec<f64> = (0..20).map(f64::from).collect();
        let e: Vec<f64> = (0..20).map(|i| 100.0 + i as f64).collect();
        let emb = build_multi_lag_matrix(
            &[
                InputChannel::dense(&u, 5),
                InputChannel {
                    values: &e,
                    lags: 3,
                    stride: 2,
                },
            ],
            &u,
            5,
        )
        .unwrap();
        assert_eq!(emb.width(), 8);
        assert_eq!(emb.rows(), 16);
        assert_eq!(emb.row(0), &[0.0, 1.0, 2.0, 3.0, 4.0, 100.0, 102.0, 104.0]);
        let too_wide = InputChannel {
            values: &e,
            lags: 3,
            stride: 3,
        };
        assert!(build_multi_lag_matrix(&[too_wide], &u, 5).is_err());
    }

    #[test]
    fn unit_lag_is_same_day() {
        let u = [1.0, 2.0, 3.0];
        let y = [4.0, 5.0, 6.0];
        let e = build_lag_matrix(&u, &y, 1).unwrap();
        assert_eq!(e.rows(), 3);
        assert_eq!(e.features(0..3), &u);
        assert_eq!(e.width(), 1);
        assert_eq!(e.targets(0..3), &y);
    }

    #[test]
    fn split_leaves_a_gap() {
        let u = vec![0.0; 50];
        let e = build_lag_matrix(&u, &u, 5).unwrap();
        let (train, test) = e.split(20).unwrap();
        assert_eq!(train, 0..20);
        assert_eq!(test, 24..46);
        // first evaluation window starts after the last training target
        assert!(test.start > e.time_of(train.end - 1));
        assert!(e.split(45).is_err());
    }

    #[test]
    fn too_short() {
        assert!(build_lag_matrix(&[1.0; 5], &[1.0; 5], 5).is_err());
        assert!(build_lag_matrix(&[1.0; 5], &[1.0; 4], 2).is_err());
    }
}
