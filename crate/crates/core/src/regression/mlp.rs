use rand::Rng as _;
use rayon::prelude::*;

use crate::seed;

/// Rows per parallel gradient chunk. Fixed so that the floating-point
/// summation order does not depend on the thread count.
const CHUNK_ROWS: usize = 256;

/// Single-hidden-layer tanh network with a linear output.
///
/// Parameters are stored flat: input weights (hidden x inputs, row-major),
/// hidden biases, output weights, output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl Mlp {
    pub fn new(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let n = Self::param_count(inputs, hidden);
        let mut params = vec![0.0; n];
        let a = (6.0 / (inputs + hidden) as f64).sqrt();
        for w in &mut params[..hidden * inputs] {
            *w = rng.random_range(-a..a);
        }
        let b = (6.0 / (hidden + 1) as f64).sqrt();
        let out = hidden * inputs + hidden;
        for w in &mut params[out..out + hidden] {
            *w = rng.random_range(-b..b);
        }
        Self {
            inputs,
            hidden,
            params,
        }
    }

    pub fn param_count(inputs: usize, hidden: usize) -> usize {
        hidden * inputs + 2 * hidden + 1
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], f64) {
        let (w1, rest) = self.params.split_at(self.hidden * self.inputs);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(self.hidden);
        (w1, b1, w2, b2[0])
    }

    pub fn forward(&self, x: &[f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let mut out = b2;
        for h in 0..self.hidden {
            let row = &w1[h * self.inputs..(h + 1) * self.inputs];
            let z = b1[h] + dot(row, x);
            out += w2[h] * z.tanh();
        }
        out
    }

    /// Mean squared error over the rows of `xs`.
    pub fn loss(&self, xs: &[f64], ys: &[f64]) -> f64 {
        let sse: f64 = xs
            .par_chunks(CHUNK_ROWS * self.inputs)
            .zip(ys.par_chunks(CHUNK_ROWS))
            .map(|(xc, yc)| {
                xc.chunks_exact(self.inputs)
                    .zip(yc)
                    .map(|(x, y)| (self.forward(x) - y).powi(2))
                    .sum::<f64>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        sse / ys.len() as f64
    }

    /// Mean squared error and its gradient with respect to the flat
    /// parameter vector.
    pub fn loss_and_gradient(&self, xs: &[f64], ys: &[f64]) -> (f64, Vec<f64>) {
        let n = self.params.len();
        let partials: Vec<(f64, Vec<f64>)> = xs
            .par_chunks(CHUNK_ROWS * self.inputs)
            .zip(ys.par_chunks(CHUNK_ROWS))
            .map(|(xc, yc)| {
                let mut grad = vec![0.0; n];
                let sse = self.accumulate(xc, yc, &mut grad);
                (sse, grad)
            })
            .collect();
        let mut grad = vec![0.0; n];
        let mut sse = 0.0;
        for (s, g) in partials {
            sse += s;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        let scale = 1.0 / ys.len() as f64;
        grad.iter_mut().for_each(|g| *g *= scale);
        (sse * scale, grad)
    }

    fn accumulate(&self, xs: &[f64], ys: &[f64], grad: &mut [f64]) -> f64 {
        let (w1, b1, w2, b2) = self.split();
        let (inputs, hidden) = (self.inputs, self.hidden);
        let (g_w1, rest) = grad.split_at_mut(hidden * inputs);
        let (g_b1, rest) = rest.split_at_mut(hidden);
        let (g_w2, g_b2) = rest.split_at_mut(hidden);
        let mut act = vec![0.0; hidden];
        let mut sse = 0.0;
        for (x, &y) in xs.chunks_exact(inputs).zip(ys) {
            let mut out = b2;
            for h in 0..hidden {
                act[h] = (b1[h] + dot(&w1[h * inputs..(h + 1) * inputs], x)).tanh();
                out += w2[h] * act[h];
            }
            let err = out - y;
            sse += err * err;
            let d_out = 2.0 * err;
            g_b2[0] += d_out;
            for h in 0..hidden {
                g_w2[h] += d_out * act[h];
                let d_z = d_out * w2[h] * (1.0 - act[h] * act[h]);
                g_b1[h] += d_z;
                for (g, xi) in g_w1[h * inputs..(h + 1) * inputs].iter_mut().zip(x) {
                    *g += d_z * xi;
                }
            }
        }
        sse
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let m = Mlp::new(4, 3, 1);
        assert_eq!(m.params().len(), 4 * 3 + 3 + 3 + 1);
        assert!(m.forward(&[0.1, 0.2, 0.3, 0.4]).is_finite());
    }

    #[test]
    fn loss_agrees_with_gradient_pass() {
        let m = Mlp::new(3, 5, 2);
        let xs: Vec<f64> = (0..3000).map(|i| ((i * 13) % 17) as f64 / 17.0).collect();
        let ys: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.01).sin()).collect();
        let (l, _) = m.loss_and_gradient(&xs, &ys);
        assert!((l - m.loss(&xs, &ys)).abs() < 1e-12);
    }
}
