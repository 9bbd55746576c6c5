//! Discrete test corpus and direct-summation oracles shared by the
//! integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A joint count table over one to three variables, row-major with the last
/// dimension fastest.
#[derive(Debug, Clone)]
pub struct Table {
    pub shape: Vec<usize>,
    pub counts: Vec<u64>,
}

impl Table {
    fn p(&self) -> Vec<f64> {
        let n: u64 = self.counts.iter().sum();
        self.counts.iter().map(|&c| c as f64 / n as f64).collect()
    }

    fn index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        let mut rest = flat;
        for d in (0..self.shape.len()).rev() {
            idx[d] = rest % self.shape[d];
            rest /= self.shape[d];
        }
        idx
    }

    /// Marginal probability over the kept dimensions, keyed by their indices.
    fn marginal(&self, keep: &[usize]) -> std::collections::HashMap<Vec<usize>, f64> {
        let mut m = std::collections::HashMap::new();
        for (flat, p) in self.p().into_iter().enumerate() {
            let idx = self.index(flat);
            let key: Vec<usize> = keep.iter().map(|&d| idx[d]).collect();
            *m.entry(key).or_insert(0.0) += p;
        }
        m
    }
}

/// Every shape with up to three variables of two to four states, each with
/// several seeded count tables: dense, sparse, point mass and uniform.
pub fn corpus() -> Vec<Table> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d5);
    let mut shapes = Vec::new();
    for a in 2..=4 {
        shapes.push(vec![a]);
        for b in 2..=4 {
            shapes.push(vec![a, b]);
            for c in 2..=4 {
                shapes.push(vec![a, b, c]);
            }
        }
    }
    let mut tables = Vec::new();
    for shape in shapes {
        let cells: usize = shape.iter().product();
        tables.push(Table {
            shape: shape.clone(),
            counts: vec![7; cells],
        });
        let mut point = vec![0; cells];
        point[rng.random_range(0..cells)] = 13;
        tables.push(Table {
            shape: shape.clone(),
            counts: point,
        });
        for sparsity in [0.0, 0.3, 0.7] {
            let mut counts: Vec<u64> = (0..cells)
                .map(|_| {
                    if rng.random::<f64>() < sparsity {
                        0
                    } else {
                        rng.random_range(1..50)
                    }
                })
                .collect();
            if counts.iter().all(|&c| c == 0) {
                counts[0] = 1;
            }
            tables.push(Table {
                shape: shape.clone(),
                counts,
            });
        }
    }
    tables
}

fn plogp_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    -values
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

pub fn entropy_direct(t: &Table) -> f64 {
    plogp_sum(t.p())
}

/// Σ p(x,y) ln(p(x,y) / (p(x) p(y))) over the first two dimensions.
pub fn mi_direct(t: &Table) -> f64 {
    let (px, py, pxy) = (t.marginal(&[0]), t.marginal(&[1]), t.marginal(&[0, 1]));
    pxy.iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|(k, &p)| p * (p / (px[&k[..1]] * py[&k[1..2]])).ln())
        .sum()
}

/// Σ p(x,y,z) ln(p(z) p(x,y,z) / (p(x,z) p(y,z))).
pub fn cmi_direct(t: &Table) -> f64 {
    let (pz, pxz, pyz) = (t.marginal(&[2]), t.marginal(&[0, 2]), t.marginal(&[1, 2]));
    t.p()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.0)
        .map(|(flat, p)| {
            let i = t.index(flat);
            p * (pz[&vec![i[2]]] * p / (pxz[&vec![i[0], i[2]]] * pyz[&vec![i[1], i[2]]])).ln()
        })
        .sum()
}

/// Pairs of integer-valued series over `states` levels in which every level
/// occurs, so fixed-width binning with `states` bins recovers the levels.
pub fn te_corpus() -> Vec<(Vec<f64>, Vec<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e);
    let mut out = Vec::new();
    for states in 2..=4 {
        for coupling in [0.0, 0.5, 0.9, 1.0] {
            let n = 400;
            let mut src: Vec<f64> = (0..n).map(|_| rng.random_range(0..states) as f64).collect();
            let mut tgt = vec![0.0; n];
            for t in 1..n {
                tgt[t] = if rng.random::<f64>() < coupling {
                    src[t - 1]
                } else {
                    rng.random_range(0..states) as f64
                };
            }
            for (i, s) in [0.0, (states - 1) as f64].into_iter().enumerate() {
                src[i] = s;
                tgt[i] = s;
            }
            out.push((src, tgt, states));
        }
    }
    out
}

/// I(y[t+lag]; x[t] | y[t]) by direct counting of integer-valued triples.
pub fn te_direct(x: &[f64], y: &[f64], lag: usize, states: usize) -> f64 {
    let n = y.len() - lag;
    let mut counts = vec![0u64; states * states * states];
    for t in 0..n {
        let (a, b, c) = (y[t + lag] as usize, x[t] as usize, y[t] as usize);
        counts[(a * states + b) * states + c] += 1;
    }
    cmi_direct(&Table {
        shape: vec![states; 3],
        counts,
    })
}
