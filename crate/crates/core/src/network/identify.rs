use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{NetworkSpec, NodeRole};
use super::trajectories::{check_hymod_state, hymod_node_names, hymod_outflow, TrajectoryEnsemble};
use crate::dynamics::{hymod, Forcing, HymodParams, ModelState};
use crate::error::{check_len, Error, Result};
use crate::info::{discretize, DiscretizationSpec};
use crate::series::TimeSeries;

/// Binned conditional expectation of a target given one or more inputs,
/// linearly interpolated between bin centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMap {
    centers: Vec<Vec<f64>>,
    shape: Vec<usize>,
    means: Vec<f64>,
    counts: Vec<u32>,
}

impl ConditionalMap {
    pub fn fit(inputs: &[&[f64]], target: &[f64], spec: &DiscretizationSpec) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::invalid("conditional map needs at least one input"));
        }
        for x in inputs {
            check_len("conditional map input and target", x.len(), target.len())?;
        }
        let binned = inputs
            .iter()
            .map(|x| discretize(x, spec))
            .collect::<Result<Vec<_>>>()?;
        let shape: Vec<usize> = binned.iter().map(|b| b.n_bins()).collect();
        let cells: usize = shape.iter().product();

        let mut centers = Vec::with_capacity(inputs.len());
        for (x, b) in inputs.iter().zip(&binned) {
            let mut sum = vec![0.0; b.n_bins()];
            let mut n = vec![0usize; b.n_bins()];
            for (&v, &i) in x.iter().zip(&b.indices) {
                sum[i] += v;
                n[i] += 1;
            }
            centers.push(
                (0..b.n_bins())
                    .map(|i| {
                        if n[i] > 0 {
                            sum[i] / n[i] as f64
                        } else {
                            0.5 * (b.edges[i] + b.edges[(i + 1).min(b.edges.len() - 1)])
                        }
                    })
                    .collect(),
            );
        }

        let mut sums = vec![0.0; cells];
        let mut counts = vec![0u32; cells];
        for (r, &y) in target.iter().enumerate() {
            let cell = binned
                .iter()
                .zip(&shape)
                .fold(0, |acc, (b, &s)| acc * s + b.indices[r]);
            sums[cell] += y;
            counts[cell] += 1;
        }
        let means = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        Ok(Self {
            centers,
            shape,
            means,
            counts,
        })
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn empty_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    /// Interpolated conditional mean at `x`, or `None` when every
    /// surrounding cell is empty. Inputs outside the fitted range are
    /// clamped to the outermost centres.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        debug_assert_eq!(x.len(), self.dims());
        let mut lo = Vec::with_capacity(self.dims());
        let mut frac = Vec::with_capacity(self.dims());
        for (c, &v) in self.centers.iter().zip(x) {
            let last = c.len() - 1;
            if v <= c[0] {
                lo.push(0);
                frac.push(0.0);
            } else if v >= c[last] {
                lo.push(last);
                frac.push(0.0);
            } else {
                let j = c.partition_point(|&e| e <= v) - 1;
                lo.push(j);
                frac.push((v - c[j]) / (c[j + 1] - c[j]));
            }
        }

        let (mut acc, mut total) = (0.0, 0.0);
        for corner in 0..1usize << self.dims() {
            let mut w = 1.0;
            let mut cell = 0;
            for k in 0..self.dims() {
                let up = corner >> k & 1 == 1;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
                cell = cell * self.shape[k] + lo[k] + usize::from(up);
            }
            if w == 0.0 || self.counts[cell] == 0 {
                continue;
            }
            acc += w * self.means[cell];
            total += w;
        }
        (total > 0.0).then(|| acc / total)
    }
}

/// Correction applied to one node: a function of the node's parents (and,
/// for states, the node itself) at the start of the step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCorrection {
    pub node: usize,
    pub inputs: Vec<usize>,
    pub map: ConditionalMap,
}

/// HyMod with learned per-node corrections. Each state's next value is the
/// prior model's deterministic update plus the conditional mean of the
/// posterior residual given the node's network inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedModel {
    pub prior: HymodParams,
    pub node_names: Vec<String>,
    pub corrections: Vec<NodeCorrection>,
    /// Parent-bin cells with no posterior samples; those cells fall back to
    /// the prior map.
    pub fallback_cells: usize,
}

fn state_from_row(row: &[f64], n_tanks: usize) -> ModelState {
    ModelState {
        soil_store: row[2],
        tank_stores: row[3..3 + n_tanks].to_vec(),
    }
}

fn state_to_row(state: &ModelState, row: &mut [f64]) {
    row[2] = state.soil_store;
    row[3..3 + state.tank_stores.len()].copy_from_slice(&state.tank_stores);
}

/// Fits residual-correction maps for every non-forcing node from posterior
/// trajectories.
pub fn identify_system(
    posterior: &TrajectoryEnsemble,
    network: &NetworkSpec,
    prior: &HymodParams,
    spec: &DiscretizationSpec,
) -> Result<IdentifiedModel> {
    prior.validate()?;
    let names = hymod_node_names(prior);
    if network.node_names() != names || posterior.node_names() != names.as_slice() {
        return Err(Error::NetworkMismatch(
            "posterior, network and prior model disagree on node layout".into(),
        ));
    }
    if posterior.n_steps() < 2 {
        return Err(Error::invalid("posterior needs at least two steps"));
    }
    let n_tanks = prior.n_tanks();
    let y_node = names.len() - 1;
    let width = names.len();

    // prior one-step predictions for every member and step
    let mut predicted = Vec::with_capacity(posterior.n_members() * posterior.n_steps() * width);
    for m in 0..posterior.n_members() {
        for t in 0..posterior.n_steps() {
            let row = posterior.row(m, t);
            let mut pred = row.to_vec();
            let mut state = state_from_row(row, n_tanks);
            pred[y_node] = hymod_outflow(&state, prior);
            hymod::step_in_place(&mut state, prior, row[0], row[1]);
            state_to_row(&state, &mut pred);
            predicted.extend_from_slice(&pred);
        }
    }

    let nodes: Vec<usize> = (0..width)
        .filter(|&n| network.nodes()[n].role != NodeRole::Forcing)
        .collect();
    let corrections = nodes
        .par_iter()
        .map(|&node| {
            let role = network.nodes()[node].role;
            let mut inputs = network.parents(node);
            if role == NodeRole::State {
                inputs.insert(0, node);
            }
            // states: residual of the update from t to t+1; outputs: residual at t
            let lagged = role == NodeRole::State;
            let mut cols = vec![Vec::new(); inputs.len()];
            let mut resid = Vec::new();
            for m in 0..posterior.n_members() {
                let steps = posterior.n_steps() - usize::from(lagged);
                for t in 0..steps {
                    let row = posterior.row(m, t);
                    for (c, &i) in cols.iter_mut().zip(&inputs) {
                        c.push(row[i]);
                    }
                    let base = (m * posterior.n_steps() + t) * width;
                    let actual = posterior.value(m, t + usize::from(lagged), node);
                    resid.push(actual - predicted[base + node]);
                }
            }
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            Ok(NodeCorrection {
                node,
                inputs,
                map: ConditionalMap::fit(&refs, &resid, spec)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fallback_cells = corrections.iter().map(|c| c.map.empty_cells()).sum();
    if fallback_cells > 0 {
        log::info!(
            "identified model: {fallback_cells} empty parent-bin cells fall back to the prior map"
        );
    }
    Ok(IdentifiedModel {
        prior: *prior,
        node_names: names,
        corrections,
        fallback_cells,
    })
}

impl IdentifiedModel {
    fn correction(&self, c: &NodeCorrection, row: &[f64], buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(c.inputs.iter().map(|&i| row[i]));
        c.map.eval(buf).unwrap_or(0.0)
    }
}

/// Runs the identified model forward for `horizon` days from `initial`.
pub fn predict_with_identified(
    model: &IdentifiedModel,
    forcing: &Forcing,
    initial: &ModelState,
    horizon: usize,
) -> Result<TimeSeries> {
    check_hymod_state(&model.prior, initial)?;
    if horizon > forcing.len() {
        return Err(Error::invalid(format!(
            "horizon {horizon} exceeds the {} day forcing",
            forcing.len()
        )));
    }
    let prior = &model.prior;
    let n_tanks = prior.n_tanks();
    let width = model.node_names.len();
    let y_node = width - 1;
    let s_max = prior.max_storage();

    let mut row = vec![0.0; width];
    let mut next = vec![0.0; width];
    let mut buf = Vec::new();
    let mut state = initial.clone();
    let mut flows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        row[0] = forcing.precip()[t];
        row[1] = forcing.pet()[t];
        state_to_row(&state, &mut row);
        let mut y = hymod_outflow(&state, prior);
        hymod::step_in_place(&mut state, prior, row[0], row[1]);
        state_to_row(&state, &mut next);
        for c in &model.corrections {
            let delta = model.correction(c, &row, &mut buf);
            if c.node == y_node {
                y += delta;
            } else {
                next[c.node] += delta;
            }
        }
        flows.push(y.max(0.0));
        state.soil_store = next[2].clamp(0.0, s_max);
        for (s, &v) in state.tank_stores.iter_mut().zip(&next[3..3 + n_tanks]) {
            *s = v.max(0.0);
        }
    }
    Ok(TimeSeries::daily_mm(flows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_is_recovered() {
        let x: Vec<f64> = (0..5000).map(|i| i as f64 / 5000.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let map = ConditionalMap::fit(&[&x], &y, &DiscretizationSpec::quantile(10)).unwrap();
        assert_eq!(map.empty_cells(), 0);
        for v in [0.1, 0.33, 0.5, 0.77, 0.9] {
            assert!((map.eval(&[v]).unwrap() - 2.0 * v).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_cells_are_skipped() {
        let x = [0.0, 0.0, 1.0, 1.0];
        let z = [0.0, 1.0, 0.0, 1.0];
        let t = [1.0, 2.0, 3.0, 4.0];
        let map = ConditionalMap::fit(&[&x, &z], &t, &DiscretizationSpec::quantile(2)).unwrap();
        assert_eq!(map.empty_cells(), 0);
        assert_eq!(map.eval(&[0.0, 0.0]), Some(1.0));
        assert_eq!(map.eval(&[1.0, 1.0]), Some(4.0));
        assert!((map.eval(&[0.5, 0.5]).unwrap() - 2.5).abs() < 1e-12);

        let x = [0.0, 1.0];
        let z = [0.0, 1.0];
        let map =
            ConditionalMap::fit(&[&x, &z], &[5.0, 7.0], &DiscretizationSpec::quantile(2)).unwrap();
        assert_eq!(map.empty_cells(), 2);
        assert!((map.eval(&[0.5, 0.5]).unwrap() - 6.0).abs() < 1e-12);
    }
}
