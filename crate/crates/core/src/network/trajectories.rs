use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{hymod, Forcing, HymodParams, ModelState};
use crate::error::{Error, Result};
use crate::seed;

/// Values of every network variable, per time step and ensemble member.
///
/// Row `t` holds the forcing of day `t`, the state at the start of day `t`
/// and the streamflow produced during day `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    node_names: Vec<String>,
    n_steps: usize,
    n_members: usize,
    /// Layout `[member][step][node]`.
    data: Vec<f64>,
}

impl TrajectoryEnsemble {
    pub fn new(
        node_names: Vec<String>,
        n_steps: usize,
        n_members: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if n_steps == 0 || n_members == 0 || node_names.is_empty() {
            return Err(Error::invalid("trajectory ensemble must be non-empty"));
        }
        if data.len() != n_steps * n_members * node_names.len() {
            return Err(Error::invalid(format!(
                "trajectory data has {} cells, expected {}",
                data.len(),
                n_steps * n_members * node_names.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("trajectory data must be finite"));
        }
        Ok(Self {
            node_names,
            n_steps,
            n_members,
            data,
        })
    }

    /// Builds an ensemble from per-member row-major blocks.
    pub fn from_members(node_names: Vec<String>, members: Vec<Vec<f64>>) -> Result<Self> {
        let width = node_names.len();
        let n_members = members.len();
        let n_steps = members.first().map_or(0, |m| m.len() / width.max(1));
        if members.iter().any(|m| m.len() != n_steps * width) {
            return Err(Error::invalid("ensemble members differ in length"));
        }
        Self::new(node_names, n_steps, n_members, members.concat())
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_members(&self) -> usize {
        self.n_members
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn value(&self, member: usize, step: usize, node: usize) -> f64 {
        self.data[(member * self.n_steps + step) * self.n_nodes() + node]
    }

    pub fn row(&self, member: usize, step: usize) -> &[f64] {
        let w = self.n_nodes();
        let start = (member * self.n_steps + step) * w;
        &self.data[start..start + w]
    }

    pub fn series(&self, member: usize, node: usize) -> Vec<f64> {
        (0..self.n_steps)
            .map(|t| self.value(member, t, node))
            .collect()
    }

    /// Ensemble mean of one node at every step.
    pub fn mean_series(&self, node: usize) -> Vec<f64> {
        (0..self.n_steps)
            .map(|t| {
                (0..self.n_members)
                    .map(|m| self.value(m, t, node))
                    .sum::<f64>()
                    / self.n_members as f64
            })
            .collect()
    }
}

/// Node values of one HyMod row, in network order.
pub(crate) fn hymod_row(
    state: &ModelState,
    params: &HymodParams,
    p: f64,
    pet: f64,
    out: &mut Vec<f64>,
) {
    out.push(p);
    out.push(pet);
    out.push(state.soil_store);
    out.extend_from_slice(&state.tank_stores);
    out.push(hymod_outflow(state, params));
}

/// Streamflow produced during a step that starts in `state`.
pub(crate) fn hymod_outflow(state: &ModelState, params: &HymodParams) -> f64 {
    params.k_quick * state.tank_stores[params.n_quick - 1]
        + params.k_slow * state.tank_stores[params.n_tanks() - 1]
}

pub(crate) fn hymod_node_names(params: &HymodParams) -> Vec<String> {
    use super::spec::{quick_tank, slow_tank, PET, PRECIP, SOIL, STREAMFLOW};
    let mut names = vec![PRECIP.to_string(), PET.to_string(), SOIL.to_string()];
    names.extend((0..params.n_quick).map(quick_tank));
    names.extend((0..params.n_slow).map(slow_tank));
    names.push(STREAMFLOW.to_string());
    names
}

/// Multiplies each parameter by an independent factor in `[1-jitter, 1+jitter]`
/// and clamps back into the valid ranges.
pub fn jitter_params(params: &HymodParams, jitter: f64, rng: &mut seed::Rng) -> HymodParams {
    let mut f = |v: f64| {
        if jitter > 0.0 {
            v * (1.0 + rng.random_range(-jitter..=jitter))
        } else {
            v
        }
    };
    HymodParams {
        c_max: f(params.c_max).clamp(1e-6, 1000.0),
        b_exp: f(params.b_exp).clamp(0.0, 10.0),
        alpha: f(params.alpha).clamp(0.0, 1.0),
        k_quick: f(params.k_quick).clamp(0.0, 1.0),
        k_slow: f(params.k_slow).clamp(0.0, 1.0),
        ..*params
    }
}

/// Multiplies every store by mean-one log-normal noise with log-scale
/// standard deviation `sigma`.
pub(crate) fn perturb_state(state: &mut ModelState, sigma: f64, rng: &mut seed::Rng) {
    if sigma == 0.0 {
        return;
    }
    let shift = -0.5 * sigma * sigma;
    let mut noise = |s: &mut f64| {
        let z: f64 = rng.sample(StandardNormal);
        *s *= (sigma * z + shift).exp();
    };
    noise(&mut state.soil_store);
    state.tank_stores.iter_mut().for_each(noise);
}

pub fn jitter_state(state: &ModelState, jitter: f64, rng: &mut seed::Rng) -> ModelState {
    let mut f = |v: f64| {
        if jitter > 0.0 {
            v * (1.0 + rng.random_range(-jitter..=jitter))
        } else {
            v
        }
    };
    ModelState {
        soil_store: f(state.soil_store),
        tank_stores: state.tank_stores.iter().map(|&s| f(s)).collect(),
    }
}

pub(crate) fn check_hymod_state(params: &HymodParams, state: &ModelState) -> Result<()> {
    params.validate()?;
    if state.tank_stores.len() != params.n_tanks() {
        return Err(Error::invalid(format!(
            "hymod state needs {} tanks, got {}",
            params.n_tanks(),
            state.tank_stores.len()
        )));
    }
    if std::iter::once(&state.soil_store)
        .chain(&state.tank_stores)
        .any(|s| !(s.is_finite() && *s >= 0.0))
    {
        return Err(Error::invalid(
            "initial stores must be finite and non-negative",
        ));
    }
    Ok(())
}

/// A prior ensemble together with the parameters each member ran with.
#[derive(Debug, Clone)]
pub struct PriorEnsemble {
    pub trajectories: TrajectoryEnsemble,
    pub member_params: Vec<HymodParams>,
    /// State of each member after the last recorded step.
    pub final_states: Vec<ModelState>,
}

/// Runs `members` HyMod realisations with jittered parameters and initial
/// states, recording every network variable every step. Stores receive the
/// same multiplicative process noise as filter particles.
pub fn record_trajectories(
    params: &HymodParams,
    forcing: &Forcing,
    initial: &ModelState,
    members: usize,
    seed: u64,
    param_jitter: f64,
    state_noise: f64,
) -> Result<PriorEnsemble> {
    check_hymod_state(params, initial)?;
    if members == 0 {
        return Err(Error::invalid("ensemble needs at least one member"));
    }
    if !(0.0..1.0).contains(&param_jitter) {
        return Err(Error::invalid(format!(
            "param_jitter={param_jitter} outside [0,1)"
        )));
    }
    if !(state_noise >= 0.0 && state_noise.is_finite()) {
        return Err(Error::invalid(format!(
            "state_noise={state_noise} must be non-negative"
        )));
    }
    let runs: Vec<(HymodParams, Vec<f64>, ModelState)> = (0..members)
        .into_par_iter()
        .map(|m| {
            let mut rng = seed::child_rng(seed, &[m as u64]);
            let p = jitter_params(params, param_jitter, &mut rng);
            let mut state = jitter_state(initial, param_jitter, &mut rng);
            let mut rows = Vec::with_capacity(forcing.len() * (p.n_tanks() + 4));
            for (&pr, &e) in forcing.precip().iter().zip(forcing.pet()) {
                hymod_row(&state, &p, pr, e, &mut rows);
                hymod::step_in_place(&mut state, &p, pr, e);
                perturb_state(&mut state, state_noise, &mut rng);
            }
            (p, rows, state)
        })
        .collect();

    let mut member_params = Vec::with_capacity(members);
    let mut blocks = Vec::with_capacity(members);
    let mut final_states = Vec::with_capacity(members);
    for (p, rows, state) in runs {
        member_params.push(p);
        blocks.push(rows);
        final_states.push(state);
    }
    Ok(PriorEnsemble {
        trajectories: TrajectoryEnsemble::from_members(hymod_node_names(params), blocks)?,
        member_params,
        final_states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, ModelParams};

    fn setup() -> (HymodParams, Forcing, ModelState) {
        let params = HymodParams::new(250.0, 0.5, 0.6, 0.5, 0.05, 3, 3).unwrap();
        let precip = (0..200)
            .map(|t| if t % 4 == 0 { 12.0 } else { 0.0 })
            .collect();
        let forcing = Forcing::new(precip, vec![3.0; 200]).unwrap();
        (params, forcing, ModelState::zeroed(40.0, 6))
    }

    #[test]
    fn single_member_matches_simulation() {
        let (params, forcing, init) = setup();
        let ens = record_trajectories(&params, &forcing, &init, 1, 3, 0.0, 0.0).unwrap();
        let sim = simulate(&ModelParams::Hymod(params), &forcing, &init, 0).unwrap();
        let traj = &ens.trajectories;
        let y = traj.node_index("y^q").unwrap();
        let soil = traj.node_index("x_s").unwrap();
        for t in 0..forcing.len() {
            assert!((traj.value(0, t, y) - sim.streamflow[t]).abs() < 1e-12);
            if t > 0 {
                assert!((traj.value(0, t, soil) - sim.states[t - 1].soil_store).abs() < 1e-12);
            }
        }
        assert_eq!(&ens.final_states[0], sim.states.last().unwrap());
    }

    #[test]
    fn seeded_and_rectangular() {
        let (params, forcing, init) = setup();
        let a = record_trajectories(&params, &forcing, &init, 5, 9, 0.05, 0.05).unwrap();
        let b = record_trajectories(&params, &forcing, &init, 5, 9, 0.05, 0.05).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
        assert_eq!(a.trajectories.n_members(), 5);
        assert_eq!(a.trajectories.n_steps(), 200);
        assert_eq!(a.trajectories.n_nodes(), 10);
        assert_ne!(a.member_params[0], a.member_params[1]);
    }
}
