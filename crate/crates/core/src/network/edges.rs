use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::NetworkSpec;
use super::trajectories::TrajectoryEnsemble;
use crate::error::{Error, Result};
use crate::info::{transfer_entropy_pooled, DiscretizationSpec};

pub const DEFAULT_TE_LAG: usize = 1;

/// Transfer entropy along every edge of a network, for one ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTransfer {
    pub edges: Vec<(String, String)>,
    pub te: Vec<f64>,
    pub lag: usize,
    pub spec: DiscretizationSpec,
    pub samples: usize,
}

/// TE(source -> target, lag) per edge, pooling ensemble members as
/// independent realisations.
pub fn edge_transfer_entropy(
    traj: &TrajectoryEnsemble,
    network: &NetworkSpec,
    lag: usize,
    spec: &DiscretizationSpec,
) -> Result<EdgeTransfer> {
    if lag == 0 || lag >= traj.n_steps() {
        return Err(Error::invalid(format!(
            "lag {lag} must be in [1, {})",
            traj.n_steps()
        )));
    }
    let index = |name: &str| {
        traj.node_index(name)
            .ok_or_else(|| Error::NetworkMismatch(format!("trajectories lack node {name:?}")))
    };
    let edges = network.edge_names();
    let pairs = edges
        .iter()
        .map(|(s, t)| Ok((index(s)?, index(t)?)))
        .collect::<Result<Vec<_>>>()?;

    let results = pairs
        .par_iter()
        .map(|&(s, t)| {
            let sources: Vec<Vec<f64>> = (0..traj.n_members()).map(|m| traj.series(m, s)).collect();
            let targets: Vec<Vec<f64>> = (0..traj.n_members()).map(|m| traj.series(m, t)).collect();
            let sr: Vec<&[f64]> = sources.iter().map(|v| v.as_slice()).collect();
            let tr: Vec<&[f64]> = targets.iter().map(|v| v.as_slice()).collect();
            transfer_entropy_pooled(&sr, &tr, lag, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeTransfer {
        edges,
        te: results.iter().map(|v| v.value).collect(),
        lag,
        spec: *spec,
        samples: results.first().map_or(0, |v| v.samples),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeInfoRow {
    pub source: String,
    pub target: String,
    pub te_prior: f64,
    pub te_posterior: f64,
    pub abs_diff: f64,
}

/// Per-edge TE before and after assimilation, ranked by absolute change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeInfoReport {
    pub rows: Vec<EdgeInfoRow>,
}

impl EdgeInfoReport {
    /// 1-based rank of an edge by absolute difference.
    pub fn rank_of(&self, source: &str, target: &str) -> Option<usize> {
        self.rows
            .iter()
            .position(|r| r.source == source && r.target == target)
            .map(|i| i + 1)
    }
}

pub fn te_difference_report(
    prior: &EdgeTransfer,
    posterior: &EdgeTransfer,
) -> Result<EdgeInfoReport> {
    if prior.edges != posterior.edges {
        return Err(Error::NetworkMismatch("edge sets differ".into()));
    }
    if prior.lag != posterior.lag || prior.spec != posterior.spec {
        return Err(Error::NetworkMismatch(format!(
            "lag/binning differ: {} vs {}",
            prior.lag, posterior.lag
        )));
    }
    let mut rows: Vec<EdgeInfoRow> = prior
        .edges
        .iter()
        .zip(prior.te.iter().zip(&posterior.te))
        .map(|((s, t), (&a, &b))| EdgeInfoRow {
            source: s.clone(),
            target: t.clone(),
            te_prior: a,
            te_posterior: b,
            abs_diff: (b - a).abs(),
        })
        .collect();
    rows.sort_by(|a, b| b.abs_diff.total_cmp(&a.abs_diff));
    Ok(EdgeInfoReport { rows })
}
