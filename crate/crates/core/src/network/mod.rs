//! Models as networks of interacting processes: trajectory ensembles,
//! particle-filter assimilation, residual-correction system identification
//! and per-edge transfer entropy.

mod assimilate;
mod edges;
mod identify;
mod spec;
mod trajectories;

pub use assimilate::{assimilate, systematic_resample, AssimilationConfig, AssimilationResult};
pub use edges::{
    edge_transfer_entropy, te_difference_report, EdgeInfoReport, EdgeInfoRow, EdgeTransfer,
    DEFAULT_TE_LAG,
};
pub use identify::{
    identify_system, predict_with_identified, ConditionalMap, IdentifiedModel, NodeCorrection,
};
pub use spec::{
    build_hymod_network, quick_tank, slow_tank, NetworkSpec, Node, NodeRole, PET, PRECIP, SOIL,
    STREAMFLOW,
};
pub use trajectories::{
    jitter_params, jitter_state, record_trajectories, PriorEnsemble, TrajectoryEnsemble,
};
