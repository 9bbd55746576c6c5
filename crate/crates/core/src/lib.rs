//! Information-theoretic benchmarking of hydrological models.
//!
//! The crate is organised around six subsystems:
//!
//! - [`dynamics`]: daily conceptual rainfall-runoff simulators (HyMod, Nash
//!   cascade, abc model) used both as synthetic truth and as hypotheses.
//! - [`info`]: plug-in entropy, mutual information, conditional mutual
//!   information, transfer entropy and f-statistics on binned data, plus
//!   permutation nulls and the linear metrics they generalise.
//! - [`regression`]: lagged-forcing regression that bounds the information
//!   content of perturbation data, and the missing-information statistic.
//! - [`bayes`]: Monte-Carlo model probabilities under Gaussian measurement
//!   distributions, showing their sensitivity to those distributions.
//! - [`network`]: models as directed process networks, particle-filter
//!   assimilation, binned system identification and per-edge transfer entropy.
//! - [`harness`]: configuration, synthetic forcing, CSV I/O and the three
//!   experiment runners.
//!
//! All information quantities are in nats.

pub mod bayes;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod info;
pub mod network;
pub mod regression;
pub mod seed;
pub mod series;

pub use dynamics::{
    AbcParams, Forcing, HymodParams, ModelKind, ModelParams, ModelState, NashParams,
    SimulationResult,
};
pub use error::{Error, Result};
pub use info::{BinScheme, DiscretizationSpec, InfoValue, JointHistogram};
pub use series::TimeSeries;
