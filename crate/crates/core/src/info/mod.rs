//! Plug-in information estimators on binned data, in nats.

mod discretize;
mod estimators;
mod histogram;
mod linear;
pub mod null;

pub use discretize::{discretize, BinScheme, Binned, DiscretizationSpec};
pub use estimators::{
    cmi_from_histogram, conditional_mi, entropy, entropy_of, f_statistic,
    f_statistic_from_histogram, mi_from_histogram, mutual_information, shannon_transform,
    transfer_entropy, transfer_entropy_pooled, InfoValue,
};
pub use histogram::JointHistogram;
pub use linear::{linear_metrics, mse, LinearMetrics};
pub use null::{mi_shuffle_null, permutation_null, te_shuffle_null, NullDistribution};
