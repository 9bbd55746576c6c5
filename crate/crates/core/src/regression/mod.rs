//! Theory-free regression benchmark. A lagged-forcing neural network bounds
//! the information the forcing data carry about the response, and the
//! shortfall of a model's predictions against that bound is the
//! missing-information statistic.

mod bench;
mod embedding;
mod mlp;
mod train;

pub use bench::{
    convergence_protocol, missing_info_null, missing_information, missing_information_test,
    true_information_oracle, ConvergencePoint, ConvergenceReport, MissingInfoReport,
    MissingInfoTest, TrueInformation, CONVERGENCE_TOLERANCE,
};
pub use embedding::{build_lag_matrix, build_multi_lag_matrix, InputChannel, LagEmbedding};
pub use mlp::Mlp;
pub use train::{
    train_ensemble, train_on_rows, train_regressor, Optimizer, RegressorConfig, RegressorEnsemble,
    Standardizer, TrainedRegressor,
};

/// Lag window used by the benchmark experiments [days].
pub const DEFAULT_LAG: usize = 90;
