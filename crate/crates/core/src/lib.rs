//! Parameter estimation for binary log-linear Markov random fields.
//!
//! Exact maximum likelihood, pseudo-likelihood, and LAP, which splits the
//! likelihood into one small independent ML problem per maximal clique.
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod builders;
pub mod checks;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod harness;
pub mod inference;
pub mod model;
pub mod optimize;
pub mod sampling;
pub mod scalar;
pub mod text;

pub use builders::{build_model, ModelKind};
pub use error::{MrfError, Result};
pub use estimation::{
    fit_lap, fit_ml, fit_ml_from_stats, fit_pl, EstimationResult, LapOptions, MergeRule, Strategy, StatisticsSource,
};
pub use graph::{marginal_graph, Clique, Graph};
pub use inference::{infer, Backend, InferenceOptions};
pub use model::{CliqueSystem, Configuration, LogLinearModel, ParameterVector, Structure};
pub use optimize::{maximize, OptimizerConfig};
pub use sampling::{gibbs_sample, Dataset, SamplerConfig};
pub use scalar::Real;

pub type Model = LogLinearModel<f64>;
pub type Params = ParameterVector<f64>;
pub type Stats = estimation::SufficientStats<f64>;
pub type Table = inference::JointTable<f64>;
pub type Estimate = EstimationResult<f64>;
pub type Inference = inference::InferenceResult<f64>;
