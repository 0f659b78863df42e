//! Exact maximum likelihood, pseudo-likelihood, and LAP.

mod auxiliary;
mod fit;
mod lap;
mod objective;
mod stats;

pub use auxiliary::{build_auxiliary, AuxiliarySpec, Strategy, MAX_INDUCED_CLIQUE};
pub use fit::{fit_ml, fit_ml_from_stats, fit_pl, EstimationResult, SubproblemReport};
pub use lap::{fit_lap, solve_subproblem, LapOptions, MergeRule};
pub use objective::{ml_objective_grad, pl_objective_grad};
pub use stats::{population_stats, sufficient_stats, Scope, StatisticsSource, SufficientStats};
