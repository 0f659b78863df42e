//! Exact inference: log-partition functions and block feature expectations.

mod brute;
mod elimination;
mod table;

pub use brute::brute_force;
pub use elimination::{min_fill_order, variable_elimination};
pub use table::{explicit_ml_estimate, joint_table, marginalize, mobius_potentials, JointTable, SubsetPotentials};

use crate::error::{MrfError, Result};
use crate::model::LogLinearModel;
use crate::scalar::Real;
use std::fmt;
use std::str::FromStr;

/// `log Z` and `E[phi_b]` for every block, aligned with the clique system's blocks.
#[derive(Clone, Debug)]
pub struct InferenceResult<F> {
    pub log_z: F,
    pub feature_means: Vec<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    BruteForce,
    Elimination,
    /// Brute force up to `auto_brute_limit` variables, elimination above.
    Auto,
}

impl FromStr for Backend {
    type Err = MrfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Backend::BruteForce),
            "ve" => Ok(Backend::Elimination),
            "auto" => Ok(Backend::Auto),
            other => Err(MrfError::InvalidDimension(format!("unknown backend {other:?}"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::BruteForce => "brute",
            Backend::Elimination => "ve",
            Backend::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InferenceOptions {
    pub backend: Backend,
    pub brute_force_cap: usize,
    /// Largest elimination table, in entries.
    pub max_table_entries: usize,
    pub auto_brute_limit: usize,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        InferenceOptions {
            backend: Backend::Auto,
            brute_force_cap: 25,
            max_table_entries: 1 << 26,
            auto_brute_limit: 20,
        }
    }
}

impl InferenceOptions {
    pub fn with_backend(backend: Backend) -> Self {
        InferenceOptions {
            backend,
            ..Default::default()
        }
    }
}

/// Runs the configured backend. Elimination uses the min-fill order.
pub fn infer<F: Real>(model: &LogLinearModel<F>, opts: &InferenceOptions) -> Result<InferenceResult<F>> {
    let use_brute = match opts.backend {
        Backend::BruteForce => true,
        Backend::Elimination => false,
        Backend::Auto => model.num_vars() <= opts.auto_brute_limit.min(opts.brute_force_cap),
    };
    if use_brute {
        brute_force(model, opts.brute_force_cap)
    } else {
        let order = min_fill_order(model.graph());
        variable_elimination(model, &order, opts.max_table_entries)
    }
}
