use super::InferenceResult;
use crate::error::{MrfError, Result};
use crate::model::LogLinearModel;
use crate::scalar::{log_sum_exp, Real};

/// Exhaustive summation over all `2^n` configurations.
///
/// Unnormalized log-probabilities are the subset sums of the block weights
/// (a zeta transform over the configuration lattice); block expectations are
/// superset sums of the resulting probabilities.
pub fn brute_force<F: Real>(model: &LogLinearModel<F>, cap: usize) -> Result<InferenceResult<F>> {
    let n = model.num_vars();
    if n > cap || n > 30 {
        return Err(MrfError::TooLarge { num_vars: n, cap });
    }
    let size = 1usize << n;
    let masks: Vec<usize> = model
        .cliques()
        .blocks()
        .iter()
        .map(|b| b.members().iter().fold(0usize, |m, &i| m | (1 << i)))
        .collect();

    let mut table = vec![F::zero(); size];
    for (&m, &w) in masks.iter().zip(model.params().as_slice()) {
        table[m] += w;
    }
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..size {
            if x & bit != 0 {
                let lower = table[x ^ bit];
                table[x] += lower;
            }
        }
    }
    let log_z = log_sum_exp(&table);
    for v in table.iter_mut() {
        *v = (*v - log_z).exp();
    }
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..size {
            if x & bit == 0 {
                let upper = table[x | bit];
                table[x] += upper;
            }
        }
    }
    let feature_means = masks
        .iter()
        .map(|&m| table[m].max(F::zero()).min(F::one()))
        .collect();
    Ok(InferenceResult { log_z, feature_means })
}
