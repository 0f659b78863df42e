use super::stats::SufficientStats;
use crate::error::{MrfError, Result};
use crate::inference::{infer, InferenceOptions};
use crate::model::LogLinearModel;
use crate::sampling::Dataset;
use crate::scalar::{sigmoid, softplus, Real};
use std::collections::HashMap;

/// Scaled log-likelihood (up to a data-independent constant) and its gradient,
/// `sum_b w_b mean_b - log Z` and `mean_b - E[phi_b]`.
pub fn ml_objective_grad<F: Real>(
    model: &LogLinearModel<F>,
    stats: &SufficientStats<F>,
    opts: &InferenceOptions,
) -> Result<(F, Vec<F>)> {
    let k = model.cliques().num_blocks();
    if stats.block_means.len() != k {
        return Err(MrfError::DimensionMismatch {
            expected: k,
            found: stats.block_means.len(),
        });
    }
    let inf = infer(model, opts)?;
    let w = model.params().as_slice();
    let value = w
        .iter()
        .zip(&stats.block_means)
        .map(|(&a, &b)| a * b)
        .sum::<F>()
        - inf.log_z;
    let grad = stats
        .block_means
        .iter()
        .zip(&inf.feature_means)
        .map(|(&d, &m)| d - m)
        .collect();
    Ok((value, grad))
}

/// Distinct rows with multiplicities; evaluation cost scales with distinct rows.
#[derive(Clone, Debug)]
pub(crate) struct PseudoLikelihood {
    rows: Vec<(Vec<u8>, usize)>,
    n: usize,
}

impl PseudoLikelihood {
    pub(crate) fn new(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(MrfError::EmptyDataset);
        }
        let mut index: HashMap<&[u8], usize> = HashMap::new();
        let mut rows: Vec<(Vec<u8>, usize)> = Vec::new();
        for x in data.samples() {
            match index.get(x.bits()) {
                Some(&i) => rows[i].1 += 1,
                None => {
                    index.insert(x.bits(), rows.len());
                    rows.push((x.bits().to_vec(), 1));
                }
            }
        }
        Ok(PseudoLikelihood { rows, n: data.len() })
    }

    /// Contrastive form: each variable `m` contributes
    /// `p(flip m | rest) * (phi_b(x) - phi_b(x with m flipped))` to blocks containing `m`.
    pub(crate) fn eval<F: Real>(&self, model: &LogLinearModel<F>) -> Result<(F, Vec<F>)> {
        let cliques = model.cliques();
        let nv = model.num_vars();
        if self.rows.first().map_or(0, |r| r.0.len()) != nv {
            return Err(MrfError::DimensionMismatch {
                expected: nv,
                found: self.rows[0].0.len(),
            });
        }
        let w = model.params().as_slice();
        let mut value = F::zero();
        let mut grad = vec![F::zero(); w.len()];
        let mut active: Vec<usize> = Vec::new();
        for (x, count) in &self.rows {
            let c = F::from_usize(*count).expect("count representable");
            for m in 0..nv {
                active.clear();
                let mut delta = F::zero();
                for &bi in cliques.blocks_containing(m) {
                    if cliques.blocks()[bi]
                        .members()
                        .iter()
                        .all(|&i| i == m || x[i] == 1)
                    {
                        active.push(bi);
                        delta += w[bi];
                    }
                }
                let (log_p, p_flip, diff) = if x[m] == 1 {
                    (-softplus(-delta), sigmoid(-delta), F::one())
                } else {
                    (-softplus(delta), sigmoid(delta), -F::one())
                };
                value += c * log_p;
                let step = c * p_flip * diff;
                for &bi in &active {
                    grad[bi] += step;
                }
            }
        }
        let n = F::from_usize(self.n).expect("sample count representable");
        for g in grad.iter_mut() {
            *g /= n;
        }
        Ok((value / n, grad))
    }
}

/// Scaled pseudo-log-likelihood `(1/N) sum_n sum_m log p(x_mn | x_-mn)` and its gradient.
pub fn pl_objective_grad<F: Real>(model: &LogLinearModel<F>, data: &Dataset) -> Result<(F, Vec<F>)> {
    PseudoLikelihood::new(data)?.eval(model)
}
