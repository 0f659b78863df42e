use super::objective::{ml_objective_grad, PseudoLikelihood};
use super::stats::{sufficient_stats, Scope, SufficientStats};
use crate::error::Result;
use crate::graph::Clique;
use crate::inference::InferenceOptions;
use crate::model::{LogLinearModel, ParameterVector, Structure};
use crate::optimize::{maximize, OptimizerConfig, Optimum};
use crate::sampling::Dataset;
use crate::scalar::Real;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Diagnostics for one LAP sub-problem.
#[derive(Clone, Debug, PartialEq)]
pub struct SubproblemReport {
    pub clique: Clique,
    pub num_vars: usize,
    pub num_blocks: usize,
    pub converged: bool,
    pub iterations: usize,
    pub grad_inf_norm: f64,
}

#[derive(Clone, Debug)]
pub struct EstimationResult<F> {
    pub params: ParameterVector<F>,
    /// For LAP: every sub-problem converged.
    pub converged: bool,
    /// For LAP: summed over sub-problems.
    pub iterations: usize,
    /// For LAP: largest over sub-problems.
    pub final_grad_norm: F,
    pub wall_time: Duration,
    /// Empty for ML and PL.
    pub subproblems: Vec<SubproblemReport>,
}

impl<F: Real> EstimationResult<F> {
    pub(crate) fn from_optimum(opt: Optimum<F>, started: Instant) -> Self {
        EstimationResult {
            params: ParameterVector(opt.x),
            converged: opt.converged,
            iterations: opt.iterations,
            final_grad_norm: opt.grad_inf_norm,
            wall_time: started.elapsed(),
            subproblems: Vec::new(),
        }
    }
}

/// Maximum likelihood from precomputed block means, starting at zero.
pub fn fit_ml_from_stats<F: Real>(
    structure: &Arc<Structure>,
    stats: &SufficientStats<F>,
    inference: &InferenceOptions,
    cfg: &OptimizerConfig,
) -> Result<EstimationResult<F>> {
    let started = Instant::now();
    let base = LogLinearModel::<F>::zeros(Arc::clone(structure));
    let opt = maximize(
        |w: &[F]| ml_objective_grad(&base.with_weights(w), stats, inference),
        vec![F::zero(); structure.cliques.num_blocks()],
        cfg,
    )?;
    Ok(EstimationResult::from_optimum(opt, started))
}

pub fn fit_ml<F: Real>(
    structure: &Arc<Structure>,
    data: &Dataset,
    inference: &InferenceOptions,
    cfg: &OptimizerConfig,
) -> Result<EstimationResult<F>> {
    let started = Instant::now();
    let stats = sufficient_stats(&structure.cliques, data, Scope::All)?;
    let mut r = fit_ml_from_stats(structure, &stats, inference, cfg)?;
    r.wall_time = started.elapsed();
    Ok(r)
}

/// Joint maximum pseudo-likelihood over all blocks, starting at zero.
pub fn fit_pl<F: Real>(structure: &Arc<Structure>, data: &Dataset, cfg: &OptimizerConfig) -> Result<EstimationResult<F>> {
    let started = Instant::now();
    let pl = PseudoLikelihood::new(data)?;
    let base = LogLinearModel::<F>::zeros(Arc::clone(structure));
    let opt = maximize(
        |w: &[F]| pl.eval(&base.with_weights(w)),
        vec![F::zero(); structure.cliques.num_blocks()],
        cfg,
    )?;
    Ok(EstimationResult::from_optimum(opt, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::inference::{infer, joint_table};
    use crate::estimation::population_stats;
    use crate::builders::{build_model, ModelKind};
    use crate::sampling::{gibbs_sample, SamplerConfig};

    #[test]
    fn single_node_closed_form() {
        let s = Arc::new(Structure::from_graph(Graph::empty(1)));
        let d = Dataset::from_rows(1, vec![vec![1], vec![1], vec![1], vec![1], vec![0]]).unwrap();
        let r: EstimationResult<f64> = fit_ml(&s, &d, &InferenceOptions::default(), &OptimizerConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.params[0] - 4f64.ln()).abs() < 1e-6);
        let p: EstimationResult<f64> = fit_pl(&s, &d, &OptimizerConfig::default()).unwrap();
        assert!((p.params[0] - r.params[0]).abs() < 1e-6);
    }

    #[test]
    fn population_recovery_and_moment_matching() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[2, 3]).unwrap());
        let truth: Vec<f64> = (0..s.cliques.num_blocks()).map(|i| ((i * 5 % 7) as f64 - 3.0) / 4.0).collect();
        let m = LogLinearModel::new(s.clone(), ParameterVector(truth.clone())).unwrap();
        let t = joint_table(&m, 25).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let stats = population_stats(&s.cliques, &t, &all).unwrap();
        let cfg = OptimizerConfig::with_tol(1e-10);
        let r = fit_ml_from_stats(&s, &stats, &InferenceOptions::default(), &cfg).unwrap();
        assert!(r.converged);
        for (a, b) in r.params.as_slice().iter().zip(&truth) {
            assert!((a - b).abs() < 1e-6);
        }
        let fitted = LogLinearModel::new(s.clone(), r.params.clone()).unwrap();
        let inf = infer(&fitted, &InferenceOptions::default()).unwrap();
        for (a, b) in inf.feature_means.iter().zip(&stats.block_means) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn pl_population_consistency_on_chain() {
        // replicate each configuration in proportion to its probability
        let s = Arc::new(build_model(ModelKind::Chain, &[2]).unwrap());
        let truth = vec![0.5f64, -0.25, 0.75];
        let m = LogLinearModel::new(s.clone(), ParameterVector(truth.clone())).unwrap();
        let t = joint_table(&m, 25).unwrap();
        let scale = 1_000_000.0;
        let mut rows = Vec::new();
        for x in 0..4usize {
            let c = (t.probs()[x] * scale).round() as usize;
            for _ in 0..c {
                rows.push(vec![(x & 1) as u8, (x >> 1) as u8]);
            }
        }
        let d = Dataset::from_rows(2, rows).unwrap();
        let r: EstimationResult<f64> = fit_pl(&s, &d, &OptimizerConfig::with_tol(1e-10)).unwrap();
        // rounding of counts perturbs the target by ~1e-6
        for (a, b) in r.params.as_slice().iter().zip(&truth) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn pl_close_to_ml_on_grid() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[3, 3]).unwrap());
        let truth: Vec<f64> = (0..s.cliques.num_blocks()).map(|i| ((i * 3 % 5) as f64 - 2.0) / 3.0).collect();
        let m = LogLinearModel::new(s.clone(), ParameterVector(truth)).unwrap();
        let d = gibbs_sample(&m, 5000, &SamplerConfig { seed: 2, ..Default::default() }).unwrap();
        let ml: EstimationResult<f64> = fit_ml(&s, &d, &InferenceOptions::default(), &OptimizerConfig::default()).unwrap();
        let pl: EstimationResult<f64> = fit_pl(&s, &d, &OptimizerConfig::default()).unwrap();
        assert!(ml.converged && pl.converged);
        let num: f64 = ml.params.as_slice().iter().zip(pl.params.as_slice()).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = ml.params.as_slice().iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() < 0.2);
    }
}
