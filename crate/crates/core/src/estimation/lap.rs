use super::auxiliary::{build_auxiliary, AuxiliarySpec, Strategy};
use super::fit::{EstimationResult, SubproblemReport};
use super::objective::ml_objective_grad;
use super::stats::{StatisticsSource, SufficientStats};
use crate::error::{MrfError, Result};
use crate::inference::InferenceOptions;
use crate::model::{LogLinearModel, ParameterVector, Structure};
use crate::optimize::{maximize, OptimizerConfig};
use crate::scalar::Real;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

/// How block estimates from overlapping sub-problems are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MergeRule {
    /// Take each block from the sub-problem of its owning clique.
    #[default]
    OwnerRead,
    /// Average over every sub-problem whose clique contains the block.
    Average,
}

impl fmt::Display for MergeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeRule::OwnerRead => "owner",
            MergeRule::Average => "average",
        })
    }
}

impl FromStr for MergeRule {
    type Err = MrfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "owner" => Ok(MergeRule::OwnerRead),
            "average" => Ok(MergeRule::Average),
            other => Err(MrfError::InvalidDimension(format!("unknown merge rule {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LapOptions {
    pub strategy: Strategy,
    pub merge: MergeRule,
    pub inference: InferenceOptions,
    pub optimizer: OptimizerConfig,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl Default for LapOptions {
    fn default() -> Self {
        LapOptions {
            strategy: Strategy::Exact,
            merge: MergeRule::OwnerRead,
            inference: InferenceOptions::default(),
            optimizer: OptimizerConfig::default(),
            workers: None,
        }
    }
}

impl LapOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        LapOptions {
            strategy,
            ..Default::default()
        }
    }
}

/// Maximum likelihood for one auxiliary model; returns local weights.
pub fn solve_subproblem<F: Real>(
    aux: &AuxiliarySpec,
    stats: &SufficientStats<F>,
    inference: &InferenceOptions,
    optimizer: &OptimizerConfig,
) -> Result<(Vec<F>, SubproblemReport)> {
    let base = LogLinearModel::<F>::zeros(Arc::clone(&aux.structure));
    let opt = maximize(
        |w: &[F]| ml_objective_grad(&base.with_weights(w), stats, inference),
        vec![F::zero(); aux.structure.cliques.num_blocks()],
        optimizer,
    )?;
    let report = SubproblemReport {
        clique: aux.q.clone(),
        num_vars: aux.num_vars(),
        num_blocks: aux.structure.cliques.num_blocks(),
        converged: opt.converged,
        iterations: opt.iterations,
        grad_inf_norm: opt.grad_inf_norm.to_f64_lossy(),
    };
    Ok((opt.x, report))
}

type Solved<F> = (AuxiliarySpec, Vec<F>, SubproblemReport);

fn solve_all<F: Real, S: StatisticsSource<F>>(
    structure: &Structure,
    source: &S,
    opts: &LapOptions,
) -> Result<Vec<Solved<F>>> {
    structure
        .cliques
        .maximal()
        .par_iter()
        .map(|q| {
            let run = || -> Result<Solved<F>> {
                let aux = build_auxiliary(structure, q, opts.strategy)?;
                let stats = source.local_stats(&aux.structure.cliques, &aux.variables)?;
                let (w, report) = solve_subproblem(&aux, &stats, &opts.inference, &opts.optimizer)?;
                Ok((aux, w, report))
            };
            run().map_err(|e| MrfError::Subproblem {
                clique: q.members().to_vec(),
                source: Box::new(e),
            })
        })
        .collect()
}

/// LAP: one independent local ML problem per maximal clique, then merge.
///
/// Each sub-problem reads statistics only over its clique's one-neighborhood.
/// The result does not depend on the number of workers.
pub fn fit_lap<F: Real, S: StatisticsSource<F>>(
    structure: &Arc<Structure>,
    source: &S,
    opts: &LapOptions,
) -> Result<EstimationResult<F>> {
    let started = Instant::now();
    if source.num_vars() != structure.num_vars() {
        return Err(MrfError::DimensionMismatch {
            expected: structure.num_vars(),
            found: source.num_vars(),
        });
    }
    let solved = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| MrfError::InvalidDimension(format!("thread pool: {e}")))?
            .install(|| solve_all(structure, source, opts))?,
        None => solve_all(structure, source, opts)?,
    };

    let cliques = &structure.cliques;
    let mut sums = vec![F::zero(); cliques.num_blocks()];
    let mut counts = vec![0usize; cliques.num_blocks()];
    for (qi, (aux, w, _)) in solved.iter().enumerate() {
        for (li, gi) in aux.clique_blocks() {
            let take = match opts.merge {
                MergeRule::OwnerRead => cliques.owner(gi) == qi,
                MergeRule::Average => true,
            };
            if take {
                sums[gi] += w[li];
                counts[gi] += 1;
            }
        }
    }
    let params = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s / F::from_usize(c).expect("count representable"))
        .collect();

    let reports: Vec<SubproblemReport> = solved.into_iter().map(|(_, _, r)| r).collect();
    Ok(EstimationResult {
        params: ParameterVector(params),
        converged: reports.iter().all(|r| r.converged),
        iterations: reports.iter().map(|r| r.iterations).sum(),
        final_grad_norm: F::lit(reports.iter().fold(0.0, |m, r| m.max(r.grad_inf_norm))),
        wall_time: started.elapsed(),
        subproblems: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_model, ModelKind};
    use crate::estimation::{fit_ml_from_stats, sufficient_stats, Scope};
    use crate::inference::{joint_table, JointTable};
    use crate::model::CliqueSystem;
    use crate::sampling::{gibbs_sample, Dataset, SamplerConfig};
    use std::sync::Mutex;

    fn seeded(s: &Arc<Structure>, k: usize) -> LogLinearModel<f64> {
        let w = (0..s.cliques.num_blocks())
            .map(|i| (((i + k) * 7 % 11) as f64 - 5.0) / 6.0)
            .collect();
        LogLinearModel::new(s.clone(), ParameterVector(w)).unwrap()
    }

    fn tight() -> LapOptions {
        LapOptions {
            optimizer: OptimizerConfig::with_tol(1e-11),
            ..Default::default()
        }
    }

    #[test]
    fn population_consistency_on_grid() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[3, 3]).unwrap());
        let m = seeded(&s, 1);
        let t = joint_table(&m, 25).unwrap();
        for strategy in [Strategy::Exact, Strategy::Dense] {
            let r: EstimationResult<f64> = fit_lap(&s, &t, &LapOptions { strategy, ..tight() }).unwrap();
            assert!(r.converged, "{strategy}: {:?}", r.subproblems);
            for (a, b) in r.params.as_slice().iter().zip(m.params().as_slice()) {
                assert!((a - b).abs() < 1e-6, "{strategy}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn exact_equals_ml_when_neighborhood_is_everything() {
        let s = Arc::new(build_model(ModelKind::Chain, &[4]).unwrap());
        let m = seeded(&s, 2);
        let d = gibbs_sample(&m, 500, &SamplerConfig { seed: 4, ..Default::default() }).unwrap();
        let stats = sufficient_stats(&s.cliques, &d, Scope::All).unwrap();
        let ml = fit_ml_from_stats(&s, &stats, &InferenceOptions::default(), &OptimizerConfig::with_tol(1e-11)).unwrap();
        let lap: EstimationResult<f64> = fit_lap(&s, &d, &tight()).unwrap();
        for (a, b) in lap.params.as_slice().iter().zip(ml.params.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn merge_rules_agree_on_population() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[2, 3]).unwrap());
        let t = joint_table(&seeded(&s, 3), 25).unwrap();
        let a: EstimationResult<f64> = fit_lap(&s, &t, &tight()).unwrap();
        let b: EstimationResult<f64> = fit_lap(&s, &t, &LapOptions { merge: MergeRule::Average, ..tight() }).unwrap();
        for (x, y) in a.params.as_slice().iter().zip(b.params.as_slice()) {
            assert!((x - y).abs() < 1e-6);
        }
        assert_eq!(a.subproblems.len(), s.cliques.maximal().len());
    }

    #[test]
    fn average_differs_from_owner_on_samples() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[3, 3]).unwrap());
        let d = gibbs_sample(&seeded(&s, 5), 300, &SamplerConfig { seed: 8, ..Default::default() }).unwrap();
        let a: EstimationResult<f64> = fit_lap(&s, &d, &LapOptions::default()).unwrap();
        let b: EstimationResult<f64> = fit_lap(&s, &d, &LapOptions { merge: MergeRule::Average, ..Default::default() }).unwrap();
        // pair blocks belong to a single clique, only shared unaries can differ
        for (bi, blk) in s.cliques.blocks().iter().enumerate() {
            if blk.len() == 2 {
                assert_eq!(a.params[bi], b.params[bi]);
            }
        }
        assert_ne!(a.params, b.params);
    }

    struct Counting<'a> {
        data: &'a Dataset,
        calls: Mutex<Vec<Vec<usize>>>,
    }

    impl StatisticsSource<f64> for Counting<'_> {
        fn num_vars(&self) -> usize {
            self.data.num_vars()
        }
        fn local_stats(&self, cliques: &CliqueSystem, scope: &[usize]) -> Result<SufficientStats<f64>> {
            self.calls.lock().unwrap().push(scope.to_vec());
            sufficient_stats(cliques, self.data, Scope::Vars(scope))
        }
    }

    #[test]
    fn each_subproblem_reads_only_its_neighborhood() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[4, 4]).unwrap());
        let d = gibbs_sample(&seeded(&s, 0), 200, &SamplerConfig { seed: 1, ..Default::default() }).unwrap();
        let src = Counting {
            data: &d,
            calls: Mutex::new(Vec::new()),
        };
        let _: EstimationResult<f64> = fit_lap(&s, &src, &LapOptions::with_strategy(Strategy::Pairwise)).unwrap();
        let mut calls = src.calls.into_inner().unwrap();
        calls.sort();
        let mut expect: Vec<Vec<usize>> = s
            .cliques
            .maximal()
            .iter()
            .map(|q| s.one_neighborhood(q).unwrap())
            .collect();
        expect.sort();
        assert_eq!(calls, expect);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[4, 4]).unwrap());
        let d = gibbs_sample(&seeded(&s, 6), 400, &SamplerConfig { seed: 2, ..Default::default() }).unwrap();
        let runs: Vec<Vec<f64>> = [1, 2, 8]
            .iter()
            .map(|&w| {
                let r: EstimationResult<f64> = fit_lap(&s, &d, &LapOptions { workers: Some(w), ..Default::default() }).unwrap();
                r.params.into_inner()
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
    }

    #[test]
    fn subproblem_errors_name_the_clique() {
        let s = Arc::new(build_model(ModelKind::Rbm, &[12, 12]).unwrap());
        let t = JointTable::new(1, vec![0.5, 0.5]).unwrap();
        let r: Result<EstimationResult<f64>> = fit_lap(&s, &t, &LapOptions::default());
        assert!(matches!(r, Err(MrfError::DimensionMismatch { .. })));
        let d = Dataset::from_rows(24, vec![vec![0; 24]; 3]).unwrap();
        let r: Result<EstimationResult<f64>> = fit_lap(&s, &d, &LapOptions::with_strategy(Strategy::Dense));
        match r {
            Err(MrfError::Subproblem { clique, source }) => {
                assert_eq!(clique.len(), 2);
                assert!(matches!(*source, MrfError::TooLarge { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
