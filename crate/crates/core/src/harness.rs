//! Experiment driver: random generating parameters, Gibbs samples, every
//! requested estimator, and relative error against the run's own ML fit.

use crate::builders::{build_model, ModelKind};
use crate::error::{MrfError, Result};
use crate::estimation::{fit_lap, fit_ml_from_stats, fit_pl, sufficient_stats, EstimationResult, LapOptions, MergeRule, Scope, Strategy};
use crate::inference::{infer, InferenceOptions};
use crate::model::{LogLinearModel, ParameterVector, Structure};
use crate::optimize::OptimizerConfig;
use crate::sampling::{gibbs_sample, Dataset, SamplerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    Ml,
    Pl,
    LapExact,
    LapDense,
    LapPairwise,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Ml,
        Estimator::Pl,
        Estimator::LapExact,
        Estimator::LapDense,
        Estimator::LapPairwise,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Ml => "ML",
            Estimator::Pl => "PL",
            Estimator::LapExact => "LAP_E",
            Estimator::LapDense => "LAP_D",
            Estimator::LapPairwise => "LAP_P",
        }
    }

    pub fn strategy(self) -> Option<Strategy> {
        match self {
            Estimator::LapExact => Some(Strategy::Exact),
            Estimator::LapDense => Some(Strategy::Dense),
            Estimator::LapPairwise => Some(Strategy::Pairwise),
            _ => None,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Estimator {
    type Err = MrfError;
    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| MrfError::InvalidDimension(format!("unknown estimator {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ModelKind,
    pub dims: Vec<usize>,
    /// Strictly ascending.
    pub sample_sizes: Vec<usize>,
    pub runs: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub merge: MergeRule,
    /// `seed` is ignored; each run derives its own.
    pub sampler: SamplerConfig,
    pub optimizer: OptimizerConfig,
    pub inference: InferenceOptions,
    pub workers: Option<usize>,
    /// Record wall-clock seconds; when off the column is 0 and output is byte-reproducible.
    pub timing: bool,
    /// Reuse run 0's generating parameters in every run.
    pub fixed_params: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ModelKind::Grid2d,
            dims: vec![4, 4],
            sample_sizes: vec![100, 1000, 10_000],
            runs: 10,
            seed: 0,
            estimators: Estimator::ALL.to_vec(),
            merge: MergeRule::OwnerRead,
            sampler: SamplerConfig::default(),
            optimizer: OptimizerConfig::default(),
            inference: InferenceOptions::default(),
            workers: None,
            timing: true,
            fixed_params: false,
        }
    }
}

impl ExperimentConfig {
    pub fn model_label(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(usize::to_string).collect();
        format!("{}({})", self.kind, dims.join("x"))
    }

    fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(MrfError::InvalidDimension("runs must be at least 1".into()));
        }
        if self.sample_sizes.is_empty()
            || self.sample_sizes[0] == 0
            || self.sample_sizes.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(MrfError::InvalidDimension(
                "sample sizes must be positive and strictly ascending".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub estimator: Estimator,
    pub model: String,
    pub n: usize,
    pub run: usize,
    /// Relative error against the run's ML estimate.
    pub err: f64,
    /// Relative error against the generating parameters.
    pub err_truth: f64,
    pub estimates: Vec<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub estimator: Estimator,
    pub model: String,
    pub n: usize,
    pub mean_err: f64,
    /// Population standard deviation over runs.
    pub std_err: f64,
    pub mean_param_var: f64,
}

/// Stream seed for `(master, run, role)`, mixed with SplitMix64.
pub fn derive_seed(master: u64, run: u64, role: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ run) ^ role)
}

const ROLE_PARAMS: u64 = 1;
const ROLE_SAMPLER: u64 = 2;

/// Block weights drawn uniformly from `[-1, 1]`.
pub fn random_params(structure: &Structure, seed: u64) -> ParameterVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ParameterVector(
        (0..structure.cliques.num_blocks())
            .map(|_| rng.gen_range(-1.0..=1.0))
            .collect(),
    )
}

/// `‖a − b‖ / ‖b‖`, or the absolute distance when `b` is zero.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if norm > 0.0 {
        diff / norm
    } else {
        diff
    }
}

/// Fails early with the backend's cap if ML on this structure cannot run.
pub fn check_tractable(structure: &Arc<Structure>, inference: &InferenceOptions) -> Result<()> {
    infer(&LogLinearModel::<f64>::zeros(Arc::clone(structure)), inference)
        .map(|_| ())
        .map_err(|e| MrfError::Intractable { source: Box::new(e) })
}

pub fn fit_estimator(
    estimator: Estimator,
    structure: &Arc<Structure>,
    data: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<EstimationResult<f64>> {
    match estimator {
        Estimator::Ml => {
            let stats = sufficient_stats(&structure.cliques, data, Scope::All)?;
            fit_ml_from_stats(structure, &stats, &cfg.inference, &cfg.optimizer)
        }
        Estimator::Pl => fit_pl(structure, data, &cfg.optimizer),
        lap => fit_lap(
            structure,
            data,
            &LapOptions {
                strategy: lap.strategy().expect("LAP variant"),
                merge: cfg.merge,
                inference: cfg.inference,
                optimizer: cfg.optimizer,
                workers: cfg.workers,
            },
        ),
    }
}

fn run_once(structure: &Arc<Structure>, cfg: &ExperimentConfig, run: usize, label: &str) -> Result<Vec<MetricsRow>> {
    let param_run = if cfg.fixed_params { 0 } else { run as u64 };
    let truth = random_params(structure, derive_seed(cfg.seed, param_run, ROLE_PARAMS));
    let model = LogLinearModel::new(Arc::clone(structure), truth.clone())?;
    let sampler = SamplerConfig {
        seed: derive_seed(cfg.seed, run as u64, ROLE_SAMPLER),
        ..cfg.sampler
    };
    let max_n = *cfg.sample_sizes.last().expect("validated");
    let all = gibbs_sample(&model, max_n, &sampler)?;

    let mut rows = Vec::new();
    for &n in &cfg.sample_sizes {
        let data = all.prefix(n);
        let reference = fit_estimator(Estimator::Ml, structure, &data, cfg)?;
        for &est in &cfg.estimators {
            let r = if est == Estimator::Ml {
                reference.clone()
            } else {
                fit_estimator(est, structure, &data, cfg)?
            };
            let estimates = r.params.into_inner();
            rows.push(MetricsRow {
                estimator: est,
                model: label.to_string(),
                n,
                run,
                err: relative_error(&estimates, reference.params.as_slice()),
                err_truth: relative_error(&estimates, truth.as_slice()),
                estimates,
                seconds: if cfg.timing { r.wall_time.as_secs_f64() } else { 0.0 },
            });
        }
    }
    Ok(rows)
}

/// Runs every (run, N, estimator) cell; rows come back sorted by
/// estimator, N, run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let structure = Arc::new(build_model(cfg.kind, &cfg.dims)?);
    check_tractable(&structure, &cfg.inference)?;
    let label = cfg.model_label();
    let per_run = (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_once(&structure, cfg, run, &label))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<MetricsRow> = per_run.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.estimator, r.n, r.run));
    Ok(rows)
}

/// Per (estimator, model, N): mean and population std of err, and the mean
/// over parameters of each parameter's population variance across runs.
pub fn aggregate(rows: &[MetricsRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(Estimator, &str, usize, Vec<&MetricsRow>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|g| g.0 == r.estimator && g.1 == r.model && g.2 == r.n)
        {
            Some(g) => g.3.push(r),
            None => groups.push((r.estimator, &r.model, r.n, vec![r])),
        }
    }
    groups.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
    groups
        .into_iter()
        .map(|(estimator, model, n, g)| {
            let k = g.len() as f64;
            let mean_err = g.iter().map(|r| r.err).sum::<f64>() / k;
            let std_err = (g.iter().map(|r| (r.err - mean_err).powi(2)).sum::<f64>() / k).sqrt();
            let p = g[0].estimates.len();
            let mean_param_var = if p == 0 {
                0.0
            } else {
                (0..p)
                    .map(|j| {
                        let m = g.iter().map(|r| r.estimates[j]).sum::<f64>() / k;
                        g.iter().map(|r| (r.estimates[j] - m).powi(2)).sum::<f64>() / k
                    })
                    .sum::<f64>()
                    / p as f64
            };
            SummaryRow {
                estimator,
                model: model.to_string(),
                n,
                mean_err,
                std_err,
                mean_param_var,
            }
        })
        .collect()
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["estimator", "model", "N", "run", "err", "seconds"])?;
    for r in rows {
        w.write_record([
            r.estimator.label().to_string(),
            r.model.clone(),
            r.n.to_string(),
            r.run.to_string(),
            r.err.to_string(),
            r.seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], mut writer: W) -> Result<()> {
    writeln!(writer, "# std_err is the population standard deviation over runs (divides by runs)")?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["estimator", "model", "N", "mean_err", "std_err", "mean_param_var"])?;
    for r in rows {
        w.write_record([
            r.estimator.label().to_string(),
            r.model.clone(),
            r.n.to_string(),
            r.mean_err.to_string(),
            r.std_err.to_string(),
            r.mean_param_var.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(err: f64, estimates: Vec<f64>, run: usize) -> MetricsRow {
        MetricsRow {
            estimator: Estimator::Pl,
            model: "m".into(),
            n: 10,
            run,
            err,
            err_truth: err,
            estimates,
            seconds: 0.0,
        }
    }

    #[test]
    fn relative_error_examples() {
        let e = relative_error(&[1.0, 1.0], &[1.1, 0.9]);
        assert!((e - 0.02f64.sqrt() / 2.02f64.sqrt()).abs() < 1e-12);
        assert!((e - 0.1).abs() < 1e-3);
        assert_eq!(relative_error(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
    }

    #[test]
    fn aggregate_examples() {
        let s = aggregate(&[row(0.25, vec![1.0], 0)]);
        assert_eq!((s[0].mean_err, s[0].std_err), (0.25, 0.0));
        let s = aggregate(&[row(0.1, vec![1.0, 2.0], 0), row(0.3, vec![1.0, 2.0], 1)]);
        assert!((s[0].mean_err - 0.2).abs() < 1e-15);
        assert!((s[0].std_err - 0.1).abs() < 1e-15);
        assert_eq!(s[0].mean_param_var, 0.0);
        let s = aggregate(&[row(0.0, vec![0.0, 1.0], 0), row(0.0, vec![2.0, 1.0], 1)]);
        assert!((s[0].mean_param_var - 0.5).abs() < 1e-15);
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        assert_ne!(derive_seed(1, 2, ROLE_PARAMS), derive_seed(1, 2, ROLE_SAMPLER));
        assert_ne!(derive_seed(1, 2, 1), derive_seed(1, 3, 1));
        let s = build_model(ModelKind::Chain, &[3]).unwrap();
        assert!(random_params(&s, 4).as_slice().iter().all(|w| (-1.0..=1.0).contains(w)));
    }

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            kind: ModelKind::Grid2d,
            dims: vec![2, 3],
            sample_sizes: vec![50, 200],
            runs: 2,
            seed: 7,
            sampler: SamplerConfig {
                burn_in_sweeps: 50,
                thin_sweeps: 2,
                seed: 0,
            },
            timing: false,
            ..Default::default()
        }
    }

    #[test]
    fn ml_only_has_zero_error() {
        let rows = run_experiment(&ExperimentConfig {
            estimators: vec![Estimator::Ml],
            ..small()
        })
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.err == 0.0));
    }

    #[test]
    fn reproducible_and_prefix_stable() {
        let cfg = small();
        let mut a = Vec::new();
        write_metrics(&run_experiment(&cfg).unwrap(), &mut a).unwrap();
        let mut b = Vec::new();
        write_metrics(&run_experiment(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);

        let shorter = run_experiment(&ExperimentConfig {
            sample_sizes: vec![50],
            ..cfg.clone()
        })
        .unwrap();
        let longer = run_experiment(&cfg).unwrap();
        for r in &shorter {
            assert!(longer.contains(r));
        }
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("estimator,model,N,run,err,seconds\nML,grid2d(2x3),50,0,0,0\n"));
    }

    #[test]
    fn config_validation_and_intractable_baseline() {
        assert!(run_experiment(&ExperimentConfig { runs: 0, ..small() }).is_err());
        assert!(run_experiment(&ExperimentConfig { sample_sizes: vec![10, 10], ..small() }).is_err());
        let cfg = ExperimentConfig {
            kind: ModelKind::Rbm,
            dims: vec![30, 30],
            ..small()
        };
        let e = run_experiment(&cfg).unwrap_err();
        assert!(matches!(e, MrfError::Intractable { .. }));
        assert!(e.to_string().contains("cap"));
    }
}
