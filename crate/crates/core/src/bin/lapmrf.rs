use clap::{Args, Parser, Subcommand};
use lapmrf::checks::run_checks;
use lapmrf::harness::{aggregate, fit_estimator, run_experiment, write_metrics, write_summary, Estimator, ExperimentConfig};
use lapmrf::text::{parse_structure, write_model, Diagnostics};
use lapmrf::{build_model, Backend, Dataset, InferenceOptions, LogLinearModel, MergeRule, ModelKind, OptimizerConfig, SamplerConfig, Structure};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

/// Estimate binary MRF parameters with ML, PL and LAP, and run the
/// comparison experiments.
#[derive(Parser)]
#[command(name = "lapmrf", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Gibbs sample and write it as CSV.
    Sample(SampleArgs),
    /// Fit one estimator to a CSV dataset and print the model text format.
    Fit(FitArgs),
    /// Run the invariant suite.
    Check,
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value = "grid2d")]
    model: ModelKind,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "4,4")]
    dims: Vec<usize>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Gradient infinity-norm tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value = "auto")]
    backend: Backend,
    /// LAP worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "owner")]
    merge: MergeRule,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    samples: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "ml,pl,lap_e,lap_d,lap_p")]
    estimators: Vec<Estimator>,
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Per-run metrics CSV; the summary goes next to it as `<stem>.summary.csv`.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Write 0 in the seconds column so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    /// Use the same generating parameters in every run.
    #[arg(long)]
    fixed_params: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Model text file with parameters; overrides --model/--dims and random parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, short = 'n', default_value_t = 1000)]
    num: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burnin: usize,
    #[arg(long, default_value_t = 10)]
    thin: usize,
    /// Output CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Model text file whose `clique` lines define the structure.
    #[arg(long)]
    structure: Option<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "lap_e")]
    estimator: Estimator,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output model file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn inference(s: &SolverArgs) -> InferenceOptions {
    InferenceOptions::with_backend(s.backend)
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn experiment(a: ExperimentArgs) -> lapmrf::Result<()> {
    let cfg = ExperimentConfig {
        kind: a.model.model,
        dims: a.model.dims,
        sample_sizes: a.samples,
        runs: a.runs,
        seed: a.seed,
        estimators: a.estimators,
        merge: a.solver.merge,
        sampler: SamplerConfig {
            burn_in_sweeps: a.burnin,
            thin_sweeps: a.thin,
            seed: 0,
        },
        optimizer: OptimizerConfig::with_tol(a.solver.tol),
        inference: inference(&a.solver),
        workers: a.solver.workers,
        timing: !a.no_timing,
        fixed_params: a.fixed_params,
    };
    let rows = run_experiment(&cfg)?;
    write_metrics(&rows, BufWriter::new(File::create(&a.out)?))?;
    let summary = aggregate(&rows);
    let spath = summary_path(&a.out);
    write_summary(&summary, BufWriter::new(File::create(&spath)?))?;
    for s in &summary {
        eprintln!("{:6} N={:<6} mean_err={:.4} std={:.4}", s.estimator.label(), s.n, s.mean_err, s.std_err);
    }
    eprintln!("wrote {} and {}", a.out.display(), spath.display());
    Ok(())
}

fn sample(a: SampleArgs) -> lapmrf::Result<()> {
    let model: LogLinearModel<f64> = match &a.params {
        Some(p) => lapmrf::text::parse_model(&std::fs::read_to_string(p)?)?.0,
        None => {
            let s = Arc::new(build_model(a.model.model, &a.model.dims)?);
            let w = lapmrf::harness::random_params(&s, a.seed);
            LogLinearModel::new(s, w)?
        }
    };
    let cfg = SamplerConfig {
        burn_in_sweeps: a.burnin,
        thin_sweeps: a.thin,
        seed: a.seed,
    };
    let d = lapmrf::gibbs_sample(&model, a.num, &cfg)?;
    d.write_csv(output(a.out.as_deref())?)
}

fn fit(a: FitArgs) -> lapmrf::Result<()> {
    let structure: Structure = match &a.structure {
        Some(p) => parse_structure(&std::fs::read_to_string(p)?)?,
        None => build_model(a.model.model, &a.model.dims)?,
    };
    let structure = Arc::new(structure);
    let data = Dataset::read_csv(File::open(&a.data)?)?;
    let cfg = ExperimentConfig {
        merge: a.solver.merge,
        optimizer: OptimizerConfig::with_tol(a.solver.tol),
        inference: inference(&a.solver),
        workers: a.solver.workers,
        ..Default::default()
    };
    if data.num_vars() != structure.num_vars() {
        return Err(lapmrf::MrfError::DimensionMismatch {
            expected: structure.num_vars(),
            found: data.num_vars(),
        });
    }
    let r = fit_estimator(a.estimator, &structure, &data, &cfg)?;
    let model = LogLinearModel::new(structure, r.params.clone())?;
    let mut out = output(a.out.as_deref())?;
    out.write_all(write_model(&model, Some(&Diagnostics::from(&r))).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn check() -> lapmrf::Result<bool> {
    let mut ok = true;
    for c in run_checks()? {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        ok &= c.passed;
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        None => experiment(cli.experiment).map(|_| true),
        Some(Command::Sample(a)) => sample(a).map(|_| true),
        Some(Command::Fit(a)) => fit(a).map(|_| true),
        Some(Command::Check) => check(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
