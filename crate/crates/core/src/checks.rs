//! Quick invariant suite behind `lapmrf check`.

use crate::builders::{build_model, ModelKind};
use crate::error::Result;
use crate::estimation::{fit_lap, ml_objective_grad, sufficient_stats, EstimationResult, LapOptions, Scope, Strategy};
use crate::harness::random_params;
use crate::inference::{brute_force, joint_table, min_fill_order, mobius_potentials, variable_elimination, InferenceOptions};
use crate::model::{LogLinearModel, ParameterVector};
use crate::optimize::OptimizerConfig;
use crate::sampling::{gibbs_sample, SamplerConfig};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, tol: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("max deviation {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn random_model(kind: ModelKind, dims: &[usize], seed: u64) -> Result<LogLinearModel<f64>> {
    let s = Arc::new(build_model(kind, dims)?);
    let w = random_params(&s, seed);
    LogLinearModel::new(s, w)
}

fn inference_agreement() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let m = random_model(ModelKind::Grid2d, &[3, 4], seed)?;
        let bf = brute_force(&m, 25)?;
        let ve = variable_elimination(&m, &min_fill_order(m.graph()), 1 << 26)?;
        worst = worst.max((bf.log_z - ve.log_z).abs());
        for (a, b) in bf.feature_means.iter().zip(&ve.feature_means) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(outcome("brute force and elimination agree", worst, 1e-10))
}

fn mobius_round_trip() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let m = random_model(ModelKind::Grid2d, &[2, 3], seed)?;
        let w = mobius_potentials(&joint_table(&m, 25)?)?;
        for (mask, v) in w.iter() {
            let expect = m
                .cliques()
                .blocks()
                .iter()
                .position(|b| b.members().iter().fold(0usize, |a, &i| a | (1 << i)) == mask)
                .map_or(0.0, |bi| m.params()[bi]);
            worst = worst.max((v - expect).abs());
        }
    }
    Ok(outcome("Mobius inversion recovers block weights", worst, 1e-10))
}

fn gradient_check() -> Result<CheckOutcome> {
    let m = random_model(ModelKind::Chain, &[5], 3)?;
    let d = gibbs_sample(&m, 200, &SamplerConfig { seed: 1, ..Default::default() })?;
    let stats = sufficient_stats(m.cliques(), &d, Scope::All)?;
    let opts = InferenceOptions::default();
    let (_, g) = ml_objective_grad(&m, &stats, &opts)?;
    let value_at = |w: Vec<f64>| -> Result<f64> {
        let shifted = LogLinearModel::new(m.structure().clone(), ParameterVector(w))?;
        Ok(ml_objective_grad(&shifted, &stats, &opts)?.0)
    };
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (i, gi) in g.iter().enumerate() {
        let mut w = m.params().as_slice().to_vec();
        w[i] += h;
        let up = value_at(w.clone())?;
        w[i] -= 2.0 * h;
        let down = value_at(w)?;
        worst = worst.max((gi - (up - down) / (2.0 * h)).abs());
    }
    Ok(outcome("ML gradient matches finite differences", worst, 1e-6))
}

fn lap_population() -> Result<CheckOutcome> {
    let m = random_model(ModelKind::Grid2d, &[3, 3], 11)?;
    let t = joint_table(&m, 25)?;
    let opts = LapOptions {
        strategy: Strategy::Exact,
        optimizer: OptimizerConfig::with_tol(1e-10),
        ..Default::default()
    };
    let r: EstimationResult<f64> = fit_lap(m.structure(), &t, &opts)?;
    let worst = r
        .params
        .as_slice()
        .iter()
        .zip(m.params().as_slice())
        .fold(0.0f64, |w, (a, b)| w.max((a - b).abs()));
    Ok(outcome("LAP recovers parameters from population statistics", worst, 1e-6))
}

fn worker_determinism() -> Result<CheckOutcome> {
    let m = random_model(ModelKind::Grid2d, &[4, 4], 5)?;
    let d = gibbs_sample(&m, 500, &SamplerConfig { seed: 2, ..Default::default() })?;
    let fit = |w: usize| -> Result<Vec<f64>> {
        let r: EstimationResult<f64> = fit_lap(m.structure(), &d, &LapOptions { workers: Some(w), ..Default::default() })?;
        Ok(r.params.into_inner())
    };
    let one = fit(1)?;
    let same = [2, 8].iter().map(|&w| fit(w)).collect::<Result<Vec<_>>>()?.iter().all(|r| *r == one);
    Ok(CheckOutcome {
        name: "LAP output independent of worker count",
        passed: same,
        detail: "workers 1, 2, 8".into(),
    })
}

/// Runs every check; an `Err` means a check could not run at all.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        inference_agreement()?,
        mobius_round_trip()?,
        gradient_check()?,
        lap_population()?,
        worker_determinism()?,
    ])
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_checks().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
