//! Systematic-scan Gibbs sampling and binary datasets.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`, so a seed
//! reproduces the same dataset on every platform.

use crate::error::{MrfError, Result};
use crate::model::{Configuration, LogLinearModel};
use crate::scalar::{sigmoid, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplerConfig {
    pub burn_in_sweeps: usize,
    pub thin_sweeps: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            burn_in_sweeps: 1000,
            thin_sweeps: 10,
            seed: 0,
        }
    }
}

/// Equal-length binary observations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    num_vars: usize,
    samples: Vec<Configuration>,
}

impl Dataset {
    pub fn new(num_vars: usize, samples: Vec<Configuration>) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|s| s.len() != num_vars) {
            return Err(MrfError::DimensionMismatch {
                expected: num_vars,
                found: bad.len(),
            });
        }
        Ok(Dataset { num_vars, samples })
    }

    pub fn from_rows(num_vars: usize, rows: Vec<Vec<u8>>) -> Result<Self> {
        let samples = rows.into_iter().map(Configuration::new).collect::<Result<_>>()?;
        Self::new(num_vars, samples)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Configuration] {
        &self.samples
    }

    /// The first `n` samples.
    pub fn prefix(&self, n: usize) -> Dataset {
        Dataset {
            num_vars: self.num_vars,
            samples: self.samples[..n.min(self.samples.len())].to_vec(),
        }
    }

    /// One row per sample, comma-separated bits, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for s in &self.samples {
            w.write_record(s.bits().iter().map(|b| if *b == 1 { "1" } else { "0" }))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| match f {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(MrfError::Parse {
                        line: line + 1,
                        message: format!("expected 0 or 1, found {other:?}"),
                    }),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        let n = rows.first().map_or(0, Vec::len);
        Self::from_rows(n, rows)
    }
}

/// `p(x_m = 1 | x_{-m})`, which only involves blocks containing `m`.
pub fn full_conditional<F: Real>(model: &LogLinearModel<F>, x: &Configuration, m: usize) -> Result<F> {
    if x.len() != model.num_vars() {
        return Err(MrfError::DimensionMismatch {
            expected: model.num_vars(),
            found: x.len(),
        });
    }
    if m >= model.num_vars() {
        return Err(MrfError::InvalidDimension(format!(
            "variable {m} outside 0..{}",
            model.num_vars()
        )));
    }
    Ok(sigmoid(model.local_field(x.bits(), m)))
}

/// Draws `n` samples by systematic sweeps in index order, starting from all
/// zeros, discarding `burn_in_sweeps` sweeps and keeping one state every
/// `thin_sweeps` sweeps.
pub fn gibbs_sample<F: Real>(model: &LogLinearModel<F>, n: usize, cfg: &SamplerConfig) -> Result<Dataset> {
    if n == 0 {
        return Err(MrfError::EmptyDataset);
    }
    if cfg.thin_sweeps == 0 {
        return Err(MrfError::InvalidDimension("thin_sweeps must be at least 1".into()));
    }
    let nv = model.num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = Configuration::zeros(nv);
    let sweep = |state: &mut Configuration, rng: &mut ChaCha8Rng| {
        for m in 0..nv {
            let p = sigmoid(model.local_field(state.bits(), m)).to_f64_lossy();
            let u: f64 = rng.gen();
            state.bits_mut()[m] = u8::from(u < p);
        }
    };
    for _ in 0..cfg.burn_in_sweeps {
        sweep(&mut state, &mut rng);
    }
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..cfg.thin_sweeps {
            sweep(&mut state, &mut rng);
        }
        samples.push(state.clone());
    }
    Dataset::new(nv, samples)
}
