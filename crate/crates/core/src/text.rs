//! Plain-text model format.
//!
//! ```text
//! mrf 3
//! clique 0 1
//! clique 1 2
//! param 0 2.5000000000000000e-1
//! param 0 1 -1.0000000000000000e0
//! diag converged=1 iters=12 gradnorm=3.1e-7 seconds=0.002
//! ```
//!
//! `param` lines list every block in canonical order; `diag` is optional.
//! Blank lines and lines starting with `#` are ignored.

use crate::error::{MrfError, Result};
use crate::estimation::EstimationResult;
use crate::graph::Clique;
use crate::model::{LogLinearModel, ParameterVector, Structure};
use crate::scalar::Real;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub seconds: f64,
}

impl<F: Real> From<&EstimationResult<F>> for Diagnostics {
    fn from(r: &EstimationResult<F>) -> Self {
        Diagnostics {
            converged: r.converged,
            iterations: r.iterations,
            grad_norm: r.final_grad_norm.to_f64_lossy(),
            seconds: r.wall_time.as_secs_f64(),
        }
    }
}

pub fn write_model<F: Real>(model: &LogLinearModel<F>, diag: Option<&Diagnostics>) -> String {
    let mut out = String::new();
    let cliques = model.cliques();
    writeln!(out, "mrf {}", model.num_vars()).unwrap();
    for c in cliques.maximal() {
        writeln!(out, "clique {}", join(c.members())).unwrap();
    }
    for (b, w) in cliques.blocks().iter().zip(model.params().as_slice()) {
        writeln!(out, "param {} {:.16e}", join(b.members()), w.to_f64_lossy()).unwrap();
    }
    if let Some(d) = diag {
        writeln!(
            out,
            "diag converged={} iters={} gradnorm={:e} seconds={}",
            u8::from(d.converged),
            d.iterations,
            d.grad_norm,
            d.seconds
        )
        .unwrap();
    }
    out
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn err(line: usize, message: impl Into<String>) -> MrfError {
    MrfError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str) -> Result<T> {
    tok.parse().map_err(|_| err(line, format!("bad number {tok:?}")))
}

/// Parses a model; a missing `param` line for a block means weight 0.
pub fn parse_model<F: Real>(text: &str) -> Result<(LogLinearModel<F>, Option<Diagnostics>)> {
    let mut num_vars: Option<usize> = None;
    let mut maximal = Vec::new();
    let mut params: Vec<(usize, Clique, F)> = Vec::new();
    let mut diag = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut toks = raw.split_whitespace();
        let head = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match head {
            "mrf" => {
                if num_vars.is_some() || rest.len() != 1 {
                    return Err(err(line, "expected a single `mrf <n>` header"));
                }
                num_vars = Some(parse_num(line, rest[0])?);
            }
            _ if num_vars.is_none() => return Err(err(line, "missing `mrf <n>` header")),
            "clique" => {
                let vs = rest.iter().map(|t| parse_num(line, t)).collect::<Result<Vec<usize>>>()?;
                maximal.push(Clique::new(vs).map_err(|e| err(line, e.to_string()))?);
            }
            "param" => {
                let (w, vs) = rest.split_last().ok_or_else(|| err(line, "empty param line"))?;
                let vs = vs.iter().map(|t| parse_num(line, t)).collect::<Result<Vec<usize>>>()?;
                let w: F = parse_num(line, w)?;
                params.push((line, Clique::new(vs).map_err(|e| err(line, e.to_string()))?, w));
            }
            "diag" => {
                let mut d = Diagnostics {
                    converged: false,
                    iterations: 0,
                    grad_norm: 0.0,
                    seconds: 0.0,
                };
                for kv in rest {
                    let (k, v) = kv.split_once('=').ok_or_else(|| err(line, format!("bad field {kv:?}")))?;
                    match k {
                        "converged" => d.converged = parse_num::<u8>(line, v)? != 0,
                        "iters" => d.iterations = parse_num(line, v)?,
                        "gradnorm" => d.grad_norm = parse_num(line, v)?,
                        "seconds" => d.seconds = parse_num(line, v)?,
                        _ => return Err(err(line, format!("unknown field {k:?}"))),
                    }
                }
                diag = Some(d);
            }
            other => return Err(err(line, format!("unknown directive {other:?}"))),
        }
    }
    let n = num_vars.ok_or_else(|| err(0, "empty model file"))?;
    let structure = Arc::new(Structure::from_cliques(n, maximal)?);
    let mut w = vec![F::zero(); structure.cliques.num_blocks()];
    for (line, b, v) in params {
        let bi = structure
            .cliques
            .block_index(&b)
            .ok_or_else(|| err(line, format!("{:?} is not a block of the model", b.members())))?;
        w[bi] = v;
    }
    Ok((LogLinearModel::new(structure, ParameterVector(w))?, diag))
}

/// Structure-only file: the same format with `param` lines ignored.
pub fn parse_structure(text: &str) -> Result<Structure> {
    let (m, _) = parse_model::<f64>(text)?;
    Ok((**m.structure()).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_model, ModelKind};

    #[test]
    fn round_trip_is_exact() {
        let s = Arc::new(build_model(ModelKind::Grid2d, &[2, 3]).unwrap());
        let w = (0..s.cliques.num_blocks()).map(|i| (i as f64).sin() / 3.0).collect();
        let m = LogLinearModel::new(s, ParameterVector(w)).unwrap();
        let d = Diagnostics {
            converged: true,
            iterations: 7,
            grad_norm: 2.5e-7,
            seconds: 0.125,
        };
        let text = write_model(&m, Some(&d));
        let (back, dback) = parse_model::<f64>(&text).unwrap();
        assert_eq!(back.params(), m.params());
        assert_eq!(back.cliques().maximal(), m.cliques().maximal());
        assert_eq!(dback, Some(d));
        assert_eq!(write_model(&back, dback.as_ref()), text);
    }

    #[test]
    fn header_and_block_errors() {
        assert!(parse_model::<f64>("clique 0 1\n").is_err());
        assert!(parse_model::<f64>("mrf 2\nclique 0 1\nparam 0 2 1.0\n").is_err());
        match parse_model::<f64>("mrf 2\nclique 0 1\nparam 0 x\n") {
            Err(MrfError::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        let (m, d) = parse_model::<f64>("# comment\nmrf 2\n\nclique 0 1\nparam 0 1 0.5\n").unwrap();
        assert_eq!(m.params().as_slice(), &[0.0, 0.0, 0.5]);
        assert!(d.is_none());
    }
}
