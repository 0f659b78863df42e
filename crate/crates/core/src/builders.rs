//! Topologies used in the experiments: chains, 2-D and 3-D lattices,
//! Chimera lattices and restricted Boltzmann machines.

use crate::error::{MrfError, Result};
use crate::graph::{Clique, Graph};
use crate::model::{CliqueSystem, Structure};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `chain(n)`
    Chain,
    /// `grid2d(rows, cols)`, 4-neighborhoods, row-major indices.
    Grid2d,
    /// `grid3d(x, y, z)`, 6-neighborhoods, index `(i*y + j)*z + k`.
    Grid3d,
    /// `chimera(m, n, l)`: `m x n` cells of `K_{l,l}`.
    Chimera,
    /// `rbm(visible, hidden)`: complete bipartite.
    Rbm,
}

impl ModelKind {
    pub fn arity(self) -> usize {
        match self {
            ModelKind::Chain => 1,
            ModelKind::Grid2d | ModelKind::Rbm => 2,
            ModelKind::Grid3d | ModelKind::Chimera => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Chain => "chain",
            ModelKind::Grid2d => "grid2d",
            ModelKind::Grid3d => "grid3d",
            ModelKind::Chimera => "chimera",
            ModelKind::Rbm => "rbm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = MrfError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "chain" => ModelKind::Chain,
            "grid2d" => ModelKind::Grid2d,
            "grid3d" => ModelKind::Grid3d,
            "chimera" => ModelKind::Chimera,
            "rbm" => ModelKind::Rbm,
            other => return Err(MrfError::InvalidDimension(format!("unknown model kind {other:?}"))),
        })
    }
}

/// Builds the named topology. Maximal cliques are the edges (or a singleton
/// for a lone vertex); blocks are all singletons and edges.
pub fn build_model(kind: ModelKind, dims: &[usize]) -> Result<Structure> {
    if dims.len() != kind.arity() {
        return Err(MrfError::InvalidDimension(format!(
            "{kind} takes {} dimension(s), got {}",
            kind.arity(),
            dims.len()
        )));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 1) {
        return Err(MrfError::InvalidDimension(format!("{kind} dimension {d} < 1")));
    }
    let (n, edges) = match kind {
        ModelKind::Chain => chain_edges(dims[0]),
        ModelKind::Grid2d => grid2d_edges(dims[0], dims[1]),
        ModelKind::Grid3d => grid3d_edges(dims[0], dims[1], dims[2]),
        ModelKind::Chimera => chimera_edges(dims[0], dims[1], dims[2]),
        ModelKind::Rbm => rbm_edges(dims[0], dims[1]),
    };
    let graph = Graph::new(n, edges.iter().copied())?;
    let maximal = edges
        .iter()
        .map(|&(u, v)| Clique::new([u, v]))
        .collect::<Result<Vec<_>>>()?;
    let cliques = CliqueSystem::from_maximal(&graph, maximal)?;
    Structure::new(graph, cliques)
}

fn chain_edges(n: usize) -> (usize, Vec<(usize, usize)>) {
    (n, (1..n).map(|i| (i - 1, i)).collect())
}

fn grid2d_edges(r: usize, c: usize) -> (usize, Vec<(usize, usize)>) {
    let mut e = Vec::new();
    for i in 0..r {
        for j in 0..c {
            let v = i * c + j;
            if j + 1 < c {
                e.push((v, v + 1));
            }
            if i + 1 < r {
                e.push((v, v + c));
            }
        }
    }
    (r * c, e)
}

fn grid3d_edges(x: usize, y: usize, z: usize) -> (usize, Vec<(usize, usize)>) {
    let idx = |i: usize, j: usize, k: usize| (i * y + j) * z + k;
    let mut e = Vec::new();
    for i in 0..x {
        for j in 0..y {
            for k in 0..z {
                let v = idx(i, j, k);
                if k + 1 < z {
                    e.push((v, idx(i, j, k + 1)));
                }
                if j + 1 < y {
                    e.push((v, idx(i, j + 1, k)));
                }
                if i + 1 < x {
                    e.push((v, idx(i + 1, j, k)));
                }
            }
        }
    }
    (x * y * z, e)
}

/// Cell `(i, j)` occupies indices `base..base + 2l` with `base = (i*n + j)*2l`;
/// the first `l` are the "vertical" side, coupled to the same position in the
/// cell below, the last `l` the "horizontal" side, coupled to the cell to the right.
fn chimera_edges(m: usize, n: usize, l: usize) -> (usize, Vec<(usize, usize)>) {
    let base = |i: usize, j: usize| (i * n + j) * 2 * l;
    let mut e = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let b = base(i, j);
            for a in 0..l {
                for c in 0..l {
                    e.push((b + a, b + l + c));
                }
            }
            for k in 0..l {
                if i + 1 < m {
                    e.push((b + k, base(i + 1, j) + k));
                }
                if j + 1 < n {
                    e.push((b + l + k, base(i, j + 1) + l + k));
                }
            }
        }
    }
    (m * n * 2 * l, e)
}

fn rbm_edges(v: usize, h: usize) -> (usize, Vec<(usize, usize)>) {
    let e = (0..v).flat_map(|a| (0..h).map(move |b| (a, v + b))).collect();
    (v + h, e)
}
