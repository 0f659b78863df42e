//! Clique systems and the zero-normalized log-linear parameterization.
//!
//! Every parameter-carrying block `b` has the feature `prod_{i in b} x_i`,
//! which vanishes whenever any member is zero. Blocks are all non-empty
//! subsets of the maximal cliques.

use crate::error::{MrfError, Result};
use crate::graph::{block_order, Clique, Graph};
use crate::scalar::Real;
use std::collections::HashMap;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct CliqueSystem {
    num_vars: usize,
    maximal: Vec<Clique>,
    blocks: Vec<Clique>,
    owner: Vec<usize>,
    index: HashMap<Clique, usize>,
    var_blocks: Vec<Vec<usize>>,
}

impl CliqueSystem {
    /// Builds the system from factorization cliques.
    ///
    /// Each clique must be complete in `graph`. Duplicates and cliques
    /// contained in another listed clique are dropped; variables not covered
    /// by any clique receive a singleton clique.
    pub fn from_maximal(graph: &Graph, cliques: Vec<Clique>) -> Result<Self> {
        let n = graph.num_vars();
        for c in &cliques {
            if !graph.is_clique(c.members()) {
                return Err(MrfError::InvalidClique {
                    members: c.members().to_vec(),
                    reason: "members are not pairwise adjacent".into(),
                });
            }
        }
        let mut cliques = cliques;
        cliques.sort();
        cliques.dedup();
        let mut maximal: Vec<Clique> = cliques
            .iter()
            .filter(|c| {
                !cliques
                    .iter()
                    .any(|d| d.len() > c.len() && c.is_subset_of(d))
            })
            .cloned()
            .collect();
        let mut covered = vec![false; n];
        for c in &maximal {
            for &v in c.members() {
                covered[v] = true;
            }
        }
        for (v, _) in covered.iter().enumerate().filter(|(_, &c)| !c) {
            maximal.push(Clique::from_sorted(vec![v]));
        }
        maximal.sort();

        let mut blocks: Vec<Clique> = maximal.iter().flat_map(Clique::subsets).collect();
        blocks.sort_by(block_order);
        blocks.dedup();

        let mut var_cliques: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (ci, c) in maximal.iter().enumerate() {
            for &v in c.members() {
                var_cliques[v].push(ci);
            }
        }
        // maximal is sorted, so the first containing clique is the lexicographically smallest
        let owner = blocks
            .iter()
            .map(|b| {
                var_cliques[b.members()[0]]
                    .iter()
                    .copied()
                    .find(|&ci| b.is_subset_of(&maximal[ci]))
                    .expect("block lies in some maximal clique")
            })
            .collect();

        let index = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        let mut var_blocks = vec![Vec::new(); n];
        for (bi, b) in blocks.iter().enumerate() {
            for &v in b.members() {
                var_blocks[v].push(bi);
            }
        }
        Ok(CliqueSystem {
            num_vars: n,
            maximal,
            blocks,
            owner,
            index,
            var_blocks,
        })
    }

    /// Clique system whose factorization cliques are the graph's maximal cliques.
    pub fn from_graph(graph: &Graph) -> Self {
        Self::from_maximal(graph, graph.maximal_cliques()).expect("maximal cliques are complete")
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn maximal(&self) -> &[Clique] {
        &self.maximal
    }

    pub fn blocks(&self) -> &[Clique] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Index into [`maximal`](Self::maximal) of the clique owning block `b`.
    pub fn owner(&self, block: usize) -> usize {
        self.owner[block]
    }

    pub fn block_index(&self, block: &Clique) -> Option<usize> {
        self.index.get(block).copied()
    }

    pub fn maximal_index(&self, clique: &Clique) -> Option<usize> {
        self.maximal.binary_search(clique).ok()
    }

    /// Indices of blocks that contain variable `v`.
    pub fn blocks_containing(&self, v: usize) -> &[usize] {
        &self.var_blocks[v]
    }

    pub fn is_pairwise(&self) -> bool {
        self.maximal.iter().all(|c| c.len() <= 2)
    }
}

/// Graph plus clique system; shared between models with different weights.
#[derive(Clone, Debug)]
pub struct Structure {
    pub graph: Graph,
    pub cliques: CliqueSystem,
}

impl Structure {
    pub fn new(graph: Graph, cliques: CliqueSystem) -> Result<Self> {
        if graph.num_vars() != cliques.num_vars() {
            return Err(MrfError::DimensionMismatch {
                expected: graph.num_vars(),
                found: cliques.num_vars(),
            });
        }
        Ok(Structure { graph, cliques })
    }

    pub fn from_graph(graph: Graph) -> Self {
        let cliques = CliqueSystem::from_graph(&graph);
        Structure { graph, cliques }
    }

    /// Graph whose edges are exactly the pairs covered by `maximal`.
    pub fn from_cliques(num_vars: usize, maximal: Vec<Clique>) -> Result<Self> {
        let mut edges = Vec::new();
        for c in &maximal {
            let m = c.members();
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    edges.push((m[i], m[j]));
                }
            }
        }
        let graph = Graph::new(num_vars, edges)?;
        let cliques = CliqueSystem::from_maximal(&graph, maximal)?;
        Ok(Structure { graph, cliques })
    }

    pub fn num_vars(&self) -> usize {
        self.graph.num_vars()
    }

    /// Union of all maximal cliques intersecting `q`.
    pub fn one_neighborhood(&self, q: &Clique) -> Result<Vec<usize>> {
        one_neighborhood(&self.cliques, q)
    }
}

/// `A_q`: union of the maximal cliques that intersect the maximal clique `q`.
pub fn one_neighborhood(cliques: &CliqueSystem, q: &Clique) -> Result<Vec<usize>> {
    if cliques.maximal_index(q).is_none() {
        return Err(MrfError::InvalidClique {
            members: q.members().to_vec(),
            reason: "not a maximal clique of the system".into(),
        });
    }
    let mut vars: Vec<usize> = cliques
        .maximal()
        .iter()
        .filter(|c| c.intersects(q))
        .flat_map(|c| c.members().iter().copied())
        .collect();
    vars.sort_unstable();
    vars.dedup();
    Ok(vars)
}

/// One weight per block, aligned with [`CliqueSystem::blocks`].
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterVector<F>(pub Vec<F>);

impl<F: Real> ParameterVector<F> {
    pub fn zeros(len: usize) -> Self {
        ParameterVector(vec![F::zero(); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }

    pub fn get(&self, cliques: &CliqueSystem, block: &Clique) -> Option<F> {
        cliques.block_index(block).map(|i| self.0[i])
    }
}

impl<F> Index<usize> for ParameterVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.0[i]
    }
}

impl<F> IndexMut<usize> for ParameterVector<F> {
    fn index_mut(&mut self, i: usize) -> &mut F {
        &mut self.0[i]
    }
}

/// Binary assignment to every variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<u8>);

impl Configuration {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(MrfError::InvalidDimension(format!("configuration entry {b} is not a bit")));
        }
        Ok(Configuration(bits))
    }

    pub fn zeros(n: usize) -> Self {
        Configuration(vec![0; n])
    }

    /// Bit `i` of `mask` becomes variable `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Configuration((0..n).map(|i| ((mask >> i) & 1) as u8).collect())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `prod_{i in block} x_i`.
    pub fn feature(&self, block: &Clique) -> bool {
        block.members().iter().all(|&i| self.0[i] == 1)
    }

    pub(crate) fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

#[derive(Clone, Debug)]
pub struct LogLinearModel<F> {
    structure: Arc<Structure>,
    params: ParameterVector<F>,
}

impl<F: Real> LogLinearModel<F> {
    pub fn new(structure: Arc<Structure>, params: ParameterVector<F>) -> Result<Self> {
        if params.len() != structure.cliques.num_blocks() {
            return Err(MrfError::DimensionMismatch {
                expected: structure.cliques.num_blocks(),
                found: params.len(),
            });
        }
        if params.0.iter().any(|w| !w.is_finite()) {
            return Err(MrfError::NumericalFailure {
                point: params.0.iter().map(|w| w.to_f64_lossy()).collect(),
            });
        }
        Ok(LogLinearModel { structure, params })
    }

    pub fn zeros(structure: Arc<Structure>) -> Self {
        let n = structure.cliques.num_blocks();
        LogLinearModel {
            structure,
            params: ParameterVector::zeros(n),
        }
    }

    pub fn structure(&self) -> &Arc<Structure> {
        &self.structure
    }

    pub fn graph(&self) -> &Graph {
        &self.structure.graph
    }

    pub fn cliques(&self) -> &CliqueSystem {
        &self.structure.cliques
    }

    pub fn params(&self) -> &ParameterVector<F> {
        &self.params
    }

    pub fn num_vars(&self) -> usize {
        self.structure.num_vars()
    }

    pub fn weight(&self, block: &Clique) -> Option<F> {
        self.params.get(self.cliques(), block)
    }

    /// Same structure, new weights. Weights are not validated here; callers
    /// inside the optimizer handle non-finite values themselves.
    pub(crate) fn with_weights(&self, weights: &[F]) -> Self {
        LogLinearModel {
            structure: Arc::clone(&self.structure),
            params: ParameterVector(weights.to_vec()),
        }
    }

    /// `-sum_b w_b phi_b(x)`.
    pub fn energy(&self, x: &Configuration) -> Result<F> {
        if x.len() != self.num_vars() {
            return Err(MrfError::DimensionMismatch {
                expected: self.num_vars(),
                found: x.len(),
            });
        }
        let s: F = self
            .cliques()
            .blocks()
            .iter()
            .zip(&self.params.0)
            .filter(|(b, _)| x.feature(b))
            .map(|(_, &w)| w)
            .sum();
        Ok(-s)
    }

    /// Sum of weights of blocks containing `m` whose other members are all one.
    pub(crate) fn local_field(&self, x: &[u8], m: usize) -> F {
        let cliques = self.cliques();
        let mut delta = F::zero();
        for &bi in cliques.blocks_containing(m) {
            if cliques.blocks()[bi]
                .members()
                .iter()
                .all(|&i| i == m || x[i] == 1)
            {
                delta += self.params.0[bi];
            }
        }
        delta
    }
}
