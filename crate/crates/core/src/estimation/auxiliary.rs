use crate::error::{MrfError, Result};
use crate::graph::{local_index, marginal_graph, Clique};
use crate::model::{one_neighborhood, Structure};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

/// Largest clique a strategy may add on the neighborhood boundary.
pub const MAX_INDUCED_CLIQUE: usize = 20;

/// How the auxiliary model parameterizes `A_q \ q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Cliques of the marginal's Markov graph on the boundary, fully parameterized.
    Exact,
    /// One fully parameterized clique over the whole boundary.
    Dense,
    /// Unary and pairwise terms over the boundary.
    Pairwise,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exact => "exact",
            Strategy::Dense => "dense",
            Strategy::Pairwise => "pairwise",
        })
    }
}

impl FromStr for Strategy {
    type Err = MrfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "dense" => Ok(Strategy::Dense),
            "pairwise" => Ok(Strategy::Pairwise),
            other => Err(MrfError::InvalidDimension(format!("unknown strategy {other:?}"))),
        }
    }
}

/// The auxiliary model for one maximal clique `q`, over `A_q`.
///
/// Local variable `i` is global variable `variables[i]`.
#[derive(Clone, Debug)]
pub struct AuxiliarySpec {
    pub q: Clique,
    pub variables: Vec<usize>,
    pub structure: Arc<Structure>,
    /// For each local block, the joint-model block it coincides with, if any.
    pub block_map: Vec<Option<usize>>,
    pub strategy: Strategy,
}

impl AuxiliarySpec {
    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Local block indices whose global image lies inside `q`, paired with the global index.
    pub fn clique_blocks(&self) -> Vec<(usize, usize)> {
        self.structure
            .cliques
            .blocks()
            .iter()
            .enumerate()
            .filter_map(|(li, b)| {
                let inside = b.members().iter().all(|&i| self.q.contains(self.variables[i]));
                match (inside, self.block_map[li]) {
                    (true, Some(g)) => Some((li, g)),
                    _ => None,
                }
            })
            .collect()
    }

    /// Blocks not present in the joint model.
    pub fn induced_blocks(&self) -> Vec<Clique> {
        self.structure
            .cliques
            .blocks()
            .iter()
            .zip(&self.block_map)
            .filter(|(_, m)| m.is_none())
            .map(|(b, _)| b.relabel(|i| self.variables[i]))
            .collect()
    }
}

/// Builds `M_q`: every joint-model block inside `A_q`, plus strategy-induced
/// blocks on `A_q \ q`.
pub fn build_auxiliary(structure: &Structure, q: &Clique, strategy: Strategy) -> Result<AuxiliarySpec> {
    let cliques = &structure.cliques;
    let variables = one_neighborhood(cliques, q)?;
    let local = local_index(structure.num_vars(), &variables);
    let to_local = |v: usize| local[v].expect("variable inside neighborhood");

    let mut local_cliques: Vec<Clique> = Vec::new();
    for c in cliques.maximal() {
        let inside: Vec<usize> = c.members().iter().copied().filter(|&v| local[v].is_some()).collect();
        if !inside.is_empty() {
            local_cliques.push(Clique::from_sorted(inside).relabel(to_local));
        }
    }

    let boundary: Vec<usize> = (0..variables.len())
        .filter(|&i| !q.contains(variables[i]))
        .collect();
    let induced: Vec<Clique> = match strategy {
        _ if boundary.is_empty() => Vec::new(),
        Strategy::Exact => {
            let marginal = marginal_graph(&structure.graph, &variables)?;
            marginal
                .induced(&boundary)
                .maximal_cliques()
                .into_iter()
                .map(|c| c.relabel(|i| boundary[i]))
                .collect()
        }
        Strategy::Dense => vec![Clique::from_sorted(boundary.clone())],
        Strategy::Pairwise => {
            let mut v = Vec::new();
            for (k, &a) in boundary.iter().enumerate() {
                v.push(Clique::from_sorted(vec![a]));
                for &b in &boundary[k + 1..] {
                    v.push(Clique::from_sorted(vec![a, b]));
                }
            }
            v
        }
    };
    if let Some(big) = induced.iter().find(|c| c.len() > MAX_INDUCED_CLIQUE) {
        return Err(MrfError::TooLarge {
            num_vars: big.len(),
            cap: MAX_INDUCED_CLIQUE,
        });
    }
    local_cliques.extend(induced);

    let local_structure = Structure::from_cliques(variables.len(), local_cliques)?;
    let block_map = local_structure
        .cliques
        .blocks()
        .iter()
        .map(|b| cliques.block_index(&b.relabel(|i| variables[i])))
        .collect();
    Ok(AuxiliarySpec {
        q: q.clone(),
        variables,
        structure: Arc::new(local_structure),
        block_map,
        strategy,
    })
}
