//! Undirected graphs over dense variable indices, cliques, and the
//! Markov graph of a marginal.

use crate::error::{MrfError, Result};
use std::collections::BTreeSet;

/// A non-empty, sorted, duplicate-free set of variable indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clique(Vec<usize>);

impl Clique {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(MrfError::InvalidClique {
                members: v,
                reason: "clique must be non-empty".into(),
            });
        }
        Ok(Clique(v))
    }

    /// Builds a clique from members that are already sorted and unique.
    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(!members.is_empty());
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Clique(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Clique) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }

    pub fn intersects(&self, other: &Clique) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Every non-empty subset, ordered by size then lexicographically.
    pub fn subsets(&self) -> Vec<Clique> {
        let k = self.0.len();
        assert!(k < 31, "subset enumeration of a {k}-clique");
        let mut out: Vec<Clique> = (1u32..(1u32 << k))
            .map(|mask| {
                Clique(
                    (0..k)
                        .filter(|&i| mask & (1 << i) != 0)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect();
        out.sort_by(block_order);
        out
    }

    /// Maps members through `map` (e.g. global → local indices).
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Clique {
        let mut v: Vec<usize> = self.0.iter().map(|&i| map(i)).collect();
        v.sort_unstable();
        Clique(v)
    }
}

/// Canonical block order: by size, then lexicographic.
pub fn block_order(a: &Clique, b: &Clique) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0))
}

pub(crate) fn is_sorted_subset(small: &[usize], big: &[usize]) -> bool {
    let mut j = 0;
    for &s in small {
        while j < big.len() && big[j] < s {
            j += 1;
        }
        if j == big.len() || big[j] != s {
            return false;
        }
        j += 1;
    }
    true
}

/// Simple undirected graph; neighbor lists are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(num_vars: usize, edges: I) -> Result<Self> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); num_vars];
        for (u, v) in edges {
            if u >= num_vars || v >= num_vars {
                return Err(MrfError::InvalidGraph(format!(
                    "edge ({u}, {v}) outside 0..{num_vars}"
                )));
            }
            if u == v {
                return Err(MrfError::InvalidGraph(format!("self-loop on {u}")));
            }
            adj[u].insert(v);
            adj[v].insert(u);
        }
        Ok(Graph {
            adjacency: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn empty(num_vars: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_vars() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_clique(&self, members: &[usize]) -> bool {
        members.iter().all(|&v| v < self.num_vars())
            && members
                .iter()
                .enumerate()
                .all(|(i, &u)| members[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_vars();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Subgraph induced by `keep` (sorted, unique); vertex `i` of the result is `keep[i]`.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let local = local_index(self.num_vars(), keep);
        let adjacency = keep
            .iter()
            .map(|&u| {
                self.adjacency[u]
                    .iter()
                    .filter_map(|&v| local[v])
                    .collect()
            })
            .collect();
        Graph { adjacency }
    }

    /// All maximal cliques (Bron–Kerbosch with pivoting), each sorted, the list
    /// sorted lexicographically. Isolated vertices yield singleton cliques.
    pub fn maximal_cliques(&self) -> Vec<Clique> {
        let mut out = Vec::new();
        let all: BTreeSet<usize> = (0..self.num_vars()).collect();
        self.bron_kerbosch(&mut Vec::new(), all, BTreeSet::new(), &mut out);
        out.sort();
        out
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        mut p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        out: &mut Vec<Clique>,
    ) {
        if p.is_empty() && x.is_empty() {
            if !r.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(Clique(c));
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| {
                self.adjacency[u]
                    .iter()
                    .filter(|v| p.contains(v))
                    .count()
            })
            .expect("p or x non-empty");
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|v| !self.has_edge(pivot, *v))
            .collect();
        for v in candidates {
            let nv: BTreeSet<usize> = self.adjacency[v].iter().copied().collect();
            r.push(v);
            self.bron_kerbosch(
                r,
                p.intersection(&nv).copied().collect(),
                x.intersection(&nv).copied().collect(),
                out,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }
}

pub(crate) fn local_index(num_vars: usize, keep: &[usize]) -> Vec<Option<usize>> {
    let mut local = vec![None; num_vars];
    for (i, &v) in keep.iter().enumerate() {
        local[v] = Some(i);
    }
    local
}

pub(crate) fn normalize_var_set(num_vars: usize, vars: &[usize]) -> Result<Vec<usize>> {
    let mut v = vars.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&x| x >= num_vars) {
        return Err(MrfError::InvalidGraph(format!(
            "variable {bad} outside 0..{num_vars}"
        )));
    }
    Ok(v)
}

/// Markov graph of the marginal over `keep`.
///
/// Kept vertices `u`, `v` are adjacent iff they are adjacent in `graph` or
/// some path joins them whose interior lies entirely outside `keep`. The
/// result is indexed locally: vertex `i` is the `i`-th smallest element of
/// `keep`.
pub fn marginal_graph(graph: &Graph, keep: &[usize]) -> Result<Graph> {
    let keep = normalize_var_set(graph.num_vars(), keep)?;
    let n = graph.num_vars();
    let local = local_index(n, &keep);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, v) in graph.edges() {
        if let (Some(a), Some(b)) = (local[u], local[v]) {
            edges.push((a, b));
        }
    }
    // Every connected component of the exterior joins all kept vertices on its boundary.
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] || local[start].is_some() {
            continue;
        }
        let mut boundary = BTreeSet::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &v in graph.neighbors(u) {
                if let Some(lv) = local[v] {
                    boundary.insert(lv);
                } else if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        let b: Vec<usize> = boundary.into_iter().collect();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                edges.push((b[i], b[j]));
            }
        }
    }
    Graph::new(keep.len(), edges)
}
