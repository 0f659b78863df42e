use super::InferenceResult;
use crate::error::{MrfError, Result};
use crate::graph::Graph;
use crate::model::LogLinearModel;
use crate::scalar::Real;
use std::collections::BTreeSet;

/// Log-space table over a sorted scope; bit `j` of an index is `scope[j]`.
#[derive(Clone, Debug)]
struct LogFactor<F> {
    scope: Vec<usize>,
    table: Vec<F>,
}

fn positions(sub: &[usize], sup: &[usize]) -> Vec<usize> {
    sub.iter()
        .map(|v| sup.binary_search(v).expect("sub-scope within scope"))
        .collect()
}

#[inline]
fn project(idx: usize, pos: &[usize]) -> usize {
    pos.iter()
        .enumerate()
        .fold(0, |acc, (j, &p)| acc | (((idx >> p) & 1) << j))
}

fn combine<F: Real>(factors: &[LogFactor<F>], scope: &[usize]) -> Vec<F> {
    let mut table = vec![F::zero(); 1 << scope.len()];
    for f in factors {
        let pos = positions(&f.scope, scope);
        for (idx, t) in table.iter_mut().enumerate() {
            *t += f.table[project(idx, &pos)];
        }
    }
    table
}

/// Log-sum-exp of `table` (over `scope`) down to `target` ⊆ `scope`.
fn marginalize_to<F: Real>(table: &[F], scope: &[usize], target: &[usize]) -> Vec<F> {
    let pos = positions(target, scope);
    let mut max = vec![F::neg_infinity(); 1 << target.len()];
    for (idx, &v) in table.iter().enumerate() {
        let o = project(idx, &pos);
        if v > max[o] {
            max[o] = v;
        }
    }
    let mut acc = vec![F::zero(); max.len()];
    for (idx, &v) in table.iter().enumerate() {
        let o = project(idx, &pos);
        acc[o] += (v - max[o]).exp();
    }
    acc.iter().zip(&max).map(|(&a, &m)| m + a.ln()).collect()
}

/// Greedy min-fill elimination order; ties go to the lowest variable index.
pub fn min_fill_order(graph: &Graph) -> Vec<usize> {
    let n = graph.num_vars();
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|v| graph.neighbors(v).iter().copied().collect())
        .collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let ns: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    if !adj[ns[i]].contains(&ns[j]) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("a live vertex remains");
        let ns: Vec<usize> = adj[v].iter().copied().collect();
        for i in 0..ns.len() {
            for j in i + 1..ns.len() {
                adj[ns[i]].insert(ns[j]);
                adj[ns[j]].insert(ns[i]);
            }
        }
        for &u in &ns {
            adj[u].remove(&v);
        }
        adj[v].clear();
        alive[v] = false;
        order.push(v);
    }
    order
}

struct Bucket<F> {
    scope: Vec<usize>,
    separator: Vec<usize>,
    /// Bucket potential: original factors plus incoming messages.
    potential: Vec<F>,
    message: Vec<F>,
    parent: Option<usize>,
}

/// Exact inference by bucket elimination along `order`, followed by a
/// downward pass that calibrates every bucket so block expectations can be
/// read from the bucket holding the block's owning factor.
pub fn variable_elimination<F: Real>(
    model: &LogLinearModel<F>,
    order: &[usize],
    max_table_entries: usize,
) -> Result<InferenceResult<F>> {
    let n = model.num_vars();
    let mut position = vec![usize::MAX; n];
    if order.len() != n {
        return Err(MrfError::DimensionMismatch {
            expected: n,
            found: order.len(),
        });
    }
    for (k, &v) in order.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return Err(MrfError::InvalidDimension(format!(
                "elimination order is not a permutation (variable {v})"
            )));
        }
        position[v] = k;
    }
    let check_width = |k: usize| -> Result<()> {
        if k >= usize::BITS as usize - 1 || (1usize << k) > max_table_entries {
            Err(MrfError::WidthExceeded {
                bucket_vars: k,
                cap_entries: max_table_entries,
            })
        } else {
            Ok(())
        }
    };

    let cliques = model.cliques();
    let weights = model.params().as_slice();
    let mut pending: Vec<Vec<LogFactor<F>>> = (0..n).map(|_| Vec::new()).collect();
    let mut factor_bucket = vec![0usize; cliques.maximal().len()];
    for (ci, c) in cliques.maximal().iter().enumerate() {
        check_width(c.len())?;
        let scope = c.members().to_vec();
        let mut table = vec![F::zero(); 1 << scope.len()];
        for (bi, b) in cliques.blocks().iter().enumerate() {
            if cliques.owner(bi) != ci {
                continue;
            }
            let mask = positions(b.members(), &scope)
                .iter()
                .fold(0usize, |m, &p| m | (1 << p));
            for (a, t) in table.iter_mut().enumerate() {
                if a & mask == mask {
                    *t += weights[bi];
                }
            }
        }
        let k = scope.iter().map(|&v| position[v]).min().expect("non-empty clique");
        factor_bucket[ci] = k;
        pending[k].push(LogFactor { scope, table });
    }

    let mut buckets: Vec<Bucket<F>> = Vec::with_capacity(n);
    let mut log_z = F::zero();
    for (k, &var) in order.iter().enumerate() {
        let factors = std::mem::take(&mut pending[k]);
        let mut scope_set: BTreeSet<usize> = factors.iter().flat_map(|f| f.scope.iter().copied()).collect();
        scope_set.insert(var);
        let scope: Vec<usize> = scope_set.into_iter().collect();
        check_width(scope.len())?;
        let potential = combine(&factors, &scope);
        let separator: Vec<usize> = scope.iter().copied().filter(|&v| v != var).collect();
        let message = marginalize_to(&potential, &scope, &separator);
        let parent = separator.iter().map(|&v| position[v]).min();
        match parent {
            Some(p) => pending[p].push(LogFactor {
                scope: separator.clone(),
                table: message.clone(),
            }),
            None => log_z += message[0],
        }
        buckets.push(Bucket {
            scope,
            separator,
            potential,
            message,
            parent,
        });
    }

    // Downward pass: normalized log-beliefs per bucket.
    let mut beliefs: Vec<Vec<F>> = vec![Vec::new(); n];
    for k in (0..n).rev() {
        let b = &buckets[k];
        let mut belief = b.potential.clone();
        if let Some(p) = b.parent {
            let parent_marg = marginalize_to(&beliefs[p], &buckets[p].scope, &b.separator);
            let pos = positions(&b.separator, &b.scope);
            for (idx, v) in belief.iter_mut().enumerate() {
                let s = project(idx, &pos);
                *v += parent_marg[s] - b.message[s];
            }
        }
        let norm = crate::scalar::log_sum_exp(&belief);
        for v in belief.iter_mut() {
            *v -= norm;
        }
        beliefs[k] = belief;
    }

    let feature_means = cliques
        .blocks()
        .iter()
        .enumerate()
        .map(|(bi, block)| {
            let k = factor_bucket[cliques.owner(bi)];
            let scope = &buckets[k].scope;
            let mask = positions(block.members(), scope)
                .iter()
                .fold(0usize, |m, &p| m | (1 << p));
            let mean: F = beliefs[k]
                .iter()
                .enumerate()
                .filter(|(a, _)| a & mask == mask)
                .map(|(_, &l)| l.exp())
                .sum();
            mean.max(F::zero()).min(F::one())
        })
        .collect();
    Ok(InferenceResult { log_z, feature_means })
}
