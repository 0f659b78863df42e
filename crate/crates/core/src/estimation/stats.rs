use crate::error::{MrfError, Result};
use crate::inference::{marginalize, JointTable};
use crate::model::CliqueSystem;
use crate::sampling::Dataset;
use crate::scalar::Real;

/// Empirical block means `(1/N) sum_n phi_b(x_n)`, aligned with a clique
/// system's blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct SufficientStats<F> {
    pub block_means: Vec<F>,
    /// Number of samples; zero for population statistics taken from a table.
    pub n: usize,
}

/// Which data columns a clique system refers to.
#[derive(Clone, Copy, Debug)]
pub enum Scope<'a> {
    /// Variable `i` of the clique system is column `i`.
    All,
    /// Variable `i` of the clique system is column `vars[i]`.
    Vars(&'a [usize]),
}

/// One pass over `data`, reading only the columns in `scope`.
pub fn sufficient_stats<F: Real>(cliques: &CliqueSystem, data: &Dataset, scope: Scope<'_>) -> Result<SufficientStats<F>> {
    if data.is_empty() {
        return Err(MrfError::EmptyDataset);
    }
    let identity: Vec<usize>;
    let cols = match scope {
        Scope::All => {
            identity = (0..data.num_vars()).collect();
            &identity[..]
        }
        Scope::Vars(v) => v,
    };
    if cols.len() != cliques.num_vars() {
        return Err(MrfError::DimensionMismatch {
            expected: cliques.num_vars(),
            found: cols.len(),
        });
    }
    if let Some(&c) = cols.iter().find(|&&c| c >= data.num_vars()) {
        return Err(MrfError::DimensionMismatch {
            expected: data.num_vars(),
            found: c + 1,
        });
    }
    let mut counts = vec![0usize; cliques.num_blocks()];
    let mut local = vec![0u8; cols.len()];
    for x in data.samples() {
        let bits = x.bits();
        for (l, &c) in local.iter_mut().zip(cols) {
            *l = bits[c];
        }
        for (count, b) in counts.iter_mut().zip(cliques.blocks()) {
            if b.members().iter().all(|&i| local[i] == 1) {
                *count += 1;
            }
        }
    }
    let n = F::from_usize(data.len()).expect("sample count representable");
    Ok(SufficientStats {
        block_means: counts
            .into_iter()
            .map(|c| F::from_usize(c).expect("count representable") / n)
            .collect(),
        n: data.len(),
    })
}

/// Block means of the distribution itself, over the sorted variable set `scope`.
pub fn population_stats<F: Real>(cliques: &CliqueSystem, table: &JointTable<F>, scope: &[usize]) -> Result<SufficientStats<F>> {
    if cliques.num_vars() != scope.len() || scope.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MrfError::InvalidDimension(
            "population scope must be sorted and match the clique system".into(),
        ));
    }
    let marg = marginalize(table, scope)?;
    let mut sup = marg.probs().to_vec();
    for i in 0..scope.len() {
        let bit = 1usize << i;
        for x in 0..sup.len() {
            if x & bit == 0 {
                let upper = sup[x | bit];
                sup[x] += upper;
            }
        }
    }
    let block_means = cliques
        .blocks()
        .iter()
        .map(|b| sup[b.members().iter().fold(0usize, |m, &i| m | (1 << i))])
        .collect();
    Ok(SufficientStats { block_means, n: 0 })
}

/// Anything LAP workers can pull local statistics from.
///
/// `scope` lists the global variables behind the clique system's local
/// indices, in ascending order.
pub trait StatisticsSource<F: Real>: Sync {
    fn num_vars(&self) -> usize;
    fn local_stats(&self, cliques: &CliqueSystem, scope: &[usize]) -> Result<SufficientStats<F>>;
}

impl<F: Real> StatisticsSource<F> for Dataset {
    fn num_vars(&self) -> usize {
        Dataset::num_vars(self)
    }

    fn local_stats(&self, cliques: &CliqueSystem, scope: &[usize]) -> Result<SufficientStats<F>> {
        sufficient_stats(cliques, self, Scope::Vars(scope))
    }
}

impl<F: Real> StatisticsSource<F> for JointTable<F> {
    fn num_vars(&self) -> usize {
        JointTable::num_vars(self)
    }

    fn local_stats(&self, cliques: &CliqueSystem, scope: &[usize]) -> Result<SufficientStats<F>> {
        population_stats(cliques, self, scope)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn edge() -> CliqueSystem {
        CliqueSystem::from_graph(&Graph::new(2, [(0, 1)]).unwrap())
    }

    #[test]
    fn direct_counts() {
        let d = Dataset::from_rows(2, vec![vec![1, 1], vec![1, 0]]).unwrap();
        let s: SufficientStats<f64> = sufficient_stats(&edge(), &d, Scope::All).unwrap();
        assert_eq!(s.block_means, vec![1.0, 0.5, 0.5]);
        assert_eq!(s.n, 2);
        let ones = Dataset::from_rows(2, vec![vec![1, 1]; 3]).unwrap();
        let zeros = Dataset::from_rows(2, vec![vec![0, 0]; 3]).unwrap();
        let s1: SufficientStats<f64> = sufficient_stats(&edge(), &ones, Scope::All).unwrap();
        let s0: SufficientStats<f64> = sufficient_stats(&edge(), &zeros, Scope::All).unwrap();
        assert!(s1.block_means.iter().all(|&v| v == 1.0));
        assert!(s0.block_means.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scoped_columns_and_errors() {
        let d = Dataset::from_rows(3, vec![vec![0, 1, 1], vec![1, 1, 0]]).unwrap();
        let s: SufficientStats<f64> = sufficient_stats(&edge(), &d, Scope::Vars(&[1, 2])).unwrap();
        assert_eq!(s.block_means, vec![1.0, 0.5, 0.5]);
        assert!(sufficient_stats::<f64>(&edge(), &d, Scope::All).is_err());
        assert!(sufficient_stats::<f64>(&edge(), &d, Scope::Vars(&[1, 3])).is_err());
        let empty = Dataset::new(2, vec![]).unwrap();
        assert!(matches!(
            sufficient_stats::<f64>(&edge(), &empty, Scope::All),
            Err(MrfError::EmptyDataset)
        ));
    }

    #[test]
    fn population_matches_table() {
        let t = JointTable::<f64>::new(3, vec![0.1, 0.2, 0.05, 0.15, 0.1, 0.1, 0.2, 0.1]).unwrap();
        let s: SufficientStats<f64> = population_stats(&edge(), &t, &[0, 2]).unwrap();
        // p(x0=1) = .2+.15+.1+.1, p(x2=1) = .1+.1+.2+.1, p(x0=x2=1) = .1+.1
        let expect = [0.55, 0.5, 0.2];
        for (a, b) in s.block_means.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
