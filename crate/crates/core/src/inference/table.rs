use crate::error::{MrfError, Result};
use crate::graph::{normalize_var_set, Clique};
use crate::model::{one_neighborhood, CliqueSystem, Configuration, LogLinearModel};
use crate::scalar::{log_sum_exp, Real};

/// Full probability table; bit `i` of an index is variable `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable<F> {
    num_vars: usize,
    probs: Vec<F>,
}

impl<F: Real> JointTable<F> {
    pub fn new(num_vars: usize, probs: Vec<F>) -> Result<Self> {
        if num_vars >= usize::BITS as usize || probs.len() != 1 << num_vars {
            return Err(MrfError::DimensionMismatch {
                expected: 1usize.checked_shl(num_vars as u32).unwrap_or(0),
                found: probs.len(),
            });
        }
        Ok(JointTable { num_vars, probs })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn prob(&self, x: &Configuration) -> F {
        let idx = x
            .bits()
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, &b)| m | ((b as usize) << i));
        self.probs[idx]
    }

    pub(crate) fn check_positive(&self) -> Result<()> {
        match self.probs.iter().position(|&p| p.is_nan() || p <= F::zero()) {
            Some(index) => Err(MrfError::NotPositive {
                index,
                value: self.probs[index].to_f64_lossy(),
            }),
            None => Ok(()),
        }
    }
}

/// Normalized table of a model, by direct energy evaluation of every configuration.
pub fn joint_table<F: Real>(model: &LogLinearModel<F>, cap: usize) -> Result<JointTable<F>> {
    let n = model.num_vars();
    if n > cap || n > 30 {
        return Err(MrfError::TooLarge { num_vars: n, cap });
    }
    let masks: Vec<usize> = model
        .cliques()
        .blocks()
        .iter()
        .map(|b| b.members().iter().fold(0usize, |m, &i| m | (1 << i)))
        .collect();
    let w = model.params().as_slice();
    let log_w: Vec<F> = (0..1usize << n)
        .map(|x| {
            masks
                .iter()
                .zip(w)
                .filter(|(&m, _)| x & m == m)
                .map(|(_, &v)| v)
                .sum()
        })
        .collect();
    let lz = log_sum_exp(&log_w);
    JointTable::new(n, log_w.into_iter().map(|l| (l - lz).exp()).collect())
}

/// Exact marginal over `keep`; bit `j` of the result is the `j`-th smallest kept variable.
pub fn marginalize<F: Real>(table: &JointTable<F>, keep: &[usize]) -> Result<JointTable<F>> {
    let keep = normalize_var_set(table.num_vars, keep)?;
    let mut out = vec![F::zero(); 1 << keep.len()];
    for (x, &p) in table.probs.iter().enumerate() {
        let idx = keep
            .iter()
            .enumerate()
            .fold(0usize, |m, (j, &v)| m | (((x >> v) & 1) << j));
        out[idx] += p;
    }
    JointTable::new(keep.len(), out)
}

/// Zero-normalized potentials of a positive table, one per subset of variables.
#[derive(Clone, Debug)]
pub struct SubsetPotentials<F> {
    num_vars: usize,
    /// Indexed by subset mask; entry 0 holds `log p(0)`.
    weights: Vec<F>,
}

impl<F: Real> SubsetPotentials<F> {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn by_mask(&self, mask: usize) -> F {
        self.weights[mask]
    }

    pub fn get(&self, subset: &Clique) -> F {
        let mask = subset.members().iter().fold(0usize, |m, &i| m | (1 << i));
        self.weights[mask]
    }

    pub fn log_p_zero(&self) -> F {
        self.weights[0]
    }

    /// `(mask, weight)` over non-empty subsets.
    pub fn iter(&self) -> impl Iterator<Item = (usize, F)> + '_ {
        self.weights.iter().copied().enumerate().skip(1)
    }
}

/// Möbius inversion of `log p` over the subset lattice:
/// `w(b) = sum_{a ⊆ b} (-1)^{|b \ a|} log p(1_a)`.
pub fn mobius_potentials<F: Real>(table: &JointTable<F>) -> Result<SubsetPotentials<F>> {
    table.check_positive()?;
    let n = table.num_vars;
    let mut w: Vec<F> = table.probs.iter().map(|p| p.ln()).collect();
    for i in 0..n {
        let bit = 1usize << i;
        for x in 0..w.len() {
            if x & bit != 0 {
                let lower = w[x ^ bit];
                w[x] -= lower;
            }
        }
    }
    Ok(SubsetPotentials { num_vars: n, weights: w })
}

/// `p(x_A) p(x_{S\q}) / p(x_{A\q})` with `A` the one-neighborhood of `q`.
pub fn explicit_ml_estimate<F: Real>(
    table: &JointTable<F>,
    q: &Clique,
    cliques: &CliqueSystem,
) -> Result<JointTable<F>> {
    table.check_positive()?;
    let n = table.num_vars;
    if cliques.num_vars() != n {
        return Err(MrfError::DimensionMismatch {
            expected: n,
            found: cliques.num_vars(),
        });
    }
    let a = one_neighborhood(cliques, q)?;
    let not_q: Vec<usize> = (0..n).filter(|v| !q.contains(*v)).collect();
    let a_not_q: Vec<usize> = a.iter().copied().filter(|v| !q.contains(*v)).collect();
    let parts = [
        (marginalize(table, &a)?, a),
        (marginalize(table, &not_q)?, not_q),
        (marginalize(table, &a_not_q)?, a_not_q),
    ];
    let sub = |x: usize, vars: &[usize]| {
        vars.iter()
            .enumerate()
            .fold(0usize, |m, (j, &v)| m | (((x >> v) & 1) << j))
    };
    let probs = (0..1usize << n)
        .map(|x| {
            parts[0].0.probs[sub(x, &parts[0].1)] * parts[1].0.probs[sub(x, &parts[1].1)]
                / parts[2].0.probs[sub(x, &parts[2].1)]
        })
        .collect();
    JointTable::new(n, probs)
}
