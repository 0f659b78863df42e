//! Limited-memory BFGS ascent for smooth concave objectives.

use crate::error::{MrfError, Result};
use crate::scalar::Real;
use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    /// Stop once the gradient infinity-norm is at or below this.
    pub tol_grad_inf: f64,
    pub max_iters: usize,
    /// Number of correction pairs kept for the inverse-Hessian estimate.
    pub memory: usize,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Wolfe curvature constant.
    pub curvature: f64,
    pub max_line_search_steps: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            tol_grad_inf: 1e-6,
            max_iters: 10_000,
            memory: 10,
            sufficient_decrease: 1e-4,
            curvature: 0.9,
            max_line_search_steps: 60,
        }
    }
}

impl OptimizerConfig {
    pub fn with_tol(tol_grad_inf: f64) -> Self {
        OptimizerConfig {
            tol_grad_inf,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    IterationLimit,
    /// No acceptable step along steepest ascent; usually roundoff at the optimum.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct Optimum<F> {
    pub x: Vec<F>,
    pub value: F,
    pub grad_inf_norm: F,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Objective value at each accepted iterate, starting with `x0`.
    pub trace: Vec<F>,
}

fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn inf_norm<F: Real>(a: &[F]) -> F {
    a.iter().fold(F::zero(), |m, v| m.max(v.abs()))
}

struct Evaluator<'a, F, O> {
    objective: &'a mut O,
    count: usize,
    _f: std::marker::PhantomData<F>,
}

impl<F: Real, O: FnMut(&[F]) -> Result<(F, Vec<F>)>> Evaluator<'_, F, O> {
    /// Negated objective and gradient, so the search below minimizes.
    fn eval(&mut self, x: &[F]) -> Result<(F, Vec<F>)> {
        self.count += 1;
        let (v, g) = (self.objective)(x)?;
        if !v.is_finite() || g.iter().any(|d| !d.is_finite()) {
            return Err(MrfError::NumericalFailure {
                point: x.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        Ok((-v, g.into_iter().map(|d| -d).collect()))
    }
}

/// Maximizes `objective` from `x0`.
///
/// `objective` returns the value and gradient at a point. Steps satisfy the
/// Armijo condition and the weak Wolfe curvature condition; near the optimum,
/// where value differences drown in roundoff, a step is also accepted if the
/// value does not decrease by more than ~1e-13 relative and the directional
/// derivative has shrunk to the approximate-Wolfe band. Accepted values are
/// therefore non-decreasing up to that roundoff allowance.
pub fn maximize<F, O>(mut objective: O, x0: Vec<F>, cfg: &OptimizerConfig) -> Result<Optimum<F>>
where
    F: Real,
    O: FnMut(&[F]) -> Result<(F, Vec<F>)>,
{
    let c1 = F::lit(cfg.sufficient_decrease);
    let c2 = F::lit(cfg.curvature);
    let tol = F::lit(cfg.tol_grad_inf);
    let mut ev = Evaluator {
        objective: &mut objective,
        count: 0,
        _f: std::marker::PhantomData,
    };

    let mut x = x0;
    let (mut f, mut g) = ev.eval(&x)?;
    let mut trace = vec![-f];
    let mut history: VecDeque<(Vec<F>, Vec<F>, F)> = VecDeque::with_capacity(cfg.memory);
    let mut iterations = 0;
    let mut termination = Termination::IterationLimit;

    loop {
        if inf_norm(&g) <= tol {
            termination = Termination::GradientTolerance;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }

        let mut d = two_loop(&g, &history);
        let mut slope = dot(&d, &g);
        if slope.is_nan() || slope >= F::zero() {
            history.clear();
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&d, &g);
        }
        let first = if history.is_empty() {
            (F::one() / inf_norm(&g)).min(F::one())
        } else {
            F::one()
        };

        match line_search(&mut ev, &x, f, slope, &d, first, c1, c2, cfg.max_line_search_steps)? {
            Some((x_new, f_new, g_new)) => {
                let s: Vec<F> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                let y: Vec<F> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > F::epsilon() * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                    if history.len() == cfg.memory.max(1) {
                        history.pop_front();
                    }
                    history.push_back((s, y, F::one() / sy));
                }
                x = x_new;
                f = f_new;
                g = g_new;
                trace.push(-f);
                iterations += 1;
            }
            None if !history.is_empty() => history.clear(),
            None => {
                termination = Termination::LineSearchFailed;
                break;
            }
        }
    }

    let grad_inf_norm = inf_norm(&g);
    Ok(Optimum {
        x,
        value: -f,
        grad_inf_norm,
        iterations,
        evaluations: ev.count,
        converged: grad_inf_norm <= tol,
        termination,
        trace,
    })
}

fn two_loop<F: Real>(g: &[F], history: &VecDeque<(Vec<F>, Vec<F>, F)>) -> Vec<F> {
    let mut q: Vec<F> = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = *rho * dot(s, &q);
        for (qi, &yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi *= gamma;
        }
    }
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, &q);
        for (qi, &si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.into_iter().map(|v| -v).collect()
}

type Step<F> = (Vec<F>, F, Vec<F>);

/// Bisection/expansion search for a weak-Wolfe step (minimization form).
#[allow(clippy::too_many_arguments)]
fn line_search<F, O>(
    ev: &mut Evaluator<'_, F, O>,
    x: &[F],
    f0: F,
    slope: F,
    d: &[F],
    first: F,
    c1: F,
    c2: F,
    max_steps: usize,
) -> Result<Option<Step<F>>>
where
    F: Real,
    O: FnMut(&[F]) -> Result<(F, Vec<F>)>,
{
    let two = F::lit(2.0);
    let approx_band = (F::one() - two * c1) * slope.abs();
    let noise = F::lit(1e3) * F::epsilon() * f0.abs();
    let mut lo = F::zero();
    let mut hi = F::infinity();
    let mut alpha = first;
    let mut best: Option<Step<F>> = None;
    for _ in 0..max_steps {
        let xa: Vec<F> = x.iter().zip(d).map(|(&xi, &di)| xi + alpha * di).collect();
        if xa.iter().zip(x).all(|(a, b)| a == b) {
            break;
        }
        let (fa, ga) = ev.eval(&xa)?;
        let da = dot(&ga, d);
        let armijo = fa <= f0 + c1 * alpha * slope;
        let approx = fa <= f0 + noise && da <= approx_band;
        if !(armijo || approx) {
            hi = alpha;
        } else if armijo && da < c2 * slope {
            // still descending steeply: move right
            if fa < f0 && best.as_ref().is_none_or(|b| fa < b.1) {
                best = Some((xa, fa, ga));
            }
            lo = alpha;
        } else {
            return Ok(Some((xa, fa, ga)));
        }
        alpha = if hi.is_finite() { (lo + hi) / two } else { two * lo };
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let r = maximize(
            |x: &[f64]| Ok((-(x[0] - 3.0).powi(2), vec![-2.0 * (x[0] - 3.0)])),
            vec![0.0],
            &OptimizerConfig::with_tol(1e-10),
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn anisotropic_quadratic() {
        let obj = |x: &[f64]| {
            Ok((
                -x[0] * x[0] - 10.0 * x[1] * x[1],
                vec![-2.0 * x[0], -20.0 * x[1]],
            ))
        };
        let r = maximize(obj, vec![1.5, -2.0], &OptimizerConfig::with_tol(1e-10)).unwrap();
        assert!(r.x.iter().all(|v| v.abs() < 1e-8), "{:?}", r.x);
        // monotone ascent
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rosenbrock_in_f32_and_f64() {
        fn rosen<F: Real>(x: &[F]) -> Result<(F, Vec<F>)> {
            let (a, b) = (x[0], x[1]);
            let one = F::one();
            let h = F::lit(100.0);
            let v = (one - a) * (one - a) + h * (b - a * a) * (b - a * a);
            let ga = -F::lit(2.0) * (one - a) - F::lit(400.0) * a * (b - a * a);
            let gb = F::lit(200.0) * (b - a * a);
            Ok((-v, vec![-ga, -gb]))
        }
        let r = maximize(rosen::<f64>, vec![-1.2, 1.0], &OptimizerConfig::with_tol(1e-8)).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
        let r = maximize(rosen::<f32>, vec![-1.2, 1.0], &OptimizerConfig::with_tol(1e-3)).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn deterministic_iterates() {
        let obj = |x: &[f64]| {
            let v: f64 = x.iter().enumerate().map(|(i, &xi)| -(i as f64 + 1.0) * (xi - 0.5).powi(2) - xi.powi(4)).sum();
            let g = x.iter().enumerate().map(|(i, &xi)| -2.0 * (i as f64 + 1.0) * (xi - 0.5) - 4.0 * xi.powi(3)).collect();
            Ok((v, g))
        };
        let a = maximize(obj, vec![0.0; 6], &OptimizerConfig::default()).unwrap();
        let b = maximize(obj, vec![0.0; 6], &OptimizerConfig::default()).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let cfg = OptimizerConfig {
            max_iters: 1,
            ..OptimizerConfig::with_tol(1e-14)
        };
        let r = maximize(
            |x: &[f64]| Ok((-(x[0] - 3.0).powi(4) - x[1].powi(2) * 5.0, vec![-4.0 * (x[0] - 3.0).powi(3), -10.0 * x[1]])),
            vec![0.0, 1.0],
            &cfg,
        )
        .unwrap();
        assert!(!r.converged);
        assert_eq!(r.termination, Termination::IterationLimit);
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let r = maximize(|_: &[f64]| Ok((f64::NAN, vec![0.0])), vec![0.0], &OptimizerConfig::default());
        assert!(matches!(r, Err(MrfError::NumericalFailure { .. })));
    }
}
