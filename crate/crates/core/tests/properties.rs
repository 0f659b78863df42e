use lapmrf::estimation::{ml_objective_grad, population_stats, pl_objective_grad, sufficient_stats, Scope};
use lapmrf::inference::{brute_force, joint_table, marginalize, min_fill_order, mobius_potentials, variable_elimination, JointTable};
use lapmrf::{marginal_graph, Dataset, Graph, InferenceOptions, LogLinearModel, ParameterVector, Structure};
use proptest::prelude::*;
use std::sync::Arc;

fn table(n: usize) -> impl Strategy<Value = JointTable<f64>> {
    prop::collection::vec(0.01f64..1.0, 1 << n).prop_map(move |w| {
        let z: f64 = w.iter().sum();
        JointTable::new(n, w.into_iter().map(|p| p / z).collect()).unwrap()
    })
}

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in u + 1..n {
                    if bits[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            Graph::new(n, edges).unwrap()
        })
    })
}

fn model(max_n: usize) -> impl Strategy<Value = LogLinearModel<f64>> {
    graph(max_n).prop_flat_map(|g| {
        let s = Arc::new(Structure::from_graph(g));
        prop::collection::vec(-1.5f64..1.5, s.cliques.num_blocks())
            .prop_map(move |w| LogLinearModel::new(s.clone(), ParameterVector(w)).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginalization_composes(t in table(5), keep in prop::sample::subsequence(vec![0usize, 1, 2, 3, 4], 0..=5)) {
        let once = marginalize(&t, &keep).unwrap();
        let twice = marginalize(&marginalize(&t, &[0, 1, 2, 3, 4]).unwrap(), &keep).unwrap();
        prop_assert_eq!(&once, &twice);
        let sum: f64 = once.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        if !keep.is_empty() {
            let inner: Vec<usize> = (0..keep.len() - 1).collect();
            let a = marginalize(&once, &inner).unwrap();
            let b = marginalize(&t, &keep[..keep.len() - 1]).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mobius_reconstructs_log_table(t in table(4)) {
        let w = mobius_potentials(&t).unwrap();
        for x in 0..16usize {
            let s: f64 = w.iter().filter(|(b, _)| b & x == *b).map(|(_, v)| v).sum();
            prop_assert!((t.probs()[x].ln() - w.log_p_zero() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_graph_keeps_induced_edges(g in graph(7), mask in 0u32..128) {
        let keep: Vec<usize> = (0..g.num_vars()).filter(|v| mask >> v & 1 == 1).collect();
        let m = marginal_graph(&g, &keep).unwrap();
        for (i, &u) in keep.iter().enumerate() {
            for (j, &v) in keep.iter().enumerate().skip(i + 1) {
                if g.has_edge(u, v) {
                    prop_assert!(m.has_edge(i, j));
                }
            }
        }
        let all: Vec<usize> = (0..g.num_vars()).collect();
        prop_assert_eq!(marginal_graph(&g, &all).unwrap(), g);
    }

    #[test]
    fn moment_matching_zeroes_ml_gradient(m in model(6)) {
        let t = joint_table(&m, 25).unwrap();
        let all: Vec<usize> = (0..m.num_vars()).collect();
        let stats = population_stats(m.cliques(), &t, &all).unwrap();
        let (_, g) = ml_objective_grad(&m, &stats, &InferenceOptions::default()).unwrap();
        prop_assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn objectives_are_concave_along_lines(m in model(6), rows in prop::collection::vec(any::<u64>(), 1..40), dir_seed in any::<u64>()) {
        let n = m.num_vars();
        let data = Dataset::from_rows(n, rows.iter().map(|r| (0..n).map(|i| (r >> i & 1) as u8).collect()).collect()).unwrap();
        let stats = sufficient_stats(m.cliques(), &data, Scope::All).unwrap();
        let k = m.params().len();
        let dir: Vec<f64> = (0..k).map(|i| ((dir_seed.rotate_left(i as u32 * 7) % 1000) as f64 / 500.0) - 1.0).collect();
        let at = |t: f64| {
            let w: Vec<f64> = m.params().as_slice().iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            LogLinearModel::new(m.structure().clone(), ParameterVector(w)).unwrap()
        };
        let ml = |t: f64| ml_objective_grad(&at(t), &stats, &InferenceOptions::default()).unwrap().0;
        let pl = |t: f64| pl_objective_grad(&at(t), &data).unwrap().0;
        for f in [&ml as &dyn Fn(f64) -> f64, &pl] {
            let (a, b, c) = (f(-0.5), f(0.0), f(0.5));
            prop_assert!(b >= (a + c) / 2.0 - 1e-9);
        }
    }

    #[test]
    fn elimination_matches_brute_force(m in model(10)) {
        let bf = brute_force(&m, 25).unwrap();
        let ve = variable_elimination(&m, &min_fill_order(m.graph()), 1 << 26).unwrap();
        prop_assert!((bf.log_z - ve.log_z).abs() < 1e-10);
        for (a, b) in bf.feature_means.iter().zip(&ve.feature_means) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_graph_is_idempotent(g in graph(8), mask in 0u32..256) {
        let keep: Vec<usize> = (0..g.num_vars()).filter(|v| mask >> v & 1 == 1).collect();
        let once = marginal_graph(&g, &keep).unwrap();
        let local: Vec<usize> = (0..keep.len()).collect();
        prop_assert_eq!(marginal_graph(&once, &local).unwrap(), once);
    }

    #[test]
    fn pairwise_neighborhood_is_clique_plus_neighbors(g in graph(8)) {
        let s = Structure::from_graph(g.clone());
        if s.cliques.is_pairwise() {
            for q in s.cliques.maximal() {
                let mut expect: Vec<usize> = q.members().to_vec();
                for &v in q.members() {
                    expect.extend_from_slice(g.neighbors(v));
                }
                expect.sort_unstable();
                expect.dedup();
                prop_assert_eq!(s.one_neighborhood(q).unwrap(), expect);
            }
        }
    }
}
