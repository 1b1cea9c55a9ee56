use nalgebra::DMatrix;
use proptest::prelude::*;

use covergff::eulerian::{best_circuit_count, brute_force_circuits, brute_force_paths, path_count, EulerianMultigraph};
use covergff::experiments::checks::{commute_identity_check, recursive_sampler_check};
use covergff::gff::conditional_law;
use covergff::graphs;
use covergff::rng::stream_rng;
use covergff::spectral::{effective_resistance, reduce_network};
use covergff::walk::Walker;
use covergff::Network;

/// Connected weighted network: a random spanning tree plus extra edges.
fn weighted_network() -> impl Strategy<Value = Network> {
    (3usize..8).prop_flat_map(|n| {
        let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|v| (0..v).boxed()).collect();
        let extra = prop::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..n);
        let weights = prop::collection::vec(0.1f64..5.0, n - 1);
        (Just(n), parents, extra, weights).prop_map(|(n, parents, extra, weights)| {
            let mut edges: Vec<(usize, usize, f64)> =
                parents.iter().enumerate().map(|(i, &p)| (p, i + 1, weights[i])).collect();
            edges.extend(extra.into_iter().filter(|(u, v, _)| u != v));
            Network::from_edges(n, edges, 0).expect("spanning tree keeps it connected")
        })
    })
}

/// Union of random closed walks on up to five vertices: always balanced.
fn closed_walk_multigraph() -> impl Strategy<Value = EulerianMultigraph> {
    (2usize..=5).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(0..n, 2..5), 1..3).prop_map(move |walks| {
            let mut j = vec![vec![0u32; n]; n];
            // chain every walk through vertex 0 so the union is connected
            for w in walks {
                let mut seq = vec![0];
                seq.extend(w.into_iter().filter(|&v| v != 0));
                seq.push(0);
                for p in seq.windows(2) {
                    if p[0] != p[1] {
                        j[p[0]][p[1]] += 1;
                    }
                }
            }
            // drop isolated vertices by relabelling
            let used: Vec<usize> = (0..n)
                .filter(|&v| (0..n).any(|u| j[v][u] + j[u][v] > 0))
                .collect();
            let m = used.len().max(1);
            let mut k = vec![vec![0u32; m]; m];
            for (a, &u) in used.iter().enumerate() {
                for (b, &v) in used.iter().enumerate() {
                    k[a][b] = j[u][v];
                }
            }
            EulerianMultigraph::new(k).expect("square")
        })
    })
}

/// Grounded covariance built here from the edge list, independent of the
/// library's spectral module.
fn covariance(net: &Network) -> DMatrix<f64> {
    let n = net.vertex_count();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for (u, v, c) in net.edges() {
        if u != v {
            l[(u, u)] += c;
            l[(v, v)] += c;
            l[(u, v)] -= c;
            l[(v, u)] -= c;
        }
    }
    let r = net.root();
    let free: Vec<usize> = (0..n).filter(|&v| v != r).collect();
    let g = DMatrix::from_fn(n - 1, n - 1, |i, j| l[(free[i], free[j])]);
    let inv = g.try_inverse().expect("grounded Laplacian is invertible");
    let mut cov = DMatrix::zeros(n, n);
    for (a, &u) in free.iter().enumerate() {
        for (b, &v) in free.iter().enumerate() {
            cov[(u, v)] = inv[(a, b)];
        }
    }
    cov
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn best_count_matches_enumeration(g in closed_walk_multigraph()) {
        prop_assume!(g.vertex_count() >= 2 && g.total_multiplicity() <= 10 && g.is_eulerian());
        let best = best_circuit_count(&g).unwrap();
        prop_assert_eq!(brute_force_circuits(&g, 10).unwrap(), best.circuits);
        prop_assert_eq!(brute_force_paths(&g, 0, false, 10).unwrap(), path_count(&g, 0).unwrap());
    }

    #[test]
    fn commute_identity_holds(net in weighted_network()) {
        let c = commute_identity_check("random", &net).unwrap();
        prop_assert!(c.max_relative_error < 1e-9, "{}", c.max_relative_error);
    }

    #[test]
    fn resistance_is_a_metric(net in weighted_network()) {
        let n = net.vertex_count();
        let r = |u, v| effective_resistance(&net, u, v).unwrap();
        for u in 0..n {
            for v in 0..n {
                prop_assert!((r(u, v) - r(v, u)).abs() < 1e-12);
                for w in 0..n {
                    prop_assert!(r(u, w) <= r(u, v) + r(v, w) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn reduction_preserves_resistance(net in weighted_network(), mask in prop::collection::vec(any::<bool>(), 8)) {
        let n = net.vertex_count();
        let mut keep: Vec<usize> = (0..n).filter(|&v| v == 0 || mask[v]).collect();
        if keep.len() < 2 {
            keep.push(n - 1);
        }
        let red = reduce_network(&net, &keep).unwrap();
        for (a, &u) in keep.iter().enumerate() {
            prop_assert!((red.total_conductance(a) - net.total_conductance(u)).abs() < 1e-9);
            for (b, &v) in keep.iter().enumerate() {
                let (x, y) = (effective_resistance(&red, a, b).unwrap(), effective_resistance(&net, u, v).unwrap());
                prop_assert!((x - y).abs() <= 1e-9 * y.max(1.0));
            }
        }
    }

    #[test]
    fn conditional_law_is_gaussian_regression(net in weighted_network(), v_pick in 1usize..8, mask in prop::collection::vec(any::<bool>(), 8)) {
        let n = net.vertex_count();
        let v = 1 + v_pick % (n - 1);
        let set: Vec<usize> = (0..n).filter(|&u| u != v && (u == 0 || mask[u])).collect();
        let others: Vec<usize> = set.iter().copied().filter(|&u| u != 0).collect();
        let cov = covariance(&net);
        let values: Vec<f64> = set.iter().map(|&u| if u == 0 { 0.0 } else { 0.3 * u as f64 - 0.5 }).collect();
        let law = conditional_law(&net, v, &set, &values).unwrap();
        let (mean, var) = if others.is_empty() {
            (0.0, cov[(v, v)])
        } else {
            let k = others.len();
            let s_ss = DMatrix::from_fn(k, k, |i, j| cov[(others[i], others[j])]);
            let s_vs = DMatrix::from_fn(1, k, |_, j| cov[(v, others[j])]);
            let x = DMatrix::from_fn(k, 1, |i, _| values[set.iter().position(|&u| u == others[i]).unwrap()]);
            let w = &s_vs * s_ss.try_inverse().unwrap();
            ((&w * x)[(0, 0)], cov[(v, v)] - (&w * s_vs.transpose())[(0, 0)])
        };
        prop_assert!((law.mean - mean).abs() < 1e-9, "{} vs {}", law.mean, mean);
        prop_assert!((law.variance - var).abs() < 1e-9, "{} vs {}", law.variance, var);
        let total: f64 = law.weights.iter().map(|w| w.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}

/// The walk watched on the kept set moves like the walk on the reduced
/// network: from kept `u`, the next kept vertex (possibly `u` itself) is `w`
/// with probability `c̃_uw / c_u`.
#[test]
fn watched_chain_matches_reduced_network() {
    let net = graphs::grid(3, 3);
    let keep = [0, 2, 4, 8];
    let red = reduce_network(&net, &keep).unwrap();
    let walker = Walker::new(&net);
    let runs = 40_000;
    let mut rng = stream_rng(17, 0, 0);
    for (a, &u) in keep.iter().enumerate() {
        let mut counts = [0usize; 4];
        for _ in 0..runs {
            let mut x = walker.step(u, &mut rng);
            while !keep.contains(&x) {
                x = walker.step(x, &mut rng);
            }
            counts[keep.iter().position(|&k| k == x).unwrap()] += 1;
        }
        let cu = red.total_conductance(a);
        for b in 0..keep.len() {
            let p = red.conductance(a, b) / cu;
            let f = counts[b] as f64 / runs as f64;
            let se = (p * (1.0 - p) / runs as f64).sqrt().max(1e-4);
            assert!((f - p).abs() <= 5.0 * se, "u={u} w={} observed {f} expected {p}", keep[b]);
        }
    }
}

#[test]
fn recursive_sampler_agrees_with_walks_on_random_trees() {
    for seed in [3, 8, 21] {
        let tree = graphs::random_tree(12, seed);
        for t in [0.3, 1.5] {
            let r = recursive_sampler_check(&tree, t, 4000, seed).unwrap();
            assert!(r.pass, "seed {seed} t {t}: {r:?}");
        }
    }
}

/// Replica streams are keyed by index, so the thread count cannot change a
/// report.
#[test]
fn experiment_output_does_not_depend_on_thread_count() {
    use covergff::experiments::{run_experiment, ExperimentConfig};
    let dir = std::env::temp_dir().join(format!("covergff-threads-{}", std::process::id()));
    let run_in = |threads: usize, sub: &str| {
        let out = dir.join(sub);
        let cfg = ExperimentConfig::from_json(
            &serde_json::json!({ "suite": "smoke", "seed": 99, "output_dir": out }).to_string(),
        )
        .unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let o = pool.install(|| run_experiment(&cfg)).unwrap();
        (std::fs::read(o.csv_path).unwrap(), std::fs::read(o.json_path).unwrap())
    };
    assert_eq!(run_in(1, "one"), run_in(4, "four"));
}
