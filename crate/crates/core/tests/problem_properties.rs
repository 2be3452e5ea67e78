mod common;

use dfl_core::problems::{bipartite_matching, grid_shortest_path, NominalProblem, ProblemSpec};
use dfl_core::regret::true_optimum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::normal_vec;

fn assert_integral(problem: &NominalProblem, v: &[f64], what: &str) {
    for (e, &x) in v.iter().enumerate() {
        let gap = x.abs().min((x - 1.0).abs());
        assert!(gap <= 1e-7, "{what}: arc {e} has fractional value {x}");
    }
    assert!(problem.lp.is_feasible(v, 1e-7), "{what}: optimum violates the nominal constraints");
}

#[test]
fn grid_optima_are_unit_paths() {
    let problem = grid_shortest_path(5, 5).unwrap();
    assert_eq!(problem.n(), 40);
    assert_eq!(problem.n_nodes, 25);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..100 {
        let c: Vec<f64> = (0..problem.n()).map(|_| rng.random_range(0.1..5.0)).collect();
        let (z, v) = true_optimum(&problem, &c).unwrap();
        assert_integral(&problem, &v, &format!("grid trial {trial}"));
        // Any monotone path uses exactly 8 arcs on a 5x5 grid.
        let used: f64 = v.iter().sum();
        assert!((used - 8.0).abs() <= 1e-7, "grid trial {trial}: {used} arcs used");
        assert!(z > 0.0);
    }
}

#[test]
fn grid_flow_is_conserved() {
    let problem = grid_shortest_path(4, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let sink = problem.n_nodes - 1;
    for _ in 0..30 {
        let c: Vec<f64> = (0..problem.n()).map(|_| rng.random_range(0.1..5.0)).collect();
        let (_, v) = true_optimum(&problem, &c).unwrap();
        let mut net = vec![0.0; problem.n_nodes];
        for (&(tail, head), &flow) in problem.edges.iter().zip(&v) {
            net[tail] += flow;
            net[head] -= flow;
        }
        assert!((net[0] - 1.0).abs() <= 1e-9);
        assert!((net[sink] + 1.0).abs() <= 1e-9);
        for (u, &excess) in net.iter().enumerate().take(sink).skip(1) {
            assert!(excess.abs() <= 1e-9, "node {u} leaks {excess}");
        }
    }
}

#[test]
fn grid_arcs_point_right_or_down() {
    let problem = grid_shortest_path(3, 4).unwrap();
    assert_eq!(problem.n(), 3 * 3 + 2 * 4);
    for &(tail, head) in &problem.edges {
        assert!(head == tail + 1 || head == tail + 4, "arc {tail}->{head}");
        if head == tail + 1 {
            assert_ne!(head % 4, 0, "right arc wraps a row");
        }
    }
}

#[test]
fn matching_optima_are_integral_matchings() {
    let problem = bipartite_matching(13, 12, 40, 3).unwrap();
    assert_eq!(problem.n(), 40);
    assert!(problem.cost_sign() < 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..100 {
        // Mostly negated weights, sometimes arbitrary signs.
        let c: Vec<f64> = if trial % 4 == 0 {
            normal_vec(&mut rng, problem.n())
        } else {
            (0..problem.n()).map(|_| -rng.random_range(0.1..5.0)).collect()
        };
        let (_, v) = true_optimum(&problem, &c).unwrap();
        assert_integral(&problem, &v, &format!("matching trial {trial}"));
        let mut degree = vec![0.0; problem.n_nodes];
        for (&(l, r), &x) in problem.edges.iter().zip(&v) {
            degree[l] += x;
            degree[r] += x;
        }
        assert!(degree.iter().all(|&d| d <= 1.0 + 1e-9));
    }
}

#[test]
fn matching_edges_are_distinct_and_seeded() {
    let a = bipartite_matching(13, 12, 40, 9).unwrap();
    let b = bipartite_matching(13, 12, 40, 9).unwrap();
    let c = bipartite_matching(13, 12, 40, 10).unwrap();
    assert_eq!(a.edges, b.edges);
    assert_ne!(a.edges, c.edges);
    let mut sorted = a.edges.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), 40);
    assert!(a.edges.iter().all(|&(l, r)| l < 13 && (13..25).contains(&r)));
    assert!(bipartite_matching(3, 3, 10, 0).is_err());
}

#[test]
fn problems_rebuild_from_their_spec() {
    for problem in [grid_shortest_path(3, 5).unwrap(), bipartite_matching(6, 5, 12, 4).unwrap()] {
        let json = serde_json::to_string(&problem.spec).unwrap();
        let spec: ProblemSpec = serde_json::from_str(&json).unwrap();
        let rebuilt = NominalProblem::from_spec(&spec).unwrap();
        assert_eq!(rebuilt.edges, problem.edges);
        assert_eq!(rebuilt.polytope, problem.polytope);
    }
}
