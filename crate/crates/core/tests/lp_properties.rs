mod common;

use dfl_core::lp::{self, LpProblem, LpStatus, Row, Sense};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// A random LP that is feasible (it contains `x0`) and bounded (every
/// variable is boxed).
fn random_lp(rng: &mut ChaCha8Rng) -> (LpProblem, Vec<f64>) {
    let n = rng.random_range(1..=8);
    let m = rng.random_range(1..=12);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut lp = LpProblem::new(n).with_objective(normal_vec(rng, n));
    for j in 0..n {
        let lo = x0[j] - rng.random_range(0.5..3.0);
        let hi = x0[j] + rng.random_range(0.5..3.0);
        lp.set_bounds(j, lo, hi);
    }
    for _ in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (j, a) in normal_vec(rng, n).into_iter().enumerate() {
            if rng.random_bool(0.6) {
                coeffs.push((j, a));
            }
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let slack = rng.random_range(0.0..1.0);
        let row = match rng.random_range(0..5) {
            0 => Row::new(coeffs, Sense::Eq, act),
            1 | 2 => Row::new(coeffs, Sense::Ge, act - slack),
            _ => Row::new(coeffs, Sense::Le, act + slack),
        };
        lp.add_row(row);
    }
    (lp, x0)
}

#[test]
fn strong_duality_on_random_lps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..200 {
        let (lp, _) = random_lp(&mut rng);
        let sol = lp::solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
        assert!(lp.max_violation(&sol.primal) <= 1e-7, "trial {trial}: primal infeasible");

        let (rows, _) = lp.canonical_rows();
        let rho = sol.canonical_dual(&lp);
        assert_eq!(rho.len(), rows.len());
        assert!(rho.iter().all(|&r| r >= -1e-9), "trial {trial}: negative canonical dual");
        let mut at = vec![0.0; lp.n_vars];
        for (row, &r) in rows.iter().zip(&rho) {
            for &(j, a) in &row.coeffs {
                at[j] += a * r;
            }
        }
        for j in 0..lp.n_vars {
            assert!((at[j] - lp.objective[j]).abs() <= 1e-7, "trial {trial}: A'rho != c");
        }
        let dual_obj: f64 = rows.iter().zip(&rho).map(|(row, r)| row.rhs * r).sum();
        let primal_obj = dot(&lp.objective, &sol.primal);
        assert!((primal_obj - dual_obj).abs() <= 1e-7, "trial {trial}: gap {}", primal_obj - dual_obj);
        assert!((primal_obj - sol.objective).abs() <= 1e-9);
    }
}

#[test]
fn optimum_matches_vertex_lists() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..100 {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=10);
        let points: Vec<Vec<f64>> = (0..k).map(|_| normal_vec(&mut rng, n)).collect();
        let c = normal_vec(&mut rng, n);
        // min c'(sum_i lambda_i p_i) over the probability simplex.
        let costs: Vec<f64> = points.iter().map(|p| dot(&c, p)).collect();
        let mut lp = LpProblem::new(k).with_objective(costs.clone());
        for i in 0..k {
            lp.set_bounds(i, 0.0, f64::INFINITY);
        }
        lp.add_row(Row::new((0..k).map(|i| (i, 1.0)), Sense::Eq, 1.0));
        let sol = lp::solve(&lp).unwrap();
        let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((sol.objective - best).abs() <= 1e-7, "trial {trial}");
    }
}

#[test]
fn optimum_matches_enumerated_vertices_of_h_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for trial in 0..100 {
        let (problem, verts) = random_polytope(&mut rng, 6);
        let c = normal_vec(&mut rng, problem.n());
        let sol = lp::solve(&problem.polytope.to_lp(&c)).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.objective - brute_zstar(&verts, &c)).abs() <= 1e-7, "trial {trial}");
    }
}

#[test]
fn canonicalization_preserves_the_feasible_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut agree_feasible = 0;
    for _ in 0..100 {
        let (lp, x0) = random_lp(&mut rng);
        let canon = lp.canonicalize();
        assert!(canon.rows.iter().all(|r| r.sense == Sense::Ge));
        assert!(canon.lower.iter().chain(&canon.upper).all(|b| b.is_infinite()));
        let vertex = lp::solve(&lp).unwrap().primal;
        let mut probes = vec![x0.clone(), vertex];
        for _ in 0..20 {
            probes.push(x0.iter().map(|x| x + rng.random_range(-1.5..1.5)).collect());
        }
        for v in &probes {
            let a = lp.is_feasible(v, 1e-9);
            assert_eq!(a, canon.is_feasible(v, 1e-9));
            agree_feasible += usize::from(a);
        }
    }
    assert!(agree_feasible > 200, "probes should hit the feasible set often");
}

#[test]
fn contradictory_and_open_problems() {
    let mut lp = LpProblem::new(1).with_objective(vec![1.0]);
    lp.add_row(Row::dense(&[1.0], Sense::Ge, 2.0));
    lp.add_row(Row::dense(&[1.0], Sense::Le, 1.0));
    assert_eq!(lp::solve(&lp).unwrap().status, LpStatus::Infeasible);

    let mut ray = LpProblem::new(2).with_objective(vec![-1.0, 0.0]);
    ray.add_row(Row::dense(&[1.0, -1.0], Sense::Le, 1.0));
    ray.set_bounds(1, 0.0, f64::INFINITY);
    assert_eq!(lp::solve(&ray).unwrap().status, LpStatus::Unbounded);
}

proptest! {
    #[test]
    fn box_optimum_is_separable(
        data in prop::collection::vec((-5.0f64..5.0, 0.0f64..4.0, -3.0f64..3.0), 1..8)
    ) {
        let n = data.len();
        let mut lp = LpProblem::new(n).with_objective(data.iter().map(|d| d.2).collect());
        let mut expected = 0.0;
        for (j, &(lo, width, c)) in data.iter().enumerate() {
            lp.set_bounds(j, lo, lo + width);
            expected += (c * lo).min(c * (lo + width));
        }
        let sol = lp::solve(&lp).unwrap();
        prop_assert!(sol.is_optimal());
        prop_assert!((sol.objective - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
    }
}
