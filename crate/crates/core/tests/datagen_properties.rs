use dfl_core::datagen::{generate, generate_with_law, noiseless_cost, Dataset, OmegaLaw, SplitKind};
use dfl_core::problems::{bipartite_matching, grid_shortest_path};
use dfl_core::regret::true_optimum;

#[test]
fn same_seed_same_dataset() {
    let problem = grid_shortest_path(3, 3).unwrap();
    let a = generate(&problem, 50, 4, 4, 0.5, 77).unwrap();
    let b = generate(&problem, 50, 4, 4, 0.5, 77).unwrap();
    let c = generate(&problem, 50, 4, 4, 0.5, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.samples, c.samples);
    assert_ne!(a.gen_params.true_omega, c.gen_params.true_omega);
}

#[test]
fn costs_keep_their_sign_below_unit_noise() {
    let grid = grid_shortest_path(4, 4).unwrap();
    let matching = bipartite_matching(6, 5, 15, 1).unwrap();
    for (seed, noise) in [(1, 0.0), (2, 0.5), (3, 0.99)] {
        for deg in [1, 2, 8] {
            for problem in [&grid, &matching] {
                let data = generate(problem, 40, 3, deg, noise, seed).unwrap();
                for s in &data.samples {
                    assert!(s.c.iter().all(|&c| problem.cost_sign() * c > 0.0));
                }
            }
            let data = generate(&grid, 40, 3, deg, noise, seed).unwrap();
            for s in &data.samples {
                assert!(true_optimum(&grid, &s.c).unwrap().0 > 0.0);
            }
        }
    }
}

#[test]
fn noiseless_costs_follow_the_formula() {
    let problem = grid_shortest_path(3, 3).unwrap();
    let k = 3;
    let data = generate_with_law(&problem, 20, k, 4, 0.0, 5, OmegaLaw::Normal).unwrap();
    let omega = &data.gen_params.true_omega;
    assert_eq!(omega.len(), problem.n() * k);
    for s in &data.samples {
        for (a, &c) in s.c.iter().enumerate() {
            let expect = noiseless_cost(&omega[a * k..(a + 1) * k], &s.x, 4);
            assert!((c - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
}

#[test]
fn noise_is_a_bounded_multiplicative_factor() {
    let problem = grid_shortest_path(3, 3).unwrap();
    let noise = 0.3;
    let data = generate(&problem, 200, 2, 2, noise, 6).unwrap();
    let k = data.k();
    let omega = &data.gen_params.true_omega;
    let mut ratios = Vec::new();
    for s in &data.samples {
        for (a, &c) in s.c.iter().enumerate() {
            ratios.push(c / noiseless_cost(&omega[a * k..(a + 1) * k], &s.x, 2));
        }
    }
    assert!(ratios.iter().all(|r| (1.0 - noise - 1e-12..=1.0 + noise + 1e-12).contains(r)));
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "mean factor {mean}");
}

#[test]
fn feature_and_omega_moments() {
    let problem = grid_shortest_path(2, 2).unwrap();
    let data = generate(&problem, 10_000, 3, 2, 0.0, 8).unwrap();
    for j in 0..3 {
        let xs: Vec<f64> = data.samples.iter().map(|s| s.x[j]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.05, "feature {j} mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "feature {j} variance {var}");
    }
    let omega = &data.gen_params.true_omega;
    assert!(omega.iter().all(|&w| w == 0.0 || w == 1.0));

    let big = grid_shortest_path(10, 10).unwrap();
    let omega = generate(&big, 1, 20, 1, 0.0, 9).unwrap().gen_params.true_omega;
    let ones = omega.iter().filter(|&&w| w == 1.0).count() as f64 / omega.len() as f64;
    assert!((ones - 0.5).abs() < 0.05, "fraction of ones {ones}");
}

#[test]
fn split_partitions_the_samples() {
    let problem = bipartite_matching(5, 5, 10, 2).unwrap();
    for n in [1, 7, 10, 101] {
        let data = generate(&problem, n, 2, 1, 0.1, n as u64).unwrap();
        let mut all: Vec<usize> = data.indices(SplitKind::Train);
        all.extend(data.indices(SplitKind::Test));
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
        assert_eq!(data.indices(SplitKind::Train).len(), (0.7 * n as f64).round() as usize);
        assert_eq!(data.indices(SplitKind::All).len(), n);
    }
}

#[test]
fn json_round_trip_and_validation() {
    let problem = grid_shortest_path(3, 3).unwrap();
    let data = generate(&problem, 30, 2, 2, 0.25, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    data.save(&path).unwrap();
    let back = Dataset::load(&path).unwrap();
    assert_eq!(back, data);
    back.validate(&problem).unwrap();

    let mut bad = data.clone();
    bad.split.test.push(bad.split.train[0]);
    assert!(bad.validate(&problem).is_err());
    let mut short = data.clone();
    short.samples[0].c.pop();
    assert!(short.validate(&problem).is_err());
}
