mod common;

use dfl_core::datagen::Sample;
use dfl_core::model::LinearModel;
use dfl_core::problems::{custom, triangle, unit_box, NominalProblem};
use dfl_core::zero_regret::{check_uniqueness, zero_regret_certificate, Answer};
use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// Worst pessimistic regret of `model` over `samples`, by vertex enumeration.
fn brute_max_regret(verts: &[Vec<f64>], samples: &[Sample], model: &LinearModel) -> f64 {
    samples
        .iter()
        .map(|s| brute_pessimistic(verts, &s.c, &model.predict(&s.x)))
        .fold(0.0, f64::max)
}

/// Searches `omega` over `[-2, 2]^d` in steps of 0.25 for a zero-regret model.
fn grid_search(verts: &[Vec<f64>], samples: &[Sample], n: usize, bias: bool) -> Option<LinearModel> {
    let levels: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.25).collect();
    let template = LinearModel::zeros(n, samples[0].x.len(), bias);
    let dims = template.omega.len();
    (0..dims).map(|_| levels.iter().copied()).multi_cartesian_product().find_map(|omega| {
        let model = LinearModel { omega, ..template.clone() };
        (brute_max_regret(verts, samples, &model) <= 1e-9).then_some(model)
    })
}

fn small_polytopes() -> Vec<NominalProblem> {
    let simplex = custom(
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![-1.0, -1.0, -1.0]],
        vec![0.0, 0.0, 0.0, -1.0],
        Vec::new(),
    )
    .unwrap();
    vec![unit_box(1), unit_box(2), unit_box(3), triangle(), simplex]
}

#[test]
fn answers_agree_with_grid_search() {
    let polytopes = small_polytopes();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let (mut decided, mut yes, mut grid_hits) = (0, 0, 0);
    while decided < 50 {
        let problem = &polytopes[rng.random_range(0..polytopes.len())];
        let n = problem.n();
        let verts = vertices(&problem.polytope);
        let bias = n <= 2 && rng.random_bool(0.5);
        let samples: Vec<Sample> = (0..rng.random_range(1..=3))
            .map(|_| {
                let x = [-2.0, -1.0, 1.0, 2.0][rng.random_range(0..4)];
                let c = (0..n).map(|_| rng.random_range(-3..=3) as f64).collect();
                Sample { x: vec![x], c }
            })
            .collect();
        let refs: Vec<&Sample> = samples.iter().collect();
        let verdict = zero_regret_certificate(problem, &refs, bias).unwrap();
        if verdict.answer == Answer::AssumptionViolated {
            assert!(verdict.unique.iter().any(|u| !u));
            continue;
        }
        decided += 1;
        let found = grid_search(&verts, &samples, n, bias);
        match verdict.answer {
            Answer::Yes => {
                yes += 1;
                let cert = verdict.certificate.expect("Yes carries a certificate");
                assert!(cert.lambda <= 1e-8);
                assert!(brute_max_regret(&verts, &samples, &cert.model) <= 1e-8);
            }
            Answer::No => assert!(found.is_none(), "grid found {:?} but the answer was No", found.unwrap().omega),
            Answer::AssumptionViolated => unreachable!(),
        }
        grid_hits += usize::from(found.is_some());
    }
    assert!(yes > 0 && yes < 50, "{yes} of 50 decided cases were Yes");
    assert!(grid_hits <= yes);
}

#[test]
fn certificates_have_zero_regret() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut certified = 0;
    for _ in 0..40 {
        let (problem, verts) = random_polytope(&mut rng, 4);
        let k = rng.random_range(1..=2);
        let samples: Vec<Sample> = (0..rng.random_range(1..=4))
            .map(|_| Sample { x: normal_vec(&mut rng, k), c: normal_vec(&mut rng, problem.n()) })
            .collect();
        let refs: Vec<&Sample> = samples.iter().collect();
        let verdict = zero_regret_certificate(&problem, &refs, true).unwrap();
        if let Some(cert) = verdict.certificate {
            assert_eq!(verdict.answer, Answer::Yes);
            assert!(cert.lambda <= 1e-8);
            assert!(brute_max_regret(&verts, &samples, &cert.model) <= 1e-7);
            certified += 1;
        }
    }
    assert!(certified > 0);
}

#[test]
fn uniqueness_matches_the_optimal_face() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..60 {
        let (problem, verts) = random_polytope(&mut rng, 4);
        let c = face_probing_prediction(&mut rng, &problem.polytope);
        let report = check_uniqueness(&problem, &c).unwrap();
        let face = face_vertices(&verts, &c);
        assert_eq!(report.unique, face.len() == 1, "face has {} vertices", face.len());
        assert!((report.zstar - brute_zstar(&verts, &c)).abs() <= 1e-7);
    }
}

#[test]
fn zero_regret_without_an_exact_fit() {
    let square = unit_box(2);
    let s1 = Sample { x: vec![1.0], c: vec![-1.0, -2.0] };
    let s2 = Sample { x: vec![-1.0], c: vec![1.0, 1.0] };
    // The best least-squares fit of omega*x = c leaves a residual.
    let fit: Vec<f64> = (0..2).map(|a| (s1.c[a] - s2.c[a]) / 2.0).collect();
    let residual: f64 = (0..2).map(|a| (fit[a] - s1.c[a]).powi(2) + (-fit[a] - s2.c[a]).powi(2)).sum();
    assert!(residual > 0.1);

    let verdict = zero_regret_certificate(&square, &[&s1, &s2], false).unwrap();
    assert_eq!(verdict.answer, Answer::Yes);
    let verts = vertices(&square.polytope);
    let model = verdict.certificate.unwrap().model;
    assert!(brute_max_regret(&verts, &[s1.clone(), s2.clone()], &model) <= 1e-9);
    let hand = LinearModel::from_rows(&[vec![-1.0], vec![-1.0]], false).unwrap();
    assert!(brute_max_regret(&verts, &[s1, s2], &hand) <= 1e-12);
}
