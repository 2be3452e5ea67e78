#![allow(dead_code)]

use dfl_core::datagen::{Dataset, Sample};
use dfl_core::model::LinearModel;
use dfl_core::problems::{custom, triangle, NominalProblem, Polytope};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `min c'v` over `v1 + v2 <= 1, v >= 0`, with three single-feature samples.
pub fn three_sample_instance() -> (NominalProblem, Dataset) {
    let problem = triangle();
    let samples = vec![
        Sample { x: vec![0.0], c: vec![-3.0, -2.0] },
        Sample { x: vec![1.0], c: vec![-2.0, -5.0] },
        Sample { x: vec![2.0], c: vec![-2.0, 0.0] },
    ];
    let dataset = Dataset::from_samples(&problem, samples).unwrap();
    (problem, dataset)
}

/// Rows are cost components, columns are (intercept, slope).
pub fn affine_model(rows: [[f64; 2]; 2]) -> LinearModel {
    LinearModel::from_rows(&[rows[0].to_vec(), rows[1].to_vec()], true).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// All vertices of `{a_j'v >= b_j, equality rows tight}` by trying every
/// choice of `n` rows as the active set.
pub fn vertices(poly: &Polytope) -> Vec<Vec<f64>> {
    let n = poly.n;
    let eq: Vec<usize> = (0..poly.m()).filter(|&j| poly.equality[j]).collect();
    let ineq: Vec<usize> = (0..poly.m()).filter(|&j| !poly.equality[j]).collect();
    if eq.len() > n {
        return Vec::new();
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    for extra in ineq.iter().copied().combinations(n - eq.len()) {
        let rows: Vec<usize> = eq.iter().copied().chain(extra).collect();
        let a = rows.iter().map(|&j| poly.a[j].clone()).collect();
        let b = rows.iter().map(|&j| poly.b[j]).collect();
        let Some(v) = solve_square(a, b) else { continue };
        let feasible = (0..poly.m()).all(|j| {
            let act = dot(&poly.a[j], &v);
            let tol = 1e-9 * (1.0 + poly.b[j].abs());
            if poly.equality[j] {
                (act - poly.b[j]).abs() <= tol
            } else {
                act >= poly.b[j] - tol
            }
        });
        if feasible && !found.iter().any(|w| w.iter().zip(&v).all(|(p, q)| (p - q).abs() < 1e-8)) {
            found.push(v);
        }
    }
    found
}

/// Vertices minimizing `c_hat`, i.e. the vertex set of the optimal face.
pub fn face_vertices<'a>(verts: &'a [Vec<f64>], c_hat: &[f64]) -> Vec<&'a Vec<f64>> {
    let best = verts.iter().map(|v| dot(c_hat, v)).fold(f64::INFINITY, f64::min);
    let scale = c_hat.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    verts.iter().filter(|v| dot(c_hat, v) - best <= 1e-9 * (scale + best.abs())).collect()
}

pub fn brute_zstar(verts: &[Vec<f64>], c: &[f64]) -> f64 {
    verts.iter().map(|v| dot(c, v)).fold(f64::INFINITY, f64::min)
}

pub fn brute_pessimistic(verts: &[Vec<f64>], c: &[f64], c_hat: &[f64]) -> f64 {
    let worst = face_vertices(verts, c_hat).iter().map(|v| dot(c, v)).fold(f64::NEG_INFINITY, f64::max);
    worst - brute_zstar(verts, c)
}

pub fn brute_optimistic(verts: &[Vec<f64>], c: &[f64], c_hat: &[f64]) -> f64 {
    let best = face_vertices(verts, c_hat).iter().map(|v| dot(c, v)).fold(f64::INFINITY, f64::min);
    best - brute_zstar(verts, c)
}

/// A random polytope with at most `max_vars` variables and at most 10
/// vertices: a weighted simplex cut by up to two random halfspaces through
/// an interior point, sometimes sliced by an equality.
pub fn random_polytope(rng: &mut ChaCha8Rng, max_vars: usize) -> (NominalProblem, Vec<Vec<f64>>) {
    loop {
        let n = rng.random_range(2..=max_vars);
        let mut a: Vec<Vec<f64>> = Vec::new();
        let mut b = Vec::new();
        let mut eq = Vec::new();
        for j in 0..n {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            a.push(row);
            b.push(0.0);
            eq.push(false);
        }
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        a.push(w.iter().map(|x| -x).collect());
        b.push(-1.0);
        eq.push(false);

        // Interior point: a strictly positive point well inside the simplex.
        let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let load = dot(&w, &p);
        let shrink = rng.random_range(0.3..0.8) / load;
        p.iter_mut().for_each(|x| *x *= shrink);

        for _ in 0..rng.random_range(0..=2) {
            let g = normal_vec(rng, n);
            let offset = rng.random_range(0.0..0.05);
            b.push(dot(&g, &p) - offset);
            a.push(g);
            eq.push(false);
        }
        if n >= 3 && rng.random_bool(0.2) {
            let g: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            b.push(dot(&g, &p));
            a.push(g);
            eq.push(true);
        }
        let Ok(problem) = custom(a, b, eq) else { continue };
        let verts = vertices(&problem.polytope);
        if (2..=10).contains(&verts.len()) {
            return (problem, verts);
        }
    }
}

/// A prediction that often has a non-trivial optimal face: random, zero, a
/// facet normal, or a sum of two facet normals.
pub fn face_probing_prediction(rng: &mut ChaCha8Rng, poly: &Polytope) -> Vec<f64> {
    let n = poly.n;
    let scale = rng.random_range(0.1..10.0);
    match rng.random_range(0..4) {
        0 => normal_vec(rng, n),
        1 => vec![0.0; n],
        2 => poly.a[rng.random_range(0..poly.m())].iter().map(|x| x * scale).collect(),
        _ => {
            let (i, j) = (rng.random_range(0..poly.m()), rng.random_range(0..poly.m()));
            (0..n).map(|k| scale * (poly.a[i][k] + poly.a[j][k])).collect()
        }
    }
}
