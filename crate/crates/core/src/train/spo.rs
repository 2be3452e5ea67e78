use crate::datagen::{Dataset, SplitKind};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, Row, Sense};
use crate::model::{augment, LinearModel};
use crate::problems::NominalProblem;
use crate::regret::{true_optimum, RegretOracle};

/// SPO+ surrogate `max_v (c - 2 c_hat)'v + 2 c_hat'v*(c) - z*(c)`.
pub fn spo_plus_loss(problem: &NominalProblem, c: &[f64], c_hat: &[f64]) -> Result<f64> {
    let (zstar, vstar) = true_optimum(problem, c)?;
    spo_plus_loss_with(problem, c, c_hat, zstar, &vstar)
}

pub(crate) fn spo_plus_loss_with(
    problem: &NominalProblem,
    c: &[f64],
    c_hat: &[f64],
    zstar: f64,
    vstar: &[f64],
) -> Result<f64> {
    let direction: Vec<f64> = c_hat.iter().zip(c).map(|(h, ci)| 2.0 * h - ci).collect();
    let (min_value, _) = true_optimum(problem, &direction)?;
    let anchor: f64 = c_hat.iter().zip(vstar).map(|(h, v)| h * v).sum();
    Ok(-min_value + 2.0 * anchor - zstar)
}

/// The SPO+ training LP over `(omega, rho_1..rho_N)`:
///
/// ```text
/// min (1/N) sum_i ( -b'rho_i + 2 (omega x_i)'v*(c_i) )
/// s.t. -A'rho_i + 2 omega x_i = c_i,   rho_i >= 0 (free on equality rows)
/// ```
///
/// `omega` occupies the first `n * k` variables, row-major.
pub fn spo_plus_lp(oracle: &RegretOracle<'_>, bias: bool) -> LpProblem {
    let problem = oracle.problem();
    let poly = &problem.polytope;
    let (n, m) = (problem.n(), poly.m());
    let n_samples = oracle.len();
    let inputs: Vec<Vec<f64>> = oracle.features().iter().map(|x| augment(x, bias)).collect();
    let k = inputs.first().map_or(usize::from(bias), Vec::len);
    let n_omega = n * k;
    let inv_n = 1.0 / n_samples.max(1) as f64;

    let mut lp = LpProblem::new(n_omega + n_samples * m);
    for (z, vstar) in inputs.iter().zip(oracle.vstar()) {
        for a in 0..n {
            for (kk, &zk) in z.iter().enumerate() {
                lp.objective[a * k + kk] += 2.0 * inv_n * zk * vstar[a];
            }
        }
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..m {
        for (a, coef) in poly.row_entries(j) {
            columns[a].push((j, coef));
        }
    }
    for (i, (z, c)) in inputs.iter().zip(oracle.costs()).enumerate() {
        let base = n_omega + i * m;
        for j in 0..m {
            lp.objective[base + j] = -inv_n * poly.b[j];
            if !poly.equality[j] {
                lp.set_bounds(base + j, 0.0, f64::INFINITY);
            }
        }
        for a in 0..n {
            let entries = columns[a]
                .iter()
                .map(|&(j, coef)| (base + j, -coef))
                .chain(z.iter().enumerate().map(|(kk, &zk)| (a * k + kk, 2.0 * zk)));
            lp.add_row(Row::new(entries, Sense::Eq, c[a]));
        }
    }
    lp
}

/// Fits the SPO+ model on the oracle's samples. Returns the model and the
/// average SPO+ loss it attains.
pub(crate) fn fit_spo_plus(oracle: &RegretOracle<'_>, bias: bool) -> Result<(LinearModel, f64)> {
    let problem = oracle.problem();
    let lp = spo_plus_lp(oracle, bias);
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(Error::Unbounded("SPO+ LP is unbounded; V must be bounded".into())),
        LpStatus::Infeasible => return Err(Error::NumericalFailure("SPO+ LP reported infeasible".into())),
    }
    let raw = oracle.features().first().map_or(0, Vec::len);
    let mut model = LinearModel::zeros(problem.n(), raw, bias);
    model.omega.copy_from_slice(&sol.primal[..problem.n() * model.k]);
    Ok((model, sol.objective - oracle.mean_zstar()))
}

/// SPO+ model trained on the dataset's training split.
pub fn train_spo_plus(problem: &NominalProblem, dataset: &Dataset, bias: bool) -> Result<LinearModel> {
    let oracle = RegretOracle::for_split(problem, dataset, SplitKind::Train)?;
    Ok(fit_spo_plus(&oracle, bias)?.0)
}
