//! Deciding whether some linear model attains zero pessimistic regret.
//!
//! When every sample's true optimum is unique, zero regret is achievable iff
//! there are `omega` and multipliers `rho_i` with `A'rho_i = omega x_i`,
//! `rho_ij >= 1` on the rows active at `v*(c_i)` and `rho_ij = 0` elsewhere.
//! Strict positivity on the whole active set pins the predicted optimal face
//! to the single vertex `v*(c_i)`. The system is a single feasibility LP.

use serde::{Deserialize, Serialize};

use crate::datagen::Sample;
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, Row, Sense, ACTIVE_TOL};
use crate::model::{augment, LinearModel};
use crate::problems::NominalProblem;
use crate::regret::{true_optimum, RegretOracle};

/// Coordinates whose range over the optimal face exceeds this are not unique.
pub const UNIQUENESS_TOL: f64 = 1e-7;
/// A certificate is accepted when its `Lambda` is at most this.
pub const CERTIFICATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniqueness {
    pub unique: bool,
    pub zstar: f64,
    pub vstar: Vec<f64>,
    /// Polytope rows tight at `vstar`.
    pub active_set: Vec<usize>,
}

/// Checks whether `argmin { c'v : v in V }` is a single point by minimizing
/// and maximizing every coordinate over the optimal face.
pub fn check_uniqueness(problem: &NominalProblem, c: &[f64]) -> Result<Uniqueness> {
    let (zstar, vstar) = true_optimum(problem, c)?;
    let n = problem.n();
    let mut face = problem.lp.clone();
    let slack = 1e-9 * (1.0 + zstar.abs());
    face.add_row(Row::new(c.iter().copied().enumerate(), Sense::Le, zstar + slack));
    let mut unique = true;
    for a in 0..n {
        let mut range = [0.0; 2];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            face.objective = vec![0.0; n];
            face.objective[a] = sign;
            let sol = lp::solve(&face)?;
            if !sol.is_optimal() {
                return Err(Error::NumericalFailure(format!("optimal-face LP ended {:?}", sol.status)));
            }
            range[slot] = sign * sol.objective;
        }
        if range[1] - range[0] > UNIQUENESS_TOL {
            unique = false;
            break;
        }
    }
    let active_set = problem.polytope.tight_rows(&vstar, ACTIVE_TOL);
    Ok(Uniqueness { unique, zstar, vstar, active_set })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    /// Some sample has more than one true optimum, so the test does not apply.
    AssumptionViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub model: LinearModel,
    /// One multiplier vector per sample, indexed by polytope row.
    pub rho: Vec<Vec<f64>>,
    /// `Lambda` of `model`, recomputed by the regret oracle.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroRegretVerdict {
    pub answer: Answer,
    pub certificate: Option<Certificate>,
    pub active_sets: Vec<Vec<usize>>,
    pub unique: Vec<bool>,
}

/// Decides whether a linear model (with an intercept column when `bias` is
/// set) attains zero pessimistic regret on `samples`.
pub fn zero_regret_certificate(problem: &NominalProblem, samples: &[&Sample], bias: bool) -> Result<ZeroRegretVerdict> {
    let reports = samples
        .iter()
        .map(|s| check_uniqueness(problem, &s.c))
        .collect::<Result<Vec<_>>>()?;
    let active_sets: Vec<Vec<usize>> = reports.iter().map(|r| r.active_set.clone()).collect();
    let unique: Vec<bool> = reports.iter().map(|r| r.unique).collect();
    if unique.iter().any(|u| !u) {
        return Ok(ZeroRegretVerdict { answer: Answer::AssumptionViolated, certificate: None, active_sets, unique });
    }

    let poly = &problem.polytope;
    let (n, m) = (problem.n(), poly.m());
    let raw = samples.first().map_or(0, |s| s.x.len());
    if samples.iter().any(|s| s.x.len() != raw) {
        return Err(Error::InvalidDimension("samples have differing feature counts".into()));
    }
    let k = raw + usize::from(bias);
    let n_omega = n * k;
    let mut lp = LpProblem::new(n_omega + samples.len() * m);
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..m {
        for (a, coef) in poly.row_entries(j) {
            columns[a].push((j, coef));
        }
    }
    for (i, (s, active)) in samples.iter().zip(&active_sets).enumerate() {
        let base = n_omega + i * m;
        for j in 0..m {
            lp.set_bounds(base + j, 0.0, 0.0);
        }
        for &j in active {
            if poly.equality[j] {
                lp.set_bounds(base + j, f64::NEG_INFINITY, f64::INFINITY);
            } else {
                lp.set_bounds(base + j, 1.0, f64::INFINITY);
            }
        }
        let z = augment(&s.x, bias);
        for a in 0..n {
            let entries = columns[a]
                .iter()
                .map(|&(j, coef)| (base + j, coef))
                .chain(z.iter().enumerate().map(|(kk, &zk)| (a * k + kk, -zk)));
            lp.add_row(Row::new(entries, Sense::Eq, 0.0));
        }
    }
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Infeasible => {
            return Ok(ZeroRegretVerdict { answer: Answer::No, certificate: None, active_sets, unique });
        }
        LpStatus::Unbounded => return Err(Error::NumericalFailure("feasibility LP reported unbounded".into())),
        LpStatus::Optimal => {}
    }
    let mut model = LinearModel::zeros(n, raw, bias);
    model.omega.copy_from_slice(&sol.primal[..n_omega]);
    let rho = (0..samples.len())
        .map(|i| sol.primal[n_omega + i * m..n_omega + (i + 1) * m].to_vec())
        .collect();
    let lambda = RegretOracle::new(problem, samples)?.lambda(&model)?;
    if lambda > CERTIFICATE_TOL {
        return Err(Error::NumericalFailure(format!(
            "certificate failed validation: Lambda = {lambda:e}"
        )));
    }
    Ok(ZeroRegretVerdict {
        answer: Answer::Yes,
        certificate: Some(Certificate { model, rho, lambda }),
        active_sets,
        unique,
    })
}
