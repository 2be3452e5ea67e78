use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Termination, TrainConfig, TrainTrace};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, Row, Sense};
use crate::model::{augment, LinearModel};
use crate::regret::{unit_scaled, RegretOracle};

/// Optimal duals of one sample's inner maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDuals {
    /// One entry per polytope row; `<= 0` on inequality rows.
    pub mu: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: f64,
}

pub type Lp1Duals = Vec<SampleDuals>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lp1Solution {
    pub duals: Lp1Duals,
    /// Optimal value, equal to `Lambda(omega) + mean z*`.
    pub value: f64,
    pub mean_zstar: f64,
}

impl Lp1Solution {
    pub fn lambda(&self) -> f64 {
        self.value - self.mean_zstar
    }
}

fn column_lists(oracle: &RegretOracle<'_>) -> Vec<Vec<(usize, f64)>> {
    let poly = &oracle.problem().polytope;
    let mut columns = vec![Vec::new(); poly.n];
    for j in 0..poly.m() {
        for (a, coef) in poly.row_entries(j) {
            columns[a].push((j, coef));
        }
    }
    columns
}

/// Dual of the pessimistic inner problem for fixed `omega`.
///
/// Per sample, over `(mu, delta, gamma)`:
///
/// ```text
/// min  b'mu + c_hat'delta
/// s.t. A'mu + gamma c_hat = c / N
///      A delta - gamma b >= 0   (= 0 on equality rows)
///      mu <= 0 (free on equality rows),  gamma >= 0
/// ```
///
/// The problem separates over samples, so each is solved on its own.
pub fn solve_lp1_fixed_omega(oracle: &RegretOracle<'_>, model: &LinearModel) -> Result<Lp1Solution> {
    let problem = oracle.problem();
    let poly = &problem.polytope;
    let (n, m) = (problem.n(), poly.m());
    let raw = oracle.features().first().map_or(model.raw_features(), Vec::len);
    model.check_dims(n, raw)?;
    let inv_n = 1.0 / oracle.len().max(1) as f64;
    let columns = column_lists(oracle);

    let mut duals = Vec::with_capacity(oracle.len());
    let mut value = 0.0;
    for (x, c) in oracle.features().iter().zip(oracle.costs()) {
        // Solved with c_hat scaled to unit magnitude; delta and gamma are
        // mapped back afterwards.
        let (c_hat, scale) = unit_scaled(&model.predict(x));
        let gamma = m + n;
        let mut lp = LpProblem::new(m + n + 1);
        lp.set_bounds(gamma, 0.0, f64::INFINITY);
        for j in 0..m {
            lp.objective[j] = poly.b[j];
            if !poly.equality[j] {
                lp.set_bounds(j, f64::NEG_INFINITY, 0.0);
            }
        }
        lp.objective[m..m + n].copy_from_slice(&c_hat);
        for a in 0..n {
            let entries = columns[a].iter().copied().chain(std::iter::once((gamma, c_hat[a])));
            lp.add_row(Row::new(entries, Sense::Eq, c[a] * inv_n));
        }
        for j in 0..m {
            let sense = if poly.equality[j] { Sense::Eq } else { Sense::Ge };
            let entries = poly.row_entries(j).map(|(a, coef)| (m + a, coef)).chain(std::iter::once((gamma, -poly.b[j])));
            lp.add_constraint(Row::new(entries, sense, 0.0));
        }
        let sol = lp::solve(&lp)?;
        if !sol.is_optimal() {
            return Err(Error::NumericalFailure(format!("fixed-omega dual LP ended {:?}", sol.status)));
        }
        value += sol.objective;
        duals.push(SampleDuals {
            mu: sol.primal[..m].to_vec(),
            delta: sol.primal[m..m + n].iter().map(|v| v / scale).collect(),
            gamma: sol.primal[gamma].max(0.0) / scale,
        });
    }
    Ok(Lp1Solution { duals, value, mean_zstar: oracle.mean_zstar() })
}

/// Minimizes over `omega` (boxed by `omega_bound`) and `mu` with `delta` and
/// `gamma` held at the given values:
///
/// ```text
/// min  sum_i b'mu_i + (omega x_i)'delta_i
/// s.t. A'mu_i + gamma_i omega x_i = c_i / N,   mu_i <= 0,   |omega| <= B
/// ```
///
/// `template` supplies the model shape. Returns the model and the optimal value.
pub fn solve_lp2_fixed_duals(
    oracle: &RegretOracle<'_>,
    duals: &[SampleDuals],
    template: &LinearModel,
    omega_bound: f64,
) -> Result<(LinearModel, f64)> {
    if !(omega_bound > 0.0) {
        return Err(Error::InvalidParam("omega_bound must be positive".into()));
    }
    if duals.len() != oracle.len() {
        return Err(Error::InvalidDimension(format!("{} dual blocks for {} samples", duals.len(), oracle.len())));
    }
    let problem = oracle.problem();
    let poly = &problem.polytope;
    let (n, m) = (problem.n(), poly.m());
    let raw = oracle.features().first().map_or(template.raw_features(), Vec::len);
    template.check_dims(n, raw)?;
    let k = template.k;
    let n_omega = n * k;
    let inv_n = 1.0 / oracle.len().max(1) as f64;
    let columns = column_lists(oracle);

    let mut lp = LpProblem::new(n_omega + oracle.len() * m);
    for w in 0..n_omega {
        lp.set_bounds(w, -omega_bound, omega_bound);
    }
    for (i, ((x, c), d)) in oracle.features().iter().zip(oracle.costs()).zip(duals).enumerate() {
        if d.mu.len() != m || d.delta.len() != n {
            return Err(Error::InvalidDimension("dual block does not match the polytope".into()));
        }
        let z = augment(x, template.bias);
        let base = n_omega + i * m;
        for j in 0..m {
            lp.objective[base + j] = poly.b[j];
            if !poly.equality[j] {
                lp.set_bounds(base + j, f64::NEG_INFINITY, 0.0);
            }
        }
        for a in 0..n {
            for (kk, &zk) in z.iter().enumerate() {
                lp.objective[a * k + kk] += d.delta[a] * zk;
            }
            let entries = columns[a]
                .iter()
                .map(|&(j, coef)| (base + j, coef))
                .chain(z.iter().enumerate().map(|(kk, &zk)| (a * k + kk, d.gamma * zk)));
            lp.add_row(Row::new(entries, Sense::Eq, c[a] * inv_n));
        }
    }
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Infeasible("no omega inside the box satisfies the fixed-dual constraints".into()))
        }
        LpStatus::Unbounded => return Err(Error::NumericalFailure("fixed-dual LP reported unbounded".into())),
    }
    let mut model = template.clone();
    model.omega.copy_from_slice(&sol.primal[..n_omega]);
    Ok((model, sol.objective))
}

/// Alternates between the dual LP at fixed `omega` and the LP over `omega` at
/// fixed `(delta, gamma)`. `Lambda` of every iterate is recomputed with the
/// regret oracle; the best iterate is returned.
pub fn alternating(
    oracle: &RegretOracle<'_>,
    model0: &LinearModel,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainTrace)> {
    cfg.validate()?;
    let started = Instant::now();
    let budget = cfg.alt_budget_s.map(Duration::from_secs_f64);

    let mut current = model0.clone();
    let mut current_lambda = oracle.lambda(&current)?;
    let mut trace = TrainTrace::start(current_lambda);
    let mut best = (current.clone(), current_lambda);
    let mut stalled = 0;

    for _ in 0..cfg.alt_iters {
        if budget.is_some_and(|b| started.elapsed() >= b) {
            trace.termination = Termination::TimeBudget;
            break;
        }
        let lp1 = solve_lp1_fixed_omega(oracle, &current)?;
        let next = match solve_lp2_fixed_duals(oracle, &lp1.duals, &current, cfg.omega_bound) {
            Ok((model, _)) => model,
            Err(Error::Infeasible(_)) => {
                trace.termination = Termination::Lp2Infeasible;
                break;
            }
            Err(e) => return Err(e),
        };
        let lambda = oracle.lambda(&next)?;
        trace.oracle_calls += 1;
        trace.iterations += 1;
        trace.lambdas.push(lambda);
        trace.wall_s.push(started.elapsed().as_secs_f64());

        let improvement = current_lambda - lambda;
        current = next;
        current_lambda = lambda;
        if lambda < best.1 {
            best = (current.clone(), lambda);
        }
        if improvement < cfg.alt_tol {
            stalled += 1;
            if stalled >= cfg.alt_patience {
                trace.termination = Termination::Converged;
                break;
            }
        } else {
            stalled = 0;
        }
    }
    Ok((best.0, trace))
}
