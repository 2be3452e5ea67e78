//! Exact regret of a linear model.
//!
//! For each sample the worst (pessimistic) or best (optimistic) true cost over
//! the optimal face `V*(c_hat)` is found with a single LP that couples primal
//! feasibility, dual feasibility and the strong-duality inequality:
//!
//! ```text
//! max/min  c'v   s.t.  v in V,  A'rho = c_hat,  rho >= 0 (free on equality rows),  c_hat'v <= b'rho
//! ```
//!
//! Samples are independent, so the joint problem splits into one LP per sample.

use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Sample, SplitKind};
use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, LpStatus, Row, Sense};
use crate::model::LinearModel;
use crate::problems::NominalProblem;

/// Per-sample regret below `-NEGATIVE_REGRET_TOL * (1 + |z*|)` is reported as
/// a numerical failure; smaller round-off is clamped to zero.
pub const NEGATIVE_REGRET_TOL: f64 = 1e-7;
const NORMALIZATION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegretMode {
    Pessimistic,
    Optimistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub mode: RegretMode,
    pub per_sample_regret: Vec<f64>,
    pub per_sample_zstar: Vec<f64>,
    pub mean_regret: f64,
    /// `None` when `|sum z*|` is too small to normalize by.
    pub normalized_regret: Option<f64>,
}

/// `z*(c)` and an optimal vertex.
pub fn true_optimum(problem: &NominalProblem, c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut lp = problem.lp.clone();
    lp.objective = c.to_vec();
    let sol = lp::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.objective, sol.primal)),
        LpStatus::Infeasible => Err(Error::Infeasible("nominal problem has no feasible point".into())),
        LpStatus::Unbounded => Err(Error::Unbounded("nominal problem is unbounded".into())),
    }
}

/// The face LP for one sample. Variables are `v` (first `n`) then `rho`.
pub fn face_lp(problem: &NominalProblem, c: &[f64], c_hat: &[f64], mode: RegretMode) -> LpProblem {
    let poly = &problem.polytope;
    let n = problem.n();
    let m = poly.m();
    // The face of c_hat is invariant under positive scaling.
    let c_hat = unit_scaled(c_hat).0;
    let mut lp = LpProblem::new(n + m);
    let sign = match mode {
        RegretMode::Pessimistic => -1.0,
        RegretMode::Optimistic => 1.0,
    };
    for (a, &ca) in c.iter().enumerate() {
        lp.objective[a] = sign * ca;
    }
    // v in V, with the problem's native rows and bounds.
    for row in &problem.lp.rows {
        lp.add_row(row.clone());
    }
    for a in 0..n {
        lp.set_bounds(a, problem.lp.lower[a], problem.lp.upper[a]);
    }
    // Dual feasibility.
    for j in 0..m {
        if !poly.equality[j] {
            lp.set_bounds(n + j, 0.0, f64::INFINITY);
        }
    }
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..m {
        for (a, coef) in poly.row_entries(j) {
            columns[a].push((n + j, coef));
        }
    }
    for (a, col) in columns.into_iter().enumerate() {
        lp.add_row(Row::new(col, Sense::Eq, c_hat[a]));
    }
    // Strong duality: c_hat'v - b'rho <= 0.
    let sd = c_hat
        .iter()
        .enumerate()
        .map(|(a, &w)| (a, w))
        .chain(poly.b.iter().enumerate().map(|(j, &bj)| (n + j, -bj)));
    lp.add_row(Row::new(sd, Sense::Le, 0.0));
    lp
}

/// `c_hat` divided by its largest magnitude, and that magnitude.
pub(crate) fn unit_scaled(c_hat: &[f64]) -> (Vec<f64>, f64) {
    let scale = c_hat.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale > 0.0 {
        (c_hat.iter().map(|v| v / scale).collect(), scale)
    } else {
        (c_hat.to_vec(), 1.0)
    }
}

/// Regret of one sample's prediction `c_hat` given `z*(c)`.
pub fn sample_regret(problem: &NominalProblem, c: &[f64], c_hat: &[f64], zstar: f64, mode: RegretMode) -> Result<f64> {
    let lp = face_lp(problem, c, c_hat, mode);
    let sol = lp::solve(&lp)?;
    if !sol.is_optimal() {
        return Err(Error::NumericalFailure(format!("face LP ended {:?}; it is always feasible and bounded", sol.status)));
    }
    let value: f64 = c.iter().zip(&sol.primal).map(|(ci, vi)| ci * vi).sum();
    let regret = value - zstar;
    if regret < -NEGATIVE_REGRET_TOL * (1.0 + zstar.abs()) {
        return Err(Error::NumericalFailure(format!("face LP beat the true optimum by {:e}", -regret)));
    }
    Ok(regret.max(0.0))
}

/// Samples with their true optima precomputed, ready for repeated evaluation.
#[derive(Debug, Clone)]
pub struct RegretOracle<'p> {
    problem: &'p NominalProblem,
    xs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    zstar: Vec<f64>,
    vstar: Vec<Vec<f64>>,
}

impl<'p> RegretOracle<'p> {
    pub fn new(problem: &'p NominalProblem, samples: &[&Sample]) -> Result<Self> {
        let mut zstar = Vec::with_capacity(samples.len());
        let mut vstar = Vec::with_capacity(samples.len());
        for s in samples {
            if s.c.len() != problem.n() {
                return Err(Error::InvalidDimension(format!(
                    "cost vector has length {} but the problem has {} arcs",
                    s.c.len(),
                    problem.n()
                )));
            }
            let (z, v) = true_optimum(problem, &s.c)?;
            zstar.push(z);
            vstar.push(v);
        }
        Ok(RegretOracle {
            problem,
            xs: samples.iter().map(|s| s.x.clone()).collect(),
            cs: samples.iter().map(|s| s.c.clone()).collect(),
            zstar,
            vstar,
        })
    }

    pub fn for_split(problem: &'p NominalProblem, dataset: &Dataset, split: SplitKind) -> Result<Self> {
        Self::new(problem, &dataset.subset(split))
    }

    pub fn problem(&self) -> &'p NominalProblem {
        self.problem
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn costs(&self) -> &[Vec<f64>] {
        &self.cs
    }

    pub fn zstar(&self) -> &[f64] {
        &self.zstar
    }

    pub fn vstar(&self) -> &[Vec<f64>] {
        &self.vstar
    }

    /// `(1/N) sum z*(c^i)`.
    pub fn mean_zstar(&self) -> f64 {
        if self.zstar.is_empty() {
            0.0
        } else {
            self.zstar.iter().sum::<f64>() / self.zstar.len() as f64
        }
    }

    pub fn evaluate(&self, model: &LinearModel, mode: RegretMode) -> Result<RegretReport> {
        let raw = self.xs.first().map_or(model.raw_features(), Vec::len);
        model.check_dims(self.problem.n(), raw)?;
        let per_sample_regret = self
            .xs
            .iter()
            .zip(&self.cs)
            .zip(&self.zstar)
            .map(|((x, c), &z)| sample_regret(self.problem, c, &model.predict(x), z, mode))
            .collect::<Result<Vec<f64>>>()?;
        let n = per_sample_regret.len().max(1) as f64;
        let mean_regret = per_sample_regret.iter().sum::<f64>() / n;
        let mut report = RegretReport {
            mode,
            per_sample_regret,
            per_sample_zstar: self.zstar.clone(),
            mean_regret,
            normalized_regret: None,
        };
        report.normalized_regret = normalize(&report).ok();
        Ok(report)
    }

    /// The pessimistic mean regret, `Lambda(omega)`.
    pub fn lambda(&self, model: &LinearModel) -> Result<f64> {
        Ok(self.evaluate(model, RegretMode::Pessimistic)?.mean_regret)
    }
}

pub fn pessimistic_regret(
    problem: &NominalProblem,
    dataset: &Dataset,
    split: SplitKind,
    model: &LinearModel,
) -> Result<RegretReport> {
    RegretOracle::for_split(problem, dataset, split)?.evaluate(model, RegretMode::Pessimistic)
}

pub fn optimistic_regret(
    problem: &NominalProblem,
    dataset: &Dataset,
    split: SplitKind,
    model: &LinearModel,
) -> Result<RegretReport> {
    RegretOracle::for_split(problem, dataset, split)?.evaluate(model, RegretMode::Optimistic)
}

/// Total regret divided by `|sum z*|`.
pub fn normalize(report: &RegretReport) -> Result<f64> {
    let total_z: f64 = report.per_sample_zstar.iter().sum();
    if total_z.abs() < NORMALIZATION_FLOOR {
        return Err(Error::DegenerateNormalization(total_z.abs()));
    }
    Ok(report.per_sample_regret.iter().sum::<f64>() / total_z.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::triangle;

    #[test]
    fn triangle_true_optima() {
        let p = triangle();
        let (z, v) = true_optimum(&p, &[-3.0, -2.0]).unwrap();
        assert!((z + 3.0).abs() < 1e-12 && (v[0] - 1.0).abs() < 1e-12);
        let (z, v) = true_optimum(&p, &[-2.0, -5.0]).unwrap();
        assert!((z + 5.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        let (z, _) = true_optimum(&p, &[0.0, 0.0]).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn flat_prediction_regret() {
        let p = triangle();
        let c = [-3.0, -2.0];
        let pess = sample_regret(&p, &c, &[0.0, 0.0], -3.0, RegretMode::Pessimistic).unwrap();
        let opt = sample_regret(&p, &c, &[0.0, 0.0], -3.0, RegretMode::Optimistic).unwrap();
        assert!((pess - 3.0).abs() < 1e-9);
        assert!(opt.abs() < 1e-9);
    }

    fn report(regrets: &[f64], zstar: &[f64]) -> RegretReport {
        RegretReport {
            mode: RegretMode::Pessimistic,
            per_sample_regret: regrets.to_vec(),
            per_sample_zstar: zstar.to_vec(),
            mean_regret: 0.0,
            normalized_regret: None,
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(&report(&[1.0, 1.0], &[2.0, 2.0])).unwrap(), 0.5);
        assert_eq!(normalize(&report(&[0.0, 0.0], &[2.0, 2.0])).unwrap(), 0.0);
        assert_eq!(normalize(&report(&[1.0, 0.0], &[-1.0, -3.0])).unwrap(), 0.25);
        assert!(matches!(normalize(&report(&[1.0], &[0.0])), Err(Error::DegenerateNormalization(_))));
    }
}
