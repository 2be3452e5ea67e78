//! Linear programming kernel.
//!
//! Problems are stated as `min c'v` over a list of `GE`/`LE`/`EQ` rows plus
//! optional per-variable bounds. The solver is a bounded-variable revised
//! simplex (two phases, sparse LU basis factors) that reports a primal vertex,
//! row duals, reduced costs and the set of canonical rows that are tight.
//!
//! Every problem has a canonical form with only `a'v >= b` rows and free
//! variables: `LE` rows are negated, `EQ` rows become a `GE` pair and finite
//! bounds are lifted into rows. [`LpSolution::canonical_dual`] maps the solver
//! duals onto that form so that `A'rho = c`, `rho >= 0` and `c'v = b'rho`.

mod lu;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use simplex::SimplexOptions;

/// Primal and dual feasibility tolerance used by the kernel.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost tolerance used by the kernel.
pub const OPT_TOL: f64 = 1e-9;
/// Tolerance for reporting a row as tight.
pub const ACTIVE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

/// One linear constraint `coeffs . v (sense) rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    /// Builds a row from `(index, coefficient)` pairs. Entries are sorted,
    /// duplicates summed and exact zeros dropped.
    pub fn new(coeffs: impl IntoIterator<Item = (usize, f64)>, sense: Sense, rhs: f64) -> Self {
        let mut entries: Vec<(usize, f64)> = coeffs.into_iter().collect();
        entries.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (j, a) in entries {
            match merged.last_mut() {
                Some((k, acc)) if *k == j => *acc += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        Row { coeffs: merged, sense, rhs }
    }

    pub fn dense(coeffs: &[f64], sense: Sense, rhs: f64) -> Self {
        Row::new(coeffs.iter().copied().enumerate(), sense, rhs)
    }

    pub fn activity(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * v[j]).sum()
    }

    fn negated(&self, sense: Sense) -> Row {
        Row { coeffs: self.coeffs.iter().map(|&(j, a)| (j, -a)).collect(), sense, rhs: -self.rhs }
    }
}

/// A linear program in minimization sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Where a canonical row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalOrigin {
    /// Original row, kept (`GE`) or negated (`LE`).
    Row(usize),
    /// Upper half `-a'v >= -b` of a split `EQ` row.
    EqNegated(usize),
    LowerBound(usize),
    UpperBound(usize),
}

impl LpProblem {
    /// A problem with `n_vars` free variables, zero objective and no rows.
    pub fn new(n_vars: usize) -> Self {
        LpProblem {
            n_vars,
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    /// Adds `row`, except that a single-variable row with zero rhs is folded
    /// into that variable's bounds.
    pub fn add_constraint(&mut self, row: Row) {
        if let ([(j, a)], 0.0) = (row.coeffs.as_slice(), row.rhs) {
            let sense = match (row.sense, *a > 0.0) {
                (Sense::Eq, _) => Sense::Eq,
                (s, true) => s,
                (Sense::Ge, false) => Sense::Le,
                (Sense::Le, false) => Sense::Ge,
            };
            let j = *j;
            if matches!(sense, Sense::Ge | Sense::Eq) {
                self.lower[j] = self.lower[j].max(0.0);
            }
            if matches!(sense, Sense::Le | Sense::Eq) {
                self.upper[j] = self.upper[j].min(0.0);
            }
            return;
        }
        self.rows.push(row);
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
    }

    /// Appends a fresh free variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.n_vars += 1;
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.n_vars - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.n_vars {
            return Err(Error::MalformedProblem(format!(
                "objective has length {} but n_vars = {}",
                self.objective.len(),
                self.n_vars
            )));
        }
        if self.lower.len() != self.n_vars || self.upper.len() != self.n_vars {
            return Err(Error::MalformedProblem("bound vectors do not match n_vars".into()));
        }
        if let Some(c) = self.objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::MalformedProblem(format!("non-finite objective coefficient {c}")));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::MalformedProblem(format!("invalid bounds [{lo}, {hi}] on variable {j}")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedProblem(format!("row {i} has non-finite rhs")));
            }
            for &(j, a) in &row.coeffs {
                if j >= self.n_vars {
                    return Err(Error::MalformedProblem(format!(
                        "row {i} references variable {j} but n_vars = {}",
                        self.n_vars
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedProblem(format!("row {i} has non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Rewrites the problem with `GE` rows only and no variable bounds.
    pub fn canonicalize(&self) -> LpProblem {
        let (rows, _) = self.canonical_rows();
        LpProblem {
            n_vars: self.n_vars,
            objective: self.objective.clone(),
            rows,
            lower: vec![f64::NEG_INFINITY; self.n_vars],
            upper: vec![f64::INFINITY; self.n_vars],
        }
    }

    /// Canonical rows together with their origin.
    pub fn canonical_rows(&self) -> (Vec<Row>, Vec<CanonicalOrigin>) {
        let mut rows = Vec::new();
        let mut origin = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            match row.sense {
                Sense::Ge => {
                    rows.push(row.clone());
                    origin.push(CanonicalOrigin::Row(i));
                }
                Sense::Le => {
                    rows.push(row.negated(Sense::Ge));
                    origin.push(CanonicalOrigin::Row(i));
                }
                Sense::Eq => {
                    rows.push(Row { sense: Sense::Ge, ..row.clone() });
                    origin.push(CanonicalOrigin::Row(i));
                    rows.push(row.negated(Sense::Ge));
                    origin.push(CanonicalOrigin::EqNegated(i));
                }
            }
        }
        for j in 0..self.n_vars {
            if self.lower[j].is_finite() {
                rows.push(Row::new([(j, 1.0)], Sense::Ge, self.lower[j]));
                origin.push(CanonicalOrigin::LowerBound(j));
            }
            if self.upper[j].is_finite() {
                rows.push(Row::new([(j, -1.0)], Sense::Ge, -self.upper[j]));
                origin.push(CanonicalOrigin::UpperBound(j));
            }
        }
        (rows, origin)
    }

    /// Largest violation of any row or bound at `v`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let act = row.activity(v);
            let viol = match row.sense {
                Sense::Ge => row.rhs - act,
                Sense::Le => act - row.rhs,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        for j in 0..self.n_vars {
            worst = worst.max(self.lower[j] - v[j]).max(v[j] - self.upper[j]);
        }
        worst
    }

    pub fn is_feasible(&self, v: &[f64], tol: f64) -> bool {
        self.max_violation(v) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal vertex; empty unless optimal.
    pub primal: Vec<f64>,
    /// One dual per original row: `>= 0` on `GE`, `<= 0` on `LE`, free on `EQ`.
    pub row_duals: Vec<f64>,
    /// `c - A'y` per variable; nonzero only for variables resting at a bound.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Canonical row indices tight at `primal` within [`ACTIVE_TOL`].
    pub active_rows: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Duals aligned with [`LpProblem::canonical_rows`], all nonnegative.
    /// A split `EQ` row reports its free dual as the difference of the pair.
    pub fn canonical_dual(&self, lp: &LpProblem) -> Vec<f64> {
        let (_, origin) = lp.canonical_rows();
        origin
            .iter()
            .map(|o| match *o {
                CanonicalOrigin::Row(i) => match lp.rows[i].sense {
                    Sense::Ge => self.row_duals[i],
                    Sense::Le => -self.row_duals[i],
                    Sense::Eq => self.row_duals[i].max(0.0),
                },
                CanonicalOrigin::EqNegated(i) => (-self.row_duals[i]).max(0.0),
                CanonicalOrigin::LowerBound(j) => {
                    let d = self.reduced_costs[j];
                    if lp.upper[j].is_finite() {
                        d.max(0.0)
                    } else {
                        d
                    }
                }
                CanonicalOrigin::UpperBound(j) => {
                    let d = self.reduced_costs[j];
                    if lp.lower[j].is_finite() {
                        (-d).max(0.0)
                    } else {
                        -d
                    }
                }
            })
            .collect()
    }
}

/// Solves `lp` with the default kernel options.
pub fn solve(lp: &LpProblem) -> Result<LpSolution> {
    simplex::solve_with(lp, &SimplexOptions::default())
}

pub fn solve_with(lp: &LpProblem, options: &SimplexOptions) -> Result<LpSolution> {
    simplex::solve_with(lp, options)
}

/// Canonical row indices tight at `v`.
pub fn active_rows(lp: &LpProblem, v: &[f64], tol: f64) -> Vec<usize> {
    let (rows, _) = lp.canonical_rows();
    rows.iter()
        .enumerate()
        .filter(|(_, r)| (r.activity(v) - r.rhs).abs() <= tol * (1.0 + r.rhs.abs()))
        .map(|(k, _)| k)
        .collect()
}

/// True iff the feasible region of `lp` is non-empty and bounded.
///
/// Feasibility is checked with a zero objective; boundedness by minimizing and
/// maximizing every coordinate.
pub fn assert_bounded_nonempty(lp: &LpProblem) -> Result<bool> {
    let mut probe = lp.clone();
    probe.objective = vec![0.0; lp.n_vars];
    if !solve(&probe)?.is_optimal() {
        return Ok(false);
    }
    for j in 0..lp.n_vars {
        for sign in [1.0, -1.0] {
            probe.objective.iter_mut().for_each(|c| *c = 0.0);
            probe.objective[j] = sign;
            if !solve(&probe)?.is_optimal() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
