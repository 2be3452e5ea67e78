//! Single-level bilinear reformulations of pessimistic training, built as
//! exportable models for external global solvers.
//!
//! The exact model has, per sample `i`, duals `mu_i` (one per polytope row),
//! `d_i` (one per arc) and a scalar `g_i`, coupled to the regression matrix
//! `w` through bilinear terms:
//!
//! ```text
//! min  sum_i b'mu_i + (w x_i)'d_i
//! s.t. A'mu_i + g_i w x_i = c_i / N
//!      A d_i - g_i b >= 0           (= 0 on equality rows)
//!      mu_i <= 0 (free on equality rows),  g_i >= 0,  |w| <= B
//! ```
//!
//! Rows of `A d_i - g_i b >= 0` that reduce to `d_ia >= 0` are stored as
//! variable bounds. The penalized model fixes every `g_i` to `kappa`, which
//! leaves bilinear terms only in the objective.

pub mod lp_format;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::Sense;
use crate::model::{augment, LinearModel};
use crate::regret::RegretOracle;
use crate::train::SampleDuals;

pub use lp_format::parse_lp_text;

/// Default `kappa` for the penalized model.
pub const DEFAULT_KAPPA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// `sum linear + sum coef * x_p * x_q`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadExpr {
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
}

impl QuadExpr {
    pub fn value(&self, point: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().map(|&(j, c)| c * point[j]).sum();
        let quad: f64 = self.quadratic.iter().map(|&(p, q, c)| c * point[p] * point[q]).sum();
        lin + quad
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub expr: QuadExpr,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Amount by which `point` violates the row (zero when satisfied).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs = self.expr.value(point);
        match self.sense {
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimization problem with a quadratic objective and quadratic rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadProgram {
    pub variables: Vec<Variable>,
    pub objective: QuadExpr,
    pub constraints: Vec<Constraint>,
}

impl QuadProgram {
    pub fn objective_value(&self, point: &[f64]) -> f64 {
        self.objective.value(point)
    }

    /// Largest bound or row violation at `point`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(point)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max);
        self.constraints.iter().map(|c| c.violation(point)).fold(bounds, f64::max)
    }

    pub fn is_feasible(&self, point: &[f64], tol: f64) -> bool {
        point.len() == self.variables.len() && self.max_violation(point) <= tol
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// LP-format text: objective, rows, then bounds for every variable.
    pub fn to_lp_text(&self) -> String {
        lp_format::write(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Exact,
    Penalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub variables: usize,
    /// Structural rows, excluding the optional cut-off row.
    pub constraints: usize,
    /// Rows carrying at least one bilinear term.
    pub bilinear_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcqpMeta {
    pub variant: Variant,
    pub kappa: Option<f64>,
    pub omega_bound: f64,
    pub cutoff_included: bool,
    pub n_samples: usize,
    pub n_arcs: usize,
    pub n_polytope_rows: usize,
    /// Columns of `w`, including the intercept column when `bias` is set.
    pub k: usize,
    pub bias: bool,
    /// `(1/N) sum z*(c_i)`, the constant the cut-off row bounds from below.
    pub mean_zstar: f64,
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcqpModel {
    pub program: QuadProgram,
    pub meta: QcqpMeta,
}

fn add_var(prog: &mut QuadProgram, name: String, lower: f64, upper: f64) -> usize {
    prog.variables.push(Variable { name, lower, upper });
    prog.variables.len() - 1
}

fn w_name(a: usize, k: usize) -> String {
    format!("w_{a}_{k}")
}

fn mu_name(i: usize, j: usize) -> String {
    format!("mu_{i}_{j}")
}

fn d_name(i: usize, a: usize) -> String {
    format!("d_{i}_{a}")
}

fn g_name(i: usize) -> String {
    format!("g_{i}")
}

/// Builds the exact model over the oracle's samples.
pub fn build_exact(oracle: &RegretOracle<'_>, bias: bool, omega_bound: f64, with_cutoff: bool) -> Result<QcqpModel> {
    build(oracle, bias, omega_bound, None, with_cutoff)
}

/// Builds the penalized model with every `g_i` fixed at `kappa`.
pub fn build_penalized(oracle: &RegretOracle<'_>, bias: bool, omega_bound: f64, kappa: f64) -> Result<QcqpModel> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParam(format!("kappa must be positive, got {kappa}")));
    }
    build(oracle, bias, omega_bound, Some(kappa), false)
}

fn build(
    oracle: &RegretOracle<'_>,
    bias: bool,
    omega_bound: f64,
    kappa: Option<f64>,
    with_cutoff: bool,
) -> Result<QcqpModel> {
    if !(omega_bound > 0.0) {
        return Err(Error::InvalidParam("omega_bound must be positive".into()));
    }
    let problem = oracle.problem();
    let poly = &problem.polytope;
    let (n, m) = (problem.n(), poly.m());
    let n_samples = oracle.len();
    let raw = oracle.features().first().map_or(0, Vec::len);
    if oracle.features().iter().any(|x| x.len() != raw) {
        return Err(Error::InvalidDimension("samples have differing feature counts".into()));
    }
    let k = raw + usize::from(bias);
    let inv_n = 1.0 / n_samples.max(1) as f64;
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..m {
        for (a, coef) in poly.row_entries(j) {
            columns[a].push((j, coef));
        }
    }

    let mut program = QuadProgram::default();
    for a in 0..n {
        for kk in 0..k {
            add_var(&mut program, w_name(a, kk), -omega_bound, omega_bound);
        }
    }
    let w_index = |a: usize, kk: usize| a * k + kk;

    let mut bilinear_rows = 0;
    let mut cutoff = QuadExpr::default();
    for (i, (x, c)) in oracle.features().iter().zip(oracle.costs()).enumerate() {
        let z = augment(x, bias);
        let mu0 = program.variables.len();
        for j in 0..m {
            let upper = if poly.equality[j] { f64::INFINITY } else { 0.0 };
            add_var(&mut program, mu_name(i, j), f64::NEG_INFINITY, upper);
        }
        // A delta rows that collapse to `d_ia >= 0` become bounds.
        let mut delta_lower = vec![f64::NEG_INFINITY; n];
        let mut folded = vec![false; m];
        for j in 0..m {
            let entries: Vec<(usize, f64)> = poly.row_entries(j).collect();
            if let [(a, coef)] = entries[..] {
                if poly.b[j] == 0.0 && !poly.equality[j] && coef > 0.0 {
                    delta_lower[a] = 0.0;
                    folded[j] = true;
                }
            }
        }
        let d0 = program.variables.len();
        for (a, &lower) in delta_lower.iter().enumerate() {
            add_var(&mut program, d_name(i, a), lower, f64::INFINITY);
        }
        let g = match kappa {
            None => Some(add_var(&mut program, g_name(i), 0.0, f64::INFINITY)),
            Some(_) => None,
        };

        for j in (0..m).filter(|&j| poly.b[j] != 0.0) {
            program.objective.linear.push((mu0 + j, poly.b[j]));
            cutoff.linear.push((mu0 + j, poly.b[j]));
        }
        for a in 0..n {
            for (kk, &zk) in z.iter().enumerate() {
                if zk != 0.0 {
                    program.objective.quadratic.push((w_index(a, kk), d0 + a, zk));
                    cutoff.quadratic.push((w_index(a, kk), d0 + a, zk));
                }
            }
        }

        // Dual feasibility: A'mu_i + g_i w x_i = c_i / N.
        for a in 0..n {
            let mut expr = QuadExpr {
                linear: columns[a].iter().map(|&(j, coef)| (mu0 + j, coef)).collect(),
                quadratic: Vec::new(),
            };
            for (kk, &zk) in z.iter().enumerate() {
                if zk == 0.0 {
                    continue;
                }
                match (g, kappa) {
                    (Some(g), _) => expr.quadratic.push((g, w_index(a, kk), zk)),
                    (None, Some(kap)) => expr.linear.push((w_index(a, kk), kap * zk)),
                    (None, None) => unreachable!(),
                }
            }
            if !expr.quadratic.is_empty() {
                bilinear_rows += 1;
            }
            program.constraints.push(Constraint {
                name: format!("dual_{i}_{a}"),
                expr,
                sense: Sense::Eq,
                rhs: c[a] * inv_n,
            });
        }
        // Primal side: A d_i - g_i b >= 0.
        for j in (0..m).filter(|&j| !folded[j]) {
            let mut expr = QuadExpr {
                linear: poly.row_entries(j).map(|(a, coef)| (d0 + a, coef)).collect(),
                quadratic: Vec::new(),
            };
            let mut rhs = 0.0;
            match (g, kappa) {
                (Some(g), _) => {
                    if poly.b[j] != 0.0 {
                        expr.linear.push((g, -poly.b[j]));
                    }
                }
                (None, Some(kap)) => rhs = kap * poly.b[j],
                (None, None) => unreachable!(),
            }
            program.constraints.push(Constraint {
                name: format!("primal_{i}_{j}"),
                expr,
                sense: if poly.equality[j] { Sense::Eq } else { Sense::Ge },
                rhs,
            });
        }
    }

    let counts = Counts {
        variables: program.variables.len(),
        constraints: program.constraints.len(),
        bilinear_rows,
    };
    let mean_zstar = oracle.mean_zstar();
    if with_cutoff {
        program.constraints.push(Constraint {
            name: "cutoff".into(),
            expr: cutoff,
            sense: Sense::Ge,
            rhs: mean_zstar,
        });
    }
    Ok(QcqpModel {
        program,
        meta: QcqpMeta {
            variant: if kappa.is_some() { Variant::Penalized } else { Variant::Exact },
            kappa,
            omega_bound,
            cutoff_included: with_cutoff,
            n_samples,
            n_arcs: n,
            n_polytope_rows: m,
            k,
            bias,
            mean_zstar,
            counts,
        },
    })
}

impl QcqpModel {
    /// The point `(w, mu, d, g)` assembled from a model and its fixed-`omega`
    /// duals. For the penalized variant `g` is dropped.
    pub fn warm_point(&self, model: &LinearModel, duals: &[SampleDuals]) -> Result<Vec<f64>> {
        let meta = &self.meta;
        if model.n != meta.n_arcs || model.k != meta.k || model.bias != meta.bias {
            return Err(Error::InvalidDimension("model shape does not match the reformulation".into()));
        }
        if duals.len() != meta.n_samples {
            return Err(Error::InvalidDimension(format!(
                "{} dual blocks for {} samples",
                duals.len(),
                meta.n_samples
            )));
        }
        let mut point = model.omega.clone();
        for d in duals {
            if d.mu.len() != meta.n_polytope_rows || d.delta.len() != meta.n_arcs {
                return Err(Error::InvalidDimension("dual block does not match the polytope".into()));
            }
            point.extend_from_slice(&d.mu);
            point.extend_from_slice(&d.delta);
            if meta.variant == Variant::Exact {
                point.push(d.gamma);
            }
        }
        debug_assert_eq!(point.len(), self.program.variables.len());
        Ok(point)
    }

    /// The regression matrix stored in a point of this model.
    pub fn omega_of(&self, point: &[f64]) -> LinearModel {
        let raw = self.meta.k - usize::from(self.meta.bias);
        let mut model = LinearModel::zeros(self.meta.n_arcs, raw, self.meta.bias);
        let len = model.omega.len();
        model.omega.copy_from_slice(&point[..len]);
        model
    }

    pub fn to_lp_text(&self) -> String {
        self.program.to_lp_text()
    }
}

/// Path of the metadata sidecar written next to an LP file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes the model as LP-format text to `path` and its metadata as JSON
/// next to it. Returns the sidecar path.
pub fn export_lp_text(model: &QcqpModel, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    std::fs::write(path, model.to_lp_text())?;
    let sidecar = sidecar_path(path);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&model.meta)?)?;
    Ok(sidecar)
}
