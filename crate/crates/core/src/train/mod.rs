//! Training procedures for linear cost predictors.

mod alternating;
mod local_search;
mod pipeline;
mod spo;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemKind;

pub use alternating::{alternating, solve_lp1_fixed_omega, solve_lp2_fixed_duals, Lp1Duals, Lp1Solution, SampleDuals};
pub use local_search::local_search;
pub use pipeline::{pipeline, pipeline_from, pipeline_on, PipelineResult, Stage, StageReport};
pub use spo::{spo_plus_loss, spo_plus_lp, train_spo_plus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Neighbourhood scale of local search.
    pub ls_epsilon: f64,
    /// Candidates drawn per local-search iteration.
    pub ls_samples: usize,
    pub ls_iters: usize,
    pub alt_iters: usize,
    /// Alternating descent stops once `Lambda` improves by less than this.
    pub alt_tol: f64,
    /// Consecutive sub-`alt_tol` iterations tolerated before stopping.
    pub alt_patience: usize,
    /// Box `|omega| <= B` used by the alternating LP over `omega`.
    pub omega_bound: f64,
    pub ls_budget_s: Option<f64>,
    pub alt_budget_s: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            ls_epsilon: 0.1,
            ls_samples: 20,
            ls_iters: 20,
            alt_iters: 1000,
            alt_tol: 1e-9,
            alt_patience: 5,
            omega_bound: 1000.0,
            ls_budget_s: None,
            alt_budget_s: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Defaults tuned per problem family: `epsilon = 0.1` for shortest path,
    /// `epsilon = 1` for matching.
    pub fn for_problem(kind: ProblemKind) -> Self {
        let ls_epsilon = match kind {
            ProblemKind::BipartiteMatching => 1.0,
            _ => 0.1,
        };
        TrainConfig { ls_epsilon, ..TrainConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ls_epsilon >= 0.0) {
            return Err(Error::InvalidParam("ls_epsilon must be non-negative".into()));
        }
        if self.ls_samples < 1 {
            return Err(Error::InvalidParam("ls_samples must be at least 1".into()));
        }
        if !(self.omega_bound > 0.0) {
            return Err(Error::InvalidParam("omega_bound must be positive".into()));
        }
        if self.alt_patience < 1 {
            return Err(Error::InvalidParam("alt_patience must be at least 1".into()));
        }
        for b in [self.ls_budget_s, self.alt_budget_s].into_iter().flatten() {
            if !(b >= 0.0) {
                return Err(Error::InvalidParam("time budgets must be non-negative".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The configured number of iterations ran.
    IterationCap,
    TimeBudget,
    /// `Lambda` stopped improving by at least `alt_tol`.
    Converged,
    /// The LP over `omega` had no solution for the fixed duals.
    Lp2Infeasible,
    /// Single-shot procedure.
    Solved,
}

/// Per-iteration record of a training run. Entry 0 is the starting point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub lambdas: Vec<f64>,
    pub wall_s: Vec<f64>,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub termination: Termination,
}

impl TrainTrace {
    fn start(lambda: f64) -> Self {
        TrainTrace {
            lambdas: vec![lambda],
            wall_s: vec![0.0],
            iterations: 0,
            oracle_calls: 1,
            termination: Termination::IterationCap,
        }
    }

    /// Largest increase between consecutive recorded `Lambda` values.
    pub fn max_increase(&self) -> f64 {
        self.lambdas.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn final_lambda(&self) -> f64 {
        *self.lambdas.last().expect("trace has a starting entry")
    }
}
