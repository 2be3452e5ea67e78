use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spo::fit_spo_plus;
use super::{alternating, local_search, TrainConfig, TrainTrace};
use crate::datagen::{Dataset, SplitKind};
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::problems::NominalProblem;
use crate::regret::RegretOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Spo,
    Ls,
    Alt,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Spo => "spo",
            Stage::Ls => "ls",
            Stage::Alt => "alt",
        }
    }

    /// Parses a dash-separated sequence such as `spo-ls-alt`.
    pub fn parse_sequence(text: &str) -> Result<Vec<Stage>> {
        text.split('-').map(str::parse).collect()
    }

    /// The inverse of [`Stage::parse_sequence`].
    pub fn sequence_name(stages: &[Stage]) -> String {
        stages.iter().map(|s| s.name()).collect::<Vec<_>>().join("-")
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spo" => Ok(Stage::Spo),
            "ls" => Ok(Stage::Ls),
            "alt" => Ok(Stage::Alt),
            other => Err(Error::InvalidParam(format!("unknown training stage '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    /// Training `Lambda` of the model this stage produced.
    pub lambda: f64,
    pub wall_s: f64,
    pub model: LinearModel,
    /// Absent for the single-shot SPO+ stage.
    pub trace: Option<TrainTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub model: LinearModel,
    pub stages: Vec<StageReport>,
}

impl PipelineResult {
    pub fn final_lambda(&self) -> f64 {
        self.stages.last().map_or(f64::NAN, |s| s.lambda)
    }

    /// The report of the last run of `stage`, if it ran.
    pub fn stage(&self, stage: Stage) -> Option<&StageReport> {
        self.stages.iter().rev().find(|s| s.stage == stage)
    }
}

/// Runs the stage sequence on the dataset's training split.
pub fn pipeline(
    problem: &NominalProblem,
    dataset: &Dataset,
    sequence: &[Stage],
    cfg: &TrainConfig,
    bias: bool,
) -> Result<PipelineResult> {
    let oracle = RegretOracle::for_split(problem, dataset, SplitKind::Train)?;
    pipeline_on(&oracle, sequence, cfg, bias)
}

/// [`pipeline`] over an already prepared oracle. Each stage starts from the
/// previous stage's model. Without a local-search stage its time budget is
/// handed to alternating descent.
pub fn pipeline_on(
    oracle: &RegretOracle<'_>,
    sequence: &[Stage],
    cfg: &TrainConfig,
    bias: bool,
) -> Result<PipelineResult> {
    if sequence.first() != Some(&Stage::Spo) {
        return Err(Error::InvalidParam("a training sequence must start with spo".into()));
    }
    pipeline_from(oracle, None, sequence, cfg, bias)
}

/// Like [`pipeline_on`], but a sequence may begin with `ls` or `alt` when a
/// starting model is supplied. `bias` only shapes models fitted by SPO+.
pub fn pipeline_from(
    oracle: &RegretOracle<'_>,
    start: Option<&LinearModel>,
    sequence: &[Stage],
    cfg: &TrainConfig,
    bias: bool,
) -> Result<PipelineResult> {
    cfg.validate()?;
    match sequence.first() {
        None => return Err(Error::InvalidParam("empty training sequence".into())),
        Some(Stage::Spo) => {}
        Some(s) if start.is_none() => {
            return Err(Error::InvalidParam(format!("stage '{s}' needs a starting model")));
        }
        Some(_) => {}
    }
    let mut stage_cfg = cfg.clone();
    if !sequence.contains(&Stage::Ls) {
        if let (Some(ls), Some(alt)) = (cfg.ls_budget_s, cfg.alt_budget_s) {
            stage_cfg.alt_budget_s = Some(ls + alt);
        }
    }

    let mut model: Option<LinearModel> = start.cloned();
    let mut stages = Vec::with_capacity(sequence.len());
    for &stage in sequence {
        let started = Instant::now();
        let (next, trace) = match (stage, &model) {
            (Stage::Spo, _) => (fit_spo_plus(oracle, bias)?.0, None),
            (Stage::Ls, Some(m)) => {
                let (m, t) = local_search(oracle, m, &stage_cfg)?;
                (m, Some(t))
            }
            (Stage::Alt, Some(m)) => {
                let (m, t) = alternating(oracle, m, &stage_cfg)?;
                (m, Some(t))
            }
            _ => unreachable!("checked before the loop"),
        };
        let wall_s = started.elapsed().as_secs_f64();
        let lambda = match &trace {
            Some(t) => t.lambdas.iter().copied().fold(f64::INFINITY, f64::min),
            None => oracle.lambda(&next)?,
        };
        stages.push(StageReport { stage, lambda, wall_s, model: next.clone(), trace });
        model = Some(next);
    }
    Ok(PipelineResult { model: model.expect("sequence is non-empty"), stages })
}
