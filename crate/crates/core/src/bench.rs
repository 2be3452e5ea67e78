//! Benchmark suites comparing SPO+ with the regret-descent pipelines.
//!
//! Every instance is generated from its own recorded seed, trained with the
//! four method sequences and scored on both splits. Suites without time
//! budgets are fully deterministic; once a budget binds, the amount of work
//! done depends on machine speed.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::datagen::{generate, Dataset, SplitKind};
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::problems::{bipartite_matching, grid_shortest_path, NominalProblem};
use crate::regret::{RegretMode, RegretOracle};
use crate::train::{pipeline_from, pipeline_on, Stage, TrainConfig};

pub const CSV_HEADER: &str = "problem,N,deg,noise,method,split,mean_regret,normalized_regret,wall_s,iters";

/// Local-search and alternating budgets of a full-scale run, in seconds.
pub const FULL_LS_BUDGET_S: f64 = 1200.0;
pub const FULL_ALT_BUDGET_S: f64 = 2400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Four 3x3-grid instances with `N = 20`, iteration caps only.
    Tiny,
    /// The 5x5 grid and 13x12 matching over `N`, `Deg` and `Noise`.
    PaperSmall,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Tiny => "tiny",
            Suite::PaperSmall => "paper-small",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tiny" => Ok(Suite::Tiny),
            "paper-small" => Ok(Suite::PaperSmall),
            "" => Err(Error::InvalidParam("suite name is empty".into())),
            other => Err(Error::InvalidParam(format!("unknown suite '{other}' (expected tiny or paper-small)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Grid { rows: usize, cols: usize },
    Matching { n_left: usize, n_right: usize, n_edges: usize },
}

impl Family {
    pub fn build(self, seed: u64) -> Result<NominalProblem> {
        match self {
            Family::Grid { rows, cols } => grid_shortest_path(rows, cols),
            Family::Matching { n_left, n_right, n_edges } => bipartite_matching(n_left, n_right, n_edges, seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub family: Family,
    pub n_samples: usize,
    pub k: usize,
    pub deg: u32,
    pub noise: f64,
    /// Seeds the data, the matching edge set and local search.
    pub seed: u64,
}

impl BenchInstance {
    /// File-name stem used for artifacts.
    pub fn stem(&self, index: usize) -> String {
        let kind = match self.family {
            Family::Grid { .. } => "sp",
            Family::Matching { .. } => "bm",
        };
        format!("{index:03}_{kind}_N{}_deg{}_noise{}", self.n_samples, self.deg, self.noise)
    }
}

/// Instances of `suite`, seeded from `seed` by instance position.
pub fn instances(suite: Suite, seed: u64) -> Vec<BenchInstance> {
    let (families, ns, degs, k): (Vec<Family>, &[usize], &[u32], usize) = match suite {
        Suite::Tiny => (vec![Family::Grid { rows: 3, cols: 3 }], &[20], &[2, 8], 3),
        Suite::PaperSmall => (
            vec![
                Family::Grid { rows: 5, cols: 5 },
                Family::Matching { n_left: 13, n_right: 12, n_edges: 40 },
            ],
            &[50, 100, 200],
            &[2, 8, 16],
            5,
        ),
    };
    let mut out = Vec::new();
    for family in families {
        for &n_samples in ns {
            for &deg in degs {
                for noise in [0.0, 0.5] {
                    let index = out.len() as u64;
                    out.push(BenchInstance {
                        family,
                        n_samples,
                        k,
                        deg,
                        noise,
                        seed: seed.wrapping_mul(1_000).wrapping_add(index),
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SPO")]
    Spo,
    #[serde(rename = "SPO-LS")]
    SpoLs,
    #[serde(rename = "SPO-LS-ALT")]
    SpoLsAlt,
    #[serde(rename = "SPO-ALT")]
    SpoAlt,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Spo, Method::SpoLs, Method::SpoLsAlt, Method::SpoAlt];

    pub fn name(self) -> &'static str {
        match self {
            Method::Spo => "SPO",
            Method::SpoLs => "SPO-LS",
            Method::SpoLsAlt => "SPO-LS-ALT",
            Method::SpoAlt => "SPO-ALT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// Position of the instance within its suite.
    pub instance: usize,
    pub problem: String,
    pub n_samples: usize,
    pub deg: u32,
    pub noise: f64,
    pub method: Method,
    pub split: String,
    pub mean_regret: f64,
    pub normalized_regret: f64,
    pub wall_s: f64,
    pub iters: usize,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{}",
            self.problem,
            self.n_samples,
            self.deg,
            self.noise,
            self.method.name(),
            self.split,
            self.mean_regret,
            self.normalized_regret,
            self.wall_s,
            self.iters
        )
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// One line per row with the percent change of normalized regret against
/// the SPO row of the same instance and split.
pub fn summary(rows: &[BenchRow]) -> String {
    let mut out = String::from("problem,N,deg,noise,method,split,normalized_regret,change_vs_spo_pct\n");
    for r in rows {
        let base = rows
            .iter()
            .find(|b| b.instance == r.instance && b.split == r.split && b.method == Method::Spo)
            .map(|b| b.normalized_regret);
        let change = match base {
            Some(b) if b.abs() > 1e-12 => format!("{:+.1}", 100.0 * (r.normalized_regret - b) / b),
            _ => "n/a".to_string(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.problem,
            r.n_samples,
            r.deg,
            r.noise,
            r.method.name(),
            r.split,
            r.normalized_regret,
            change
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Multiplier on the full-scale time budgets; ignored by `tiny`.
    pub scale: f64,
    pub jobs: usize,
    pub bias: bool,
    pub ls_iters: Option<usize>,
    pub alt_iters: Option<usize>,
}

impl BenchConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        BenchConfig { suite, seed, scale: 1.0, jobs: 1, bias: true, ls_iters: None, alt_iters: None }
    }

    pub fn train_config(&self, instance: &BenchInstance, problem: &NominalProblem) -> TrainConfig {
        let mut cfg = TrainConfig::for_problem(problem.kind);
        cfg.seed = instance.seed;
        match self.suite {
            Suite::Tiny => {
                cfg.ls_iters = 5;
                cfg.alt_iters = 20;
            }
            Suite::PaperSmall => {
                cfg.ls_iters = 100_000;
                cfg.ls_budget_s = Some(FULL_LS_BUDGET_S * self.scale);
                cfg.alt_budget_s = Some(FULL_ALT_BUDGET_S * self.scale);
            }
        }
        if let Some(n) = self.ls_iters {
            cfg.ls_iters = n;
        }
        if let Some(n) = self.alt_iters {
            cfg.alt_iters = n;
        }
        cfg
    }

    fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) {
            return Err(Error::InvalidParam("scale must be positive".into()));
        }
        if self.jobs < 1 {
            return Err(Error::InvalidParam("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything one instance produced, for optional artifact files.
#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub index: usize,
    pub instance: BenchInstance,
    pub dataset: Dataset,
    pub models: Vec<(Method, LinearModel)>,
    pub rows: Vec<BenchRow>,
}

pub fn run_instance(cfg: &BenchConfig, index: usize, instance: &BenchInstance) -> Result<InstanceResult> {
    let problem = instance.family.build(instance.seed)?;
    let dataset = generate(&problem, instance.n_samples, instance.k, instance.deg, instance.noise, instance.seed)?;
    let train_cfg = cfg.train_config(instance, &problem);
    let train = RegretOracle::for_split(&problem, &dataset, SplitKind::Train)?;
    let test = RegretOracle::for_split(&problem, &dataset, SplitKind::Test)?;

    let main = pipeline_on(&train, &[Stage::Spo, Stage::Ls, Stage::Alt], &train_cfg, cfg.bias)?;
    let spo = &main.stages[0];
    let alt_only = pipeline_from(&train, Some(&spo.model), &[Stage::Alt], &train_cfg, cfg.bias)?;

    let iters = |s: &crate::train::StageReport| s.trace.as_ref().map_or(1, |t| t.iterations);
    let mut fitted: Vec<(Method, LinearModel, f64, usize)> = Vec::new();
    let (mut wall, mut count) = (0.0, 0);
    for (stage, method) in main.stages.iter().zip([Method::Spo, Method::SpoLs, Method::SpoLsAlt]) {
        wall += stage.wall_s;
        count += iters(stage);
        fitted.push((method, stage.model.clone(), wall, count));
    }
    let alt = &alt_only.stages[0];
    fitted.push((Method::SpoAlt, alt.model.clone(), spo.wall_s + alt.wall_s, iters(spo) + iters(alt)));

    let mut rows = Vec::new();
    for (method, model, wall_s, iters) in &fitted {
        for (split, oracle) in [("train", &train), ("test", &test)] {
            if oracle.is_empty() {
                continue;
            }
            let report = oracle.evaluate(model, RegretMode::Pessimistic)?;
            rows.push(BenchRow {
                instance: index,
                problem: problem.short_name().to_string(),
                n_samples: instance.n_samples,
                deg: instance.deg,
                noise: instance.noise,
                method: *method,
                split: split.to_string(),
                mean_regret: report.mean_regret,
                normalized_regret: report.normalized_regret.unwrap_or(f64::NAN),
                wall_s: *wall_s,
                iters: *iters,
            });
        }
    }
    let models = fitted.into_iter().map(|(m, model, _, _)| (m, model)).collect();
    Ok(InstanceResult { index, instance: instance.clone(), dataset, models, rows })
}

/// Runs every instance of the suite, `cfg.jobs` at a time. Results are
/// ordered by instance position regardless of scheduling.
pub fn run_suite(cfg: &BenchConfig) -> Result<Vec<InstanceResult>> {
    cfg.validate()?;
    let all = instances(cfg.suite, cfg.seed);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<InstanceResult>>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..cfg.jobs.min(all.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(instance) = all.get(i) else { break };
                let outcome = run_instance(cfg, i, instance);
                results.lock().expect("no worker panicked").push(outcome);
            });
        }
    });
    let mut done = results.into_inner().expect("no worker panicked").into_iter().collect::<Result<Vec<_>>>()?;
    done.sort_by_key(|r| r.index);
    Ok(done)
}

/// Writes each instance's dataset and models plus a seed manifest into `dir`.
pub fn write_artifacts(dir: impl AsRef<Path>, results: &[InstanceResult]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    for r in results {
        let stem = r.instance.stem(r.index);
        r.dataset.save(dir.join(format!("{stem}.data.json")))?;
        for (method, model) in &r.models {
            model.save(dir.join(format!("{stem}.{}.model.json", method.name())))?;
        }
    }
    let manifest: Vec<&BenchInstance> = results.iter().map(|r| &r.instance).collect();
    std::fs::write(dir.join("instances.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
