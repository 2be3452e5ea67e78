use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use dfl_core::bench::{self, BenchConfig, BenchInstance, Suite};
use dfl_core::datagen::{generate_with_law, Dataset, OmegaLaw};
use dfl_core::model::LinearModel;
use dfl_core::problems::{bipartite_matching, grid_shortest_path, NominalProblem};
use dfl_core::qcqp::{build_exact, build_penalized, export_lp_text};
use dfl_core::regret::{RegretMode, RegretOracle};
use dfl_core::train::{pipeline_from, Stage, TrainConfig, TrainTrace};
use dfl_core::zero_regret::{zero_regret_certificate, Answer};

use crate::{BenchArgs, CliError, EvalArgs, ExportArgs, GenArgs, OmegaLawArg, ProblemArg, TrainArgs, VariantArg, ZeroRegretArgs};

fn load_dataset(path: &Path) -> Result<(NominalProblem, Dataset), CliError> {
    let dataset = Dataset::load(path).map_err(|e| match e {
        dfl_core::Error::Io(io) => CliError::Io(format!("cannot read {}: {io}", path.display())),
        other => other.into(),
    })?;
    let problem = NominalProblem::from_spec(&dataset.problem)?;
    dataset.validate(&problem)?;
    Ok((problem, dataset))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    emit(&format!("{text}\n"))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), CliError> {
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--grid expects ROWSxCOLS, got '{text}'"));
    let (r, c) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((r.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
}

fn oracle<'p>(
    problem: &'p NominalProblem,
    dataset: &Dataset,
    split: crate::SplitArg,
) -> Result<RegretOracle<'p>, CliError> {
    let oracle = RegretOracle::for_split(problem, dataset, split.kind())?;
    if oracle.is_empty() {
        return Err(CliError::Usage(format!("the {} split is empty", split.kind().name())));
    }
    Ok(oracle)
}

#[derive(Serialize)]
struct GenSummary<'a> {
    out: &'a Path,
    problem: &'static str,
    n_vars: usize,
    samples: usize,
    train: usize,
    test: usize,
}

pub fn generate(a: &GenArgs) -> Result<(), CliError> {
    let problem = match a.problem {
        ProblemArg::Sp => {
            let (rows, cols) = parse_grid(&a.grid)?;
            grid_shortest_path(rows, cols)?
        }
        ProblemArg::Bm => bipartite_matching(a.left, a.right, a.edges, a.seed)?,
    };
    let law = match a.omega_law {
        OmegaLawArg::Bernoulli => OmegaLaw::Bernoulli,
        OmegaLawArg::Normal => OmegaLaw::Normal,
    };
    let dataset = generate_with_law(&problem, a.n_samples, a.features, a.deg, a.noise, a.seed, law)?;
    dataset.save(&a.out)?;
    let summary = GenSummary {
        out: &a.out,
        problem: problem.short_name(),
        n_vars: problem.n(),
        samples: dataset.samples.len(),
        train: dataset.split.train.len(),
        test: dataset.split.test.len(),
    };
    if a.json {
        return print_json(&summary);
    }
    println!(
        "wrote {} {} samples ({} train / {} test, {} variables) to {}",
        summary.samples,
        summary.problem,
        summary.train,
        summary.test,
        summary.n_vars,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct StageSummary<'a> {
    stage: Stage,
    lambda: f64,
    wall_s: f64,
    trace: Option<&'a TrainTrace>,
}

#[derive(Serialize)]
struct TraceFile<'a> {
    method: String,
    config: &'a TrainConfig,
    stages: Vec<StageSummary<'a>>,
}

fn default_trace_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "model".into());
    out.with_file_name(format!("{stem}.trace.json"))
}

pub fn train(a: &TrainArgs) -> Result<(), CliError> {
    let stages = Stage::parse_sequence(&a.method)?;
    let starts_with_spo = stages.first() == Some(&Stage::Spo);
    if !starts_with_spo && a.init.is_none() {
        return Err(CliError::Usage(format!("method '{}' needs a starting model via --init", a.method)));
    }
    if starts_with_spo && a.init.is_some() {
        return Err(CliError::Usage("--init only applies to methods that do not start with spo".into()));
    }
    if !(a.scale > 0.0) {
        return Err(CliError::Usage("--scale must be positive".into()));
    }
    let (problem, dataset) = load_dataset(&a.data)?;
    let init = a.init.as_deref().map(LinearModel::load).transpose()?;

    let mut cfg = TrainConfig::for_problem(problem.kind);
    cfg.seed = a.seed;
    cfg.ls_budget_s = a.budget_ls.map(|b| b * a.scale);
    cfg.alt_budget_s = a.budget_alt.map(|b| b * a.scale);
    if let Some(v) = a.ls_iters {
        cfg.ls_iters = v;
    }
    if let Some(v) = a.ls_samples {
        cfg.ls_samples = v;
    }
    if let Some(v) = a.epsilon {
        cfg.ls_epsilon = v;
    }
    if let Some(v) = a.alt_iters {
        cfg.alt_iters = v;
    }
    if let Some(v) = a.omega_bound {
        cfg.omega_bound = v;
    }

    let oracle = oracle(&problem, &dataset, crate::SplitArg::Train)?;
    let bias = init.as_ref().map_or(!a.no_bias, |m| m.bias);
    let result = pipeline_from(&oracle, init.as_ref(), &stages, &cfg, bias)?;
    result.model.save(&a.out)?;

    let trace_path = a.trace.clone().unwrap_or_else(|| default_trace_path(&a.out));
    let file = TraceFile {
        method: Stage::sequence_name(&stages),
        config: &cfg,
        stages: result
            .stages
            .iter()
            .map(|s| StageSummary { stage: s.stage, lambda: s.lambda, wall_s: s.wall_s, trace: s.trace.as_ref() })
            .collect(),
    };
    write_json(&trace_path, &file)?;

    if a.json {
        return print_json(&file);
    }
    for s in &result.stages {
        let iters = s.trace.as_ref().map_or(String::new(), |t| format!("  iterations {}", t.iterations));
        println!("{:<4} lambda {:.9}  wall {:.2}s{iters}", s.stage.name(), s.lambda, s.wall_s);
    }
    println!("model written to {}, trace to {}", a.out.display(), trace_path.display());
    Ok(())
}

#[derive(Serialize)]
struct Score {
    mean_regret: f64,
    normalized_regret: Option<f64>,
}

#[derive(Serialize)]
struct EvalSummary {
    split: &'static str,
    samples: usize,
    pessimistic: Score,
    optimistic: Score,
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let (problem, dataset) = load_dataset(&a.data)?;
    let model = LinearModel::load(&a.model)?;
    let oracle = oracle(&problem, &dataset, a.split)?;
    let score = |mode| -> Result<Score, CliError> {
        let r = oracle.evaluate(&model, mode)?;
        Ok(Score { mean_regret: r.mean_regret, normalized_regret: r.normalized_regret })
    };
    let summary = EvalSummary {
        split: a.split.kind().name(),
        samples: oracle.len(),
        pessimistic: score(RegretMode::Pessimistic)?,
        optimistic: score(RegretMode::Optimistic)?,
    };
    if a.json {
        return print_json(&summary);
    }
    let norm = |s: &Score| s.normalized_regret.map_or("n/a".to_string(), |v| format!("{v:.9}"));
    println!("split {} ({} samples)", summary.split, summary.samples);
    println!(
        "pessimistic mean regret {:.9}  normalized {}",
        summary.pessimistic.mean_regret,
        norm(&summary.pessimistic)
    );
    println!(
        "optimistic  mean regret {:.9}  normalized {}",
        summary.optimistic.mean_regret,
        norm(&summary.optimistic)
    );
    Ok(())
}

pub fn zero_regret(a: &ZeroRegretArgs) -> Result<(), CliError> {
    let (problem, dataset) = load_dataset(&a.data)?;
    let samples = dataset.subset(a.split.kind());
    if samples.is_empty() {
        return Err(CliError::Usage(format!("the {} split is empty", a.split.kind().name())));
    }
    let verdict = zero_regret_certificate(&problem, &samples, !a.no_bias)?;
    if let (Some(out), Some(cert)) = (&a.out, &verdict.certificate) {
        cert.model.save(out)?;
    }
    if a.json {
        return print_json(&verdict);
    }
    match verdict.answer {
        Answer::Yes => println!("Yes"),
        Answer::No => println!("No"),
        Answer::AssumptionViolated => {
            let tied: Vec<usize> = verdict.unique.iter().enumerate().filter(|(_, u)| !**u).map(|(i, _)| i).collect();
            println!("assumption violated: samples {tied:?} have several true optima");
        }
    }
    if let Some(cert) = &verdict.certificate {
        println!("certificate Lambda {:e}", cert.lambda);
        for a_row in 0..cert.model.n {
            let row: Vec<String> = (0..cert.model.k).map(|j| format!("{:.6}", cert.model.get(a_row, j))).collect();
            println!("omega[{a_row}] = [{}]", row.join(", "));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ExportSummary<'a> {
    out: &'a Path,
    meta_path: PathBuf,
    meta: &'a dfl_core::qcqp::QcqpMeta,
}

pub fn export_qcqp(a: &ExportArgs) -> Result<(), CliError> {
    let (problem, dataset) = load_dataset(&a.data)?;
    let oracle = oracle(&problem, &dataset, a.split)?;
    let bias = !a.no_bias;
    let model = match a.variant {
        VariantArg::Exact => build_exact(&oracle, bias, a.omega_bound, !a.no_cutoff)?,
        VariantArg::Penalized => build_penalized(&oracle, bias, a.omega_bound, a.kappa)?,
    };
    let meta_path = export_lp_text(&model, &a.out)?;
    let summary = ExportSummary { out: &a.out, meta_path, meta: &model.meta };
    if a.json {
        return print_json(&summary);
    }
    let c = &model.meta.counts;
    println!(
        "{:?} reformulation: {} variables, {} constraints, {} bilinear rows",
        model.meta.variant, c.variables, c.constraints, c.bilinear_rows
    );
    println!("written to {} (metadata {})", a.out.display(), summary.meta_path.display());
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "bench".into());
    out.with_file_name(format!("{stem}.instances.json"))
}

pub fn bench(a: &BenchArgs) -> Result<(), CliError> {
    let suite: Suite = a.suite.parse()?;
    let cfg = BenchConfig {
        scale: a.scale,
        jobs: a.jobs,
        bias: !a.no_bias,
        ls_iters: a.ls_iters,
        alt_iters: a.alt_iters,
        ..BenchConfig::new(suite, a.seed)
    };
    let results = bench::run_suite(&cfg)?;
    let rows: Vec<_> = results.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    let text = if a.summary { bench::summary(&rows) } else { bench::to_csv(&rows) };

    if let Some(dir) = &a.artifacts {
        bench::write_artifacts(dir, &results)?;
    }
    let instances: Vec<&BenchInstance> = results.iter().map(|r| &r.instance).collect();
    match &a.out {
        Some(out) => {
            std::fs::write(out, &text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", out.display())))?;
            write_json(&manifest_path(out), &instances)?;
        }
        None => {
            emit(&text)?;
            for (i, inst) in instances.iter().enumerate() {
                eprintln!("instance {i}: seed {}", inst.seed);
            }
        }
    }
    Ok(())
}
