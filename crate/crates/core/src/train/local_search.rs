use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Termination, TrainConfig, TrainTrace};
use crate::error::Result;
use crate::model::LinearModel;
use crate::regret::RegretOracle;

/// Random local search on `Lambda`.
///
/// Each iteration draws `ls_samples` candidates `omega + epsilon * N(0, I)`
/// around the incumbent and moves to the best one if it strictly beats the
/// incumbent, so `Lambda` never increases. Running out of `ls_budget_s`
/// returns the best model found so far.
pub fn local_search(
    oracle: &RegretOracle<'_>,
    model0: &LinearModel,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainTrace)> {
    cfg.validate()?;
    let started = Instant::now();
    let budget = cfg.ls_budget_s.map(Duration::from_secs_f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut incumbent = model0.clone();
    let mut best = oracle.lambda(&incumbent)?;
    let mut trace = TrainTrace::start(best);

    for _ in 0..cfg.ls_iters {
        let mut round_best: Option<(LinearModel, f64)> = None;
        let mut out_of_time = false;
        for _ in 0..cfg.ls_samples {
            if budget.is_some_and(|b| started.elapsed() >= b) {
                out_of_time = true;
                break;
            }
            let mut candidate = incumbent.clone();
            for w in candidate.omega.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *w += cfg.ls_epsilon * z;
            }
            let value = oracle.lambda(&candidate)?;
            trace.oracle_calls += 1;
            if round_best.as_ref().is_none_or(|(_, v)| value < *v) {
                round_best = Some((candidate, value));
            }
        }
        if let Some((candidate, value)) = round_best {
            if value < best {
                incumbent = candidate;
                best = value;
            }
        }
        if out_of_time {
            if trace.lambdas.last() != Some(&best) {
                trace.lambdas.push(best);
                trace.wall_s.push(started.elapsed().as_secs_f64());
            }
            trace.termination = Termination::TimeBudget;
            break;
        }
        trace.iterations += 1;
        trace.lambdas.push(best);
        trace.wall_s.push(started.elapsed().as_secs_f64());
    }
    Ok((incumbent, trace))
}
