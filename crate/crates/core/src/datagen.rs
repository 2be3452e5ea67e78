//! Synthetic feature/cost datasets and their JSON files.
//!
//! Costs follow the polynomial-kernel benchmark law
//!
//! ```text
//! c_a = [ ((omega_a . x) / sqrt(K) + 3)^deg / 3.5^deg + 1 ] * eps,   eps ~ U[1 - noise, 1 + noise]
//! ```
//!
//! with standard normal features and a Bernoulli(0.5) (or standard normal)
//! true `omega`. Features, `omega`, noise and the train/test split each come
//! from their own ChaCha stream of the master seed.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{NominalProblem, ProblemSpec};

pub const SCHEMA_VERSION: u32 = 1;
pub const TRAIN_FRACTION: f64 = 0.7;

const FEATURE_STREAM: u64 = 1;
const OMEGA_STREAM: u64 = 2;
const NOISE_STREAM: u64 = 3;
const SPLIT_STREAM: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OmegaLaw {
    #[default]
    Bernoulli,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_samples: usize,
    pub k: usize,
    pub deg: u32,
    pub noise: f64,
    pub seed: u64,
    #[serde(default)]
    pub omega_law: OmegaLaw,
    /// Row-major `n x k`; empty for hand-entered data.
    pub true_omega: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Test,
    All,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Test => "test",
            SplitKind::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub version: u32,
    pub problem: ProblemSpec,
    pub gen_params: GenParams,
    pub samples: Vec<Sample>,
    pub split: Split,
}

impl Dataset {
    /// Wraps hand-entered samples; every sample is placed in the training split.
    pub fn from_samples(problem: &NominalProblem, samples: Vec<Sample>) -> Result<Self> {
        let k = samples.first().map_or(0, |s| s.x.len());
        for s in &samples {
            if s.x.len() != k || s.c.len() != problem.n() {
                return Err(Error::InvalidDimension("sample dimensions disagree".into()));
            }
        }
        let n_samples = samples.len();
        Ok(Dataset {
            version: SCHEMA_VERSION,
            problem: problem.spec.clone(),
            gen_params: GenParams {
                n_samples,
                k,
                deg: 1,
                noise: 0.0,
                seed: 0,
                omega_law: OmegaLaw::Bernoulli,
                true_omega: Vec::new(),
            },
            samples,
            split: Split { train: (0..n_samples).collect(), test: Vec::new() },
        })
    }

    pub fn k(&self) -> usize {
        self.gen_params.k
    }

    pub fn indices(&self, split: SplitKind) -> Vec<usize> {
        match split {
            SplitKind::Train => self.split.train.clone(),
            SplitKind::Test => self.split.test.clone(),
            SplitKind::All => (0..self.samples.len()).collect(),
        }
    }

    pub fn subset(&self, split: SplitKind) -> Vec<&Sample> {
        self.indices(split).into_iter().map(|i| &self.samples[i]).collect()
    }

    /// A copy of the dataset with every sample repeated `times` times in order.
    pub fn repeated(&self, times: usize) -> Dataset {
        let samples: Vec<Sample> =
            self.samples.iter().flat_map(|s| std::iter::repeat_n(s.clone(), times)).collect();
        let expand = |idx: &[usize]| idx.iter().flat_map(|&i| (0..times).map(move |t| i * times + t)).collect();
        Dataset {
            samples,
            split: Split { train: expand(&self.split.train), test: expand(&self.split.test) },
            gen_params: GenParams { n_samples: self.samples.len() * times, ..self.gen_params.clone() },
            ..self.clone()
        }
    }

    pub fn validate(&self, problem: &NominalProblem) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported dataset version {}", self.version)));
        }
        let n = self.samples.len();
        let k = self.gen_params.k;
        for s in &self.samples {
            if s.x.len() != k || s.c.len() != problem.n() {
                return Err(Error::Schema("sample dimensions disagree with gen_params/problem".into()));
            }
        }
        let mut seen = vec![false; n];
        for &i in self.split.train.iter().chain(&self.split.test) {
            if i >= n || seen[i] {
                return Err(Error::Schema(format!("split index {i} is out of range or repeated")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("version").and_then(serde_json::Value::as_u64) {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::Schema(format!("unsupported dataset version {v}"))),
            None => return Err(Error::Schema("missing dataset version".into())),
        }
        Ok(serde_json::from_value(raw)?)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Noise-free cost of one arc: `((omega_a . x) / sqrt(K) + 3)^deg / 3.5^deg + 1`.
pub fn noiseless_cost(omega_row: &[f64], x: &[f64], deg: u32) -> f64 {
    let k = x.len() as f64;
    let signal: f64 = omega_row.iter().zip(x).map(|(w, v)| w * v).sum();
    let base = signal / k.sqrt() + 3.0;
    base.powi(deg as i32) / 3.5f64.powi(deg as i32) + 1.0
}

pub fn generate(problem: &NominalProblem, n_samples: usize, k: usize, deg: u32, noise: f64, seed: u64) -> Result<Dataset> {
    generate_with_law(problem, n_samples, k, deg, noise, seed, OmegaLaw::Bernoulli)
}

pub fn generate_with_law(
    problem: &NominalProblem,
    n_samples: usize,
    k: usize,
    deg: u32,
    noise: f64,
    seed: u64,
    law: OmegaLaw,
) -> Result<Dataset> {
    if deg < 1 {
        return Err(Error::InvalidParam("deg must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::InvalidParam(format!("noise half-width must lie in [0, 1), got {noise}")));
    }
    if k < 1 {
        return Err(Error::InvalidParam("at least one feature is required".into()));
    }
    let n = problem.n();

    let mut feature_rng = stream(seed, FEATURE_STREAM);
    let xs: Vec<Vec<f64>> =
        (0..n_samples).map(|_| (0..k).map(|_| feature_rng.sample(StandardNormal)).collect()).collect();

    let mut omega_rng = stream(seed, OMEGA_STREAM);
    let true_omega: Vec<f64> = match law {
        OmegaLaw::Bernoulli => {
            let coin = Bernoulli::new(0.5).expect("valid probability");
            (0..n * k).map(|_| if coin.sample(&mut omega_rng) { 1.0 } else { 0.0 }).collect()
        }
        OmegaLaw::Normal => (0..n * k).map(|_| omega_rng.sample(StandardNormal)).collect(),
    };

    let mut noise_rng = stream(seed, NOISE_STREAM);
    let eps = Uniform::new_inclusive(1.0 - noise, 1.0 + noise)
        .map_err(|e| Error::InvalidParam(format!("noise distribution: {e}")))?;
    let sign = problem.cost_sign();
    let samples: Vec<Sample> = xs
        .into_iter()
        .map(|x| {
            let c = (0..n)
                .map(|a| {
                    let base = noiseless_cost(&true_omega[a * k..(a + 1) * k], &x, deg);
                    sign * base * eps.sample(&mut noise_rng)
                })
                .collect();
            Sample { x, c }
        })
        .collect();

    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut stream(seed, SPLIT_STREAM));
    let n_train = (TRAIN_FRACTION * n_samples as f64).round() as usize;
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();

    Ok(Dataset {
        version: SCHEMA_VERSION,
        problem: problem.spec.clone(),
        gen_params: GenParams { n_samples, k, deg, noise, seed, omega_law: law, true_omega },
        samples,
        split: Split { train, test },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{bipartite_matching, grid_shortest_path};

    #[test]
    fn formula_single_feature() {
        let c = noiseless_cost(&[1.0], &[1.0], 2);
        assert!((c - (16.0 / 12.25 + 1.0)).abs() < 1e-12);
        assert!((c - 2.306122).abs() < 1e-6);
    }

    #[test]
    fn zero_features_give_constant_cost() {
        for deg in [1, 2, 8] {
            let c = noiseless_cost(&[1.0, 0.0, 1.0], &[0.0, 0.0, 0.0], deg);
            assert!((c - ((3.0f64 / 3.5).powi(deg as i32) + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters() {
        let p = grid_shortest_path(3, 3).unwrap();
        assert!(matches!(generate(&p, 10, 2, 2, 1.0, 0), Err(Error::InvalidParam(_))));
        assert!(matches!(generate(&p, 10, 2, 0, 0.0, 0), Err(Error::InvalidParam(_))));
        assert!(matches!(generate(&p, 10, 0, 2, 0.0, 0), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn noise_band_and_split() {
        let p = grid_shortest_path(3, 3).unwrap();
        let clean = generate(&p, 50, 3, 4, 0.0, 5).unwrap();
        let noisy = generate(&p, 50, 3, 4, 0.5, 5).unwrap();
        assert_eq!(clean.split.train.len(), 35);
        assert_eq!(clean.split.test.len(), 15);
        for (a, b) in clean.samples.iter().zip(&noisy.samples) {
            assert_eq!(a.x, b.x);
            for (ca, cb) in a.c.iter().zip(&b.c) {
                assert!(*cb >= 0.5 * ca - 1e-12 && *cb <= 1.5 * ca + 1e-12);
            }
        }
    }

    #[test]
    fn matching_costs_are_negated_weights() {
        let p = bipartite_matching(4, 4, 6, 1).unwrap();
        let d = generate(&p, 10, 2, 2, 0.0, 1).unwrap();
        assert!(d.samples.iter().flat_map(|s| &s.c).all(|&c| c < 0.0));
    }

    #[test]
    fn missing_gen_params_is_schema_error() {
        let p = grid_shortest_path(2, 2).unwrap();
        let d = generate(&p, 5, 1, 2, 0.0, 0).unwrap();
        let mut v = serde_json::to_value(&d).unwrap();
        v.as_object_mut().unwrap().remove("gen_params");
        assert!(matches!(Dataset::from_json(&v.to_string()), Err(Error::Schema(_))));
        let mut w = serde_json::to_value(&d).unwrap();
        w["version"] = 7.into();
        assert!(matches!(Dataset::from_json(&w.to_string()), Err(Error::Schema(_))));
    }
}
