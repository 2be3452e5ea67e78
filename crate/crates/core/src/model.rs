use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear predictor `c_hat = omega * x`, with `omega` an `n x k` matrix.
///
/// With `bias` set, raw features are extended with a leading constant 1, so
/// column 0 of `omega` is the intercept and `k` counts it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Row-major `n x k`.
    pub omega: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub bias: bool,
}

impl LinearModel {
    pub fn zeros(n: usize, raw_features: usize, bias: bool) -> Self {
        let k = raw_features + usize::from(bias);
        LinearModel { omega: vec![0.0; n * k], n, k, bias }
    }

    pub fn from_rows(rows: &[Vec<f64>], bias: bool) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) || (bias && k == 0) {
            return Err(Error::InvalidDimension("ragged omega rows".into()));
        }
        Ok(LinearModel { omega: rows.concat(), n, k, bias })
    }

    pub fn raw_features(&self) -> usize {
        self.k - usize::from(self.bias)
    }

    #[inline]
    pub fn get(&self, a: usize, j: usize) -> f64 {
        self.omega[a * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, a: usize, j: usize, value: f64) {
        self.omega[a * self.k + j] = value;
    }

    /// Model inputs for raw features `x`.
    pub fn inputs(&self, x: &[f64]) -> Vec<f64> {
        augment(x, self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let z = self.inputs(x);
        debug_assert_eq!(z.len(), self.k);
        self.omega.chunks(self.k).map(|row| row.iter().zip(&z).map(|(w, x)| w * x).sum()).collect()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        LinearModel { omega: self.omega.iter().map(|w| alpha * w).collect(), ..self.clone() }
    }

    pub fn max_abs(&self) -> f64 {
        self.omega.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn check_dims(&self, n: usize, raw_features: usize) -> Result<()> {
        if self.n != n || self.raw_features() != raw_features || self.omega.len() != self.n * self.k {
            return Err(Error::InvalidDimension(format!(
                "model is {}x{} (bias {}) but data needs n = {n}, {raw_features} features",
                self.n, self.k, self.bias
            )));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParam("model has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let model: LinearModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.omega.len() != model.n * model.k {
            return Err(Error::Schema("omega length does not equal n * k".into()));
        }
        Ok(model)
    }
}

pub(crate) fn augment(x: &[f64], bias: bool) -> Vec<f64> {
    if bias {
        std::iter::once(1.0).chain(x.iter().copied()).collect()
    } else {
        x.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_with_intercept() {
        let m = LinearModel::from_rows(&[vec![-1.0, -1.0], vec![-4.0, 1.0]], true).unwrap();
        assert_eq!(m.predict(&[2.0]), vec![-3.0, -2.0]);
        assert_eq!(m.raw_features(), 1);
    }

    #[test]
    fn dimension_check() {
        let m = LinearModel::zeros(3, 2, true);
        assert!(m.check_dims(3, 2).is_ok());
        assert!(m.check_dims(3, 3).is_err());
    }
}
