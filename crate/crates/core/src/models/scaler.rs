use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

/// Per-feature z-score standardization, keyed by feature name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn new(names: Vec<String>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if names.len() != means.len() || names.len() != stds.len() {
            return Err(Error::invalid("scaler names, means and stds differ in length"));
        }
        if let Some(s) = stds.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::invalid(alloc::format!("scaler std {s} is not positive")));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("scaler mean is not finite"));
        }
        Ok(Scaler { names, means, stds })
    }

    /// Column means and population standard deviations. Constant columns
    /// get a std of 1 so they standardize to 0.
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len().max(1) as f64;
        let width = data.width();
        let mut means = alloc::vec![0.0; width];
        for row in data.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = alloc::vec![0.0; width];
        for row in data.rows() {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in stds.iter_mut() {
            *s = libm::sqrt(*s / n);
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        Scaler { names: data.feature_names().to_vec(), means, stds }
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn transform_value(&self, name: &str, value: f64) -> Result<f64> {
        let i = self.position(name).ok_or_else(|| Error::MissingFeature(name.into()))?;
        Ok((value - self.means[i]) / self.stds[i])
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, data: &Dataset) -> Dataset {
        let rows = data.rows().iter().map(|r| self.transform_row(r)).collect();
        Dataset::new(rows, data.labels().to_vec(), data.feature_names().to_vec())
            .expect("standardizing keeps the dataset shape")
    }
}
