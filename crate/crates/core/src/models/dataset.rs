use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Rows of fixed width with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(alloc::format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = feature_names.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::invalid(alloc::format!(
                "row {i} has width {}, expected {width}",
                r.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains NaN or infinite values"));
        }
        Ok(Dataset { rows, labels, feature_names })
    }

    /// Builds a dataset with generated names `f0`, `f1`, ...
    pub fn unnamed(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        let names = (0..width).map(|i| alloc::format!("f{i}")).collect();
        Dataset::new(rows, labels, names)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of (control, dementia) rows.
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Keeps the given columns in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if let Some(c) = columns.iter().find(|&&c| c >= self.width()) {
            return Err(Error::invalid(alloc::format!("column {c} out of range")));
        }
        Ok(Dataset {
            rows: self.rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect(),
            labels: self.labels.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
        })
    }

    /// Keeps the named columns in the given order.
    pub fn select_named(&self, names: &[String]) -> Result<Dataset> {
        let cols = names
            .iter()
            .map(|n| {
                self.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| Error::MissingFeature(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_columns(&cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(Dataset::unnamed(alloc::vec![alloc::vec![1.0], alloc::vec![1.0, 2.0]], alloc::vec![0, 1]).is_err());
        assert!(Dataset::unnamed(alloc::vec![alloc::vec![1.0]], alloc::vec![2]).is_err());
        assert!(Dataset::unnamed(alloc::vec![alloc::vec![f64::NAN]], alloc::vec![0]).is_err());
        let d = Dataset::unnamed(alloc::vec![alloc::vec![1.0, 2.0, 3.0]], alloc::vec![1]).unwrap();
        let s = d.select_columns(&[2, 0]).unwrap();
        assert_eq!(s.rows()[0], [3.0, 1.0]);
        assert_eq!(s.feature_names(), ["f2", "f0"]);
        assert!(d.select_columns(&[3]).is_err());
    }
}
