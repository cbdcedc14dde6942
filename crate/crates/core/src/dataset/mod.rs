//! Labelled feature matrices: loading, synthetic generation, normalization
//! and stratified splitting.
//!
//! Labels are always `+1` or `-1`. Features are stored row-major in a single
//! contiguous buffer so rows can be handed out as slices.

mod csv_io;
mod normalize;
mod split;
mod synth;

pub use csv_io::{load_csv, write_csv, write_csv_to, LabelColumn};
pub use normalize::{normalize, Normalization, Normalizer};
pub use split::{split_indices, split_stratified, Split, SplitSpec};
pub use synth::{generate_blobs, generate_hyperplane, HYPERPLANE_MARGIN_EPSILON};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<i8>,
    n_features: usize,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from a row-major feature buffer.
    pub fn from_flat(features: Vec<f64>, n_features: usize, labels: Vec<i8>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("dataset must contain at least one point"));
        }
        if n_features == 0 {
            return Err(Error::invalid("dataset must have at least one feature"));
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::invalid(format!(
                "feature buffer has {} values, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(pos) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::invalid(format!(
                "label at row {pos} is {}, expected +1 or -1",
                labels[pos]
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                pos / n_features,
                pos % n_features
            )));
        }
        Ok(Self {
            features,
            labels,
            n_features,
            feature_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<i8>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::invalid(format!(
                "row {i} has {} features, expected {d}",
                rows[i].len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::from_flat(rows.concat(), d, labels)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::invalid(format!(
                "{} feature names for {} features",
                names.len(),
                self.n_features
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// Label of point `i` as a real, for use in arithmetic.
    pub fn y(&self, i: usize) -> f64 {
        f64::from(self.labels[i])
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of points labelled `+1` and `-1`, in that order.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        (pos, self.labels.len() - pos)
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) => Err(Error::invalid("dataset has no +1 points")),
            (_, 0) => Err(Error::invalid("dataset has no -1 points")),
            _ => Ok(()),
        }
    }

    /// Returns the points at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("subset must select at least one point"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!(
                "index {bad} out of range for {} points",
                self.len()
            )));
        }
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Ok(Self {
            features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
        })
    }

    /// Replaces the features while keeping labels and names.
    pub(crate) fn with_features(&self, features: Vec<f64>) -> Self {
        debug_assert_eq!(features.len(), self.features.len());
        Self {
            features,
            labels: self.labels.clone(),
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_labels_and_shapes() {
        assert!(Dataset::from_flat(vec![1.0, 2.0], 1, vec![1, 0]).is_err());
        assert!(Dataset::from_flat(vec![1.0, 2.0, 3.0], 1, vec![1, -1]).is_err());
        assert!(Dataset::from_flat(vec![], 1, vec![]).is_err());
        assert!(Dataset::from_flat(vec![f64::NAN], 1, vec![1]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0], vec![1.0, 2.0]], vec![1, -1]).is_err());
    }

    #[test]
    fn subset_preserves_rows() {
        let d = Dataset::from_rows(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![1, -1, 1],
        )
        .unwrap();
        let s = d.subset(&[2, 0]).unwrap();
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.labels(), &[1, 1]);
        assert_eq!(d.class_counts(), (2, 1));
        assert!(d.subset(&[3]).is_err());
    }
}
