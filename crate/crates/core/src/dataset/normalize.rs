use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::svm::SvmModel;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Affine map of each column onto `[0, 1]`.
    #[default]
    MinMax,
    /// Zero mean, unit population variance per column.
    ZScore,
}

/// Per-column affine map `x -> (x - offset) / spread`, fitted on one dataset
/// and applicable to others (e.g. fit on a training split, apply to the
/// test split). Constant columns get `spread = 0` and map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    offset: Vec<f64>,
    spread: Vec<f64>,
}

impl Normalizer {
    pub fn fit(data: &Dataset, method: Normalization) -> Self {
        let d = data.n_features();
        let n = data.len() as f64;
        let mut offset = Vec::with_capacity(d);
        let mut spreads = Vec::with_capacity(d);
        for j in 0..d {
            let column = data.rows().map(|r| r[j]);
            let (o, spread) = match method {
                Normalization::MinMax => {
                    let (lo, hi) = column
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        });
                    (lo, hi - lo)
                }
                Normalization::ZScore => {
                    // The mean of identical values can round away from them.
                    let first = data.row(0)[j];
                    if column.clone().all(|v| v == first) {
                        (first, 0.0)
                    } else {
                        let mean = column.clone().sum::<f64>() / n;
                        let var = column.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                        (mean, var.sqrt())
                    }
                }
            };
            offset.push(o);
            spreads.push(spread);
        }
        Self {
            offset,
            spread: spreads,
        }
    }

    /// Applies the fitted map. Panics if the feature count differs from the
    /// fitted dataset's.
    pub fn transform(&self, data: &Dataset) -> Dataset {
        assert_eq!(
            data.n_features(),
            self.offset.len(),
            "feature count mismatch"
        );
        let features = data
            .rows()
            .flat_map(|r| {
                r.iter()
                    .zip(self.offset.iter().zip(&self.spread))
                    .map(|(v, (o, s))| if *s > 0.0 { (v - o) / s } else { 0.0 })
            })
            .collect();
        data.with_features(features)
    }

    /// Rewrites a model trained on normalized features so that it scores
    /// raw features directly. Multipliers and support indices are kept.
    pub fn unnormalize_model(&self, model: &SvmModel) -> SvmModel {
        assert_eq!(model.w.len(), self.offset.len(), "feature count mismatch");
        let mut bias = model.bias;
        let w = model
            .w
            .iter()
            .zip(self.offset.iter().zip(&self.spread))
            .map(|(w, (o, s))| {
                if *s > 0.0 {
                    bias -= w * o / s;
                    w / s
                } else {
                    0.0
                }
            })
            .collect();
        SvmModel {
            w,
            bias,
            ..model.clone()
        }
    }
}

/// Fits and applies a normalizer on the same dataset.
pub fn normalize(data: &Dataset, method: Normalization) -> Dataset {
    Normalizer::fit(data, method).transform(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(values: &[f64]) -> Dataset {
        let labels = (0..values.len())
            .map(|i| if i % 2 == 0 { 1 } else { -1 })
            .collect();
        Dataset::from_flat(values.to_vec(), 1, labels).unwrap()
    }

    #[test]
    fn unnormalized_model_scores_raw_points_identically() {
        let raw = Dataset::from_rows(
            &[
                vec![1.0, 7.0, 3.0],
                vec![-2.0, 7.0, 5.0],
                vec![4.0, 7.0, -1.0],
            ],
            vec![1, -1, 1],
        )
        .unwrap();
        for method in [Normalization::MinMax, Normalization::ZScore] {
            let nz = Normalizer::fit(&raw, method);
            let scaled = nz.transform(&raw);
            let model = SvmModel::from_hyperplane(vec![0.5, 3.0, -1.5], 0.25).unwrap();
            let folded = nz.unnormalize_model(&model);
            for i in 0..raw.len() {
                let a = model.decision_value(scaled.row(i)).unwrap();
                let b = folded.decision_value(raw.row(i)).unwrap();
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn min_max_examples() {
        assert_eq!(
            normalize(&column(&[0.0, 2.0, 4.0]), Normalization::MinMax).features(),
            &[0.0, 0.5, 1.0]
        );
        assert_eq!(
            normalize(&column(&[5.0, 5.0, 5.0]), Normalization::MinMax).features(),
            &[0.0; 3]
        );
        assert_eq!(
            normalize(&column(&[5.0, 5.0]), Normalization::ZScore).features(),
            &[0.0; 2]
        );
    }

    #[test]
    fn fitted_map_applies_to_other_data() {
        let norm = Normalizer::fit(&column(&[0.0, 10.0]), Normalization::MinMax);
        assert_eq!(
            norm.transform(&column(&[5.0, 20.0])).features(),
            &[0.5, 2.0]
        );
    }

    fn dataset_strategy() -> impl Strategy<Value = Dataset> {
        (1usize..4, 1usize..12).prop_flat_map(|(d, n)| {
            prop::collection::vec(-1e3f64..1e3, n * d).prop_map(move |f| {
                let labels = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
                Dataset::from_flat(f, d, labels).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn min_max_is_bounded_and_idempotent(data in dataset_strategy()) {
            let once = normalize(&data, Normalization::MinMax);
            prop_assert!(once.features().iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert_eq!(once.labels(), data.labels());
            let twice = normalize(&once, Normalization::MinMax);
            for (a, b) in once.features().iter().zip(twice.features()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn z_score_moments(data in dataset_strategy()) {
            let z = normalize(&data, Normalization::ZScore);
            let n = data.len() as f64;
            for j in 0..data.n_features() {
                let raw: Vec<f64> = data.rows().map(|r| r[j]).collect();
                let col: Vec<f64> = z.rows().map(|r| r[j]).collect();
                let mean = col.iter().sum::<f64>() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                prop_assert!(mean.abs() < 1e-9);
                let constant = raw.iter().all(|v| *v == raw[0]);
                if constant {
                    prop_assert!(col.iter().all(|v| *v == 0.0));
                } else {
                    prop_assert!((var - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
