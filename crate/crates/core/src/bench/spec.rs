use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineParams;
use crate::dataset::{
    generate_blobs, generate_hyperplane, load_csv, Dataset, LabelColumn, Normalization,
};
use crate::error::{Error, Result};
use crate::qubo::PrecisionVector;
use crate::solver::SaParams;

/// Where an experiment's points come from. Synthetic sources are
/// regenerated for every repetition; CSV files are read once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    Blobs {
        n_points: usize,
        n_features: usize,
        center_distance: f64,
    },
    Hyperplane {
        n_points: usize,
        normal: Vec<f64>,
        offset: f64,
    },
    Csv {
        path: PathBuf,
        label_column: String,
        positive_class: String,
        negative_class: String,
    },
}

impl DatasetSource {
    pub fn is_synthetic(&self) -> bool {
        !matches!(self, DatasetSource::Csv { .. })
    }

    /// Materializes the source. `seed` is ignored for CSV files.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DatasetSource::Blobs {
                n_points,
                n_features,
                center_distance,
            } => generate_blobs(*n_points, *n_features, seed, *center_distance),
            DatasetSource::Hyperplane {
                n_points,
                normal,
                offset,
            } => generate_hyperplane(*n_points, normal.len(), normal, *offset, seed),
            DatasetSource::Csv {
                path,
                label_column,
                positive_class,
                negative_class,
            } => {
                let column: LabelColumn = label_column.parse().unwrap_or_else(|e| match e {});
                load_csv(path, &column, positive_class, negative_class)
            }
        }
    }
}

/// One experiment configuration. Deserializes from any serde format; the
/// CLI accepts TOML and JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub dataset: DatasetSource,
    pub n_train: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub precision: PrecisionVector,
    /// Weight of the `(Σ λ_i y_i)²` term added to the QUBO.
    #[serde(default)]
    pub equality_penalty: f64,
    #[serde(default)]
    pub sa: SaParams,
    #[serde(default)]
    pub baseline: BaselineParams,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub seed: u64,
    /// Also solve exactly when the QUBO has at most
    /// [`EXHAUSTIVE_MAX_VARIABLES`](crate::solver::EXHAUSTIVE_MAX_VARIABLES)
    /// variables.
    #[serde(default = "default_true")]
    pub exhaustive: bool,
    /// Record wall-clock phase timings. Reports are only byte-reproducible
    /// with this off.
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

fn default_repetitions() -> usize {
    10
}

fn default_true() -> bool {
    true
}

impl ExperimentSpec {
    /// A spec with every optional field at its default.
    pub fn new(name: impl Into<String>, dataset: DatasetSource, n_train: usize) -> Self {
        Self {
            name: name.into(),
            dataset,
            n_train,
            repetitions: default_repetitions(),
            precision: PrecisionVector::default(),
            equality_penalty: 0.0,
            sa: SaParams::default(),
            baseline: BaselineParams::default(),
            normalization: Normalization::default(),
            seed: 0,
            exhaustive: true,
            record_timings: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be >= 1"));
        }
        if self.n_train < 2 {
            return Err(Error::invalid("n_train must be >= 2"));
        }
        if !(self.equality_penalty >= 0.0 && self.equality_penalty.is_finite()) {
            return Err(Error::invalid(format!(
                "equality_penalty must be finite and >= 0, got {}",
                self.equality_penalty
            )));
        }
        self.sa.validate()?;
        self.baseline.validate()?;
        if let DatasetSource::Csv { path, .. } = &self.dataset {
            if !path.is_file() {
                return Err(Error::invalid(format!(
                    "dataset file {} does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

/// Seed streams, one per randomized step of a repetition.
pub(crate) mod stream {
    pub const DATA: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const BASELINE: u64 = 3;
    pub const ANNEAL: u64 = 4;
}

/// Mixes a base seed, a stream tag and an index into an independent seed
/// (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
