//! Linear classifiers recovered from dual multipliers.
//!
//! Throughout, the primal is `min ½‖w‖²` so that `w = Σ λ_i y_i x_i` and the
//! dual objective is `½ λᵀ(XXᵀ ⊙ YYᵀ)λ − Σ λ_i`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gram::{dot, signed_gram_matrix};

/// Multipliers above this count as support vectors.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub bias: f64,
    /// Empty for models built directly from a hyperplane.
    pub lambdas: Vec<f64>,
    pub support_indices: Vec<usize>,
}

impl SvmModel {
    /// A bare hyperplane with no training provenance.
    pub fn from_hyperplane(w: Vec<f64>, bias: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::invalid("weight vector must be nonempty"));
        }
        Ok(Self {
            w,
            bias,
            lambdas: Vec::new(),
            support_indices: Vec::new(),
        })
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.w.len() {
            return Err(Error::invalid(format!(
                "point has {} features, model expects {}",
                x.len(),
                self.w.len()
            )));
        }
        Ok(dot(&self.w, x) + self.bias)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_lambdas(train: &Dataset, lambdas: &[f64]) -> Result<()> {
    if lambdas.len() != train.len() {
        return Err(Error::invalid(format!(
            "{} multipliers for {} training points",
            lambdas.len(),
            train.len()
        )));
    }
    if let Some((i, l)) = lambdas
        .iter()
        .enumerate()
        .find(|(_, l)| !(**l >= 0.0 && l.is_finite()))
    {
        return Err(Error::invalid(format!(
            "multiplier {i} is {l}, expected finite and >= 0"
        )));
    }
    Ok(())
}

/// `½ λᵀ(XXᵀ ⊙ YYᵀ)λ − λᵀ1` (the minimization form of the dual).
pub fn dual_objective(train: &Dataset, lambdas: &[f64]) -> Result<f64> {
    check_lambdas(train, lambdas)?;
    let n = train.len();
    let h = signed_gram_matrix(train);
    let quad: f64 = (0..n)
        .map(|i| lambdas[i] * dot(&h[i * n..(i + 1) * n], lambdas))
        .sum();
    Ok(0.5 * quad - lambdas.iter().sum::<f64>())
}

/// `Σ λ_i y_i x_i`.
pub(crate) fn weights_from_multipliers(train: &Dataset, lambdas: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; train.n_features()];
    for (i, (x, &l)) in train.rows().zip(lambdas).enumerate() {
        if l == 0.0 {
            continue;
        }
        let c = l * train.y(i);
        for (wj, xj) in w.iter_mut().zip(x) {
            *wj += c * xj;
        }
    }
    w
}

pub(crate) fn support_indices(lambdas: &[f64]) -> Vec<usize> {
    lambdas
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > SUPPORT_THRESHOLD)
        .map(|(i, _)| i)
        .collect()
}

/// Weights from the multipliers; bias is the mean of `y_i − wᵀx_i` over the
/// support vectors.
pub fn recover_model(train: &Dataset, lambdas: &[f64]) -> Result<SvmModel> {
    check_lambdas(train, lambdas)?;
    let support = support_indices(lambdas);
    if support.is_empty() {
        return Err(Error::NoSupportVectors {
            threshold: SUPPORT_THRESHOLD,
        });
    }
    let w = weights_from_multipliers(train, lambdas);
    let bias = support
        .iter()
        .map(|&i| train.y(i) - dot(&w, train.row(i)))
        .sum::<f64>()
        / support.len() as f64;
    Ok(SvmModel {
        w,
        bias,
        lambdas: lambdas.to_vec(),
        support_indices: support,
    })
}

/// `sign(wᵀx + bias)`, with points exactly on the plane labelled `+1`.
pub fn predict(model: &SvmModel, x: &[f64]) -> Result<i8> {
    Ok(if model.decision_value(x)? >= 0.0 {
        1
    } else {
        -1
    })
}

/// Fraction of points whose predicted label matches.
pub fn accuracy(model: &SvmModel, data: &Dataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::invalid("cannot score an empty dataset"));
    }
    let mut correct = 0usize;
    for (x, &y) in data.rows().zip(data.labels()) {
        if predict(model, x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}
