//! Classical soft-margin dual solver (SMO with maximal-violating-pair
//! working set selection), used as the accuracy and timing reference.
//!
//! Minimizes `f(λ) = ½ λᵀQλ − 1ᵀλ` with `Q = XXᵀ ⊙ YYᵀ` subject to
//! `Σ λ_i y_i = 0` and `0 ≤ λ_i ≤ C`. Each step moves one pair along the
//! direction that keeps the equality constraint, so every iterate stays
//! feasible.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gram::gram_matrix;
use crate::svm::{support_indices, weights_from_multipliers, SvmModel};

/// Curvature floor for degenerate pairs (identical points).
const MIN_CURVATURE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineParams {
    /// Box bound on the multipliers; large values approximate a hard margin.
    pub c: f64,
    /// Stop once the maximal KKT violation drops below this.
    pub tolerance: f64,
    /// Iteration cap, in units of `N` pair updates.
    pub max_passes: usize,
    /// Permutes the scan order used to break ties between equally
    /// violating candidates.
    pub seed: u64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            c: 1e6,
            tolerance: 1e-3,
            max_passes: 10_000,
            seed: 0,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineFit {
    pub model: SvmModel,
    /// False when `max_passes` ran out first; the model is the last iterate.
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective `Σλ − ½λᵀQλ` (maximization form) before the first
    /// update and after every update.
    pub objective_trace: Vec<f64>,
    /// Final `max_{I_up} −y G − min_{I_low} −y G`.
    pub kkt_gap: f64,
    pub gram_time: Duration,
    pub solve_time: Duration,
}

impl BaselineFit {
    /// `Σ λ_i y_i` of the returned multipliers.
    pub fn equality_residual(&self, train: &Dataset) -> f64 {
        self.model
            .lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| l * train.y(i))
            .sum()
    }
}

struct Violation {
    up: usize,
    low: usize,
    gap: f64,
}

pub fn train_classical(train: &Dataset, params: &BaselineParams) -> Result<BaselineFit> {
    params.validate()?;
    train.require_both_classes()?;

    let started = Instant::now();
    let kernel = gram_matrix(train);
    let gram_time = started.elapsed();

    let started = Instant::now();
    let n = train.len();
    let c = params.c;
    let y: Vec<f64> = (0..n).map(|i| train.y(i)).collect();
    let mut lambda = vec![0.0; n];
    // Gradient of f: G = Qλ − 1.
    let mut grad = vec![-1.0; n];

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let objective = |lambda: &[f64], grad: &[f64]| -> f64 {
        // Σλ − ½λᵀQλ with λᵀQλ = λᵀ(G + 1).
        -0.5 * lambda
            .iter()
            .zip(grad)
            .map(|(l, g)| l * (g - 1.0))
            .sum::<f64>()
    };
    let mut trace = vec![objective(&lambda, &grad)];

    let select = |lambda: &[f64], grad: &[f64]| -> Violation {
        let (mut up, mut up_val) = (usize::MAX, f64::NEG_INFINITY);
        let (mut low, mut low_val) = (usize::MAX, f64::INFINITY);
        for &t in &order {
            let score = -y[t] * grad[t];
            let in_up = (y[t] > 0.0 && lambda[t] < c) || (y[t] < 0.0 && lambda[t] > 0.0);
            let in_low = (y[t] > 0.0 && lambda[t] > 0.0) || (y[t] < 0.0 && lambda[t] < c);
            if in_up && score > up_val {
                up = t;
                up_val = score;
            }
            if in_low && score < low_val {
                low = t;
                low_val = score;
            }
        }
        Violation {
            up,
            low,
            gap: up_val - low_val,
        }
    };

    let max_iterations = params.max_passes.saturating_mul(n);
    let mut iterations = 0;
    let mut violation = select(&lambda, &grad);
    while violation.gap >= params.tolerance && iterations < max_iterations {
        let (i, j) = (violation.up, violation.low);
        let curvature =
            (kernel[i * n + i] + kernel[j * n + j] - 2.0 * kernel[i * n + j]).max(MIN_CURVATURE);
        // Step t moves λ_i by y_i·t and λ_j by −y_j·t.
        let limit_i = if y[i] > 0.0 { c - lambda[i] } else { lambda[i] };
        let limit_j = if y[j] > 0.0 { lambda[j] } else { c - lambda[j] };
        let step = (violation.gap / curvature).min(limit_i).min(limit_j);

        lambda[i] = if step == limit_i {
            if y[i] > 0.0 {
                c
            } else {
                0.0
            }
        } else {
            lambda[i] + y[i] * step
        };
        lambda[j] = if step == limit_j {
            if y[j] > 0.0 {
                0.0
            } else {
                c
            }
        } else {
            lambda[j] - y[j] * step
        };
        for (t, g) in grad.iter_mut().enumerate() {
            *g += step * y[t] * (kernel[t * n + i] - kernel[t * n + j]);
        }

        iterations += 1;
        trace.push(objective(&lambda, &grad));
        violation = select(&lambda, &grad);
    }
    let converged = violation.gap < params.tolerance;

    // Offset from the free multipliers, or the middle of the feasible
    // interval when every multiplier sits at a bound.
    let free: Vec<usize> = (0..n)
        .filter(|&t| lambda[t] > 0.0 && lambda[t] < c)
        .collect();
    let rho = if free.is_empty() {
        let up_val = -y[violation.up] * grad[violation.up];
        let low_val = -y[violation.low] * grad[violation.low];
        -(up_val + low_val) / 2.0
    } else {
        free.iter().map(|&t| y[t] * grad[t]).sum::<f64>() / free.len() as f64
    };
    let solve_time = started.elapsed();

    let model = SvmModel {
        w: weights_from_multipliers(train, &lambda),
        bias: -rho,
        support_indices: support_indices(&lambda),
        lambdas: lambda,
    };
    Ok(BaselineFit {
        model,
        converged,
        iterations,
        objective_trace: trace,
        kkt_gap: violation.gap,
        gram_time,
        solve_time,
    })
}
