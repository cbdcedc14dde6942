//! Single-spin-flip Metropolis simulated annealing over QUBO bit vectors.
//!
//! Each read starts from a uniformly random state and performs a fixed
//! number of sweeps; one sweep visits every variable once in index order.
//! Read `r` draws from ChaCha stream `r` of the seeded generator, so reads
//! are independent of each other and of how they are scheduled on threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fields::LocalFields;
use super::BinarySolution;
use crate::error::{Error, Result};
use crate::qubo::{energy_unchecked, QuboProblem};

/// Stream reserved for drawing the state that calibrates the automatic
/// beta range; read streams count up from zero.
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Beyond this `β·ΔE` the acceptance probability is below `e^-40` and the
/// uniform draw is skipped.
const MAX_EXPONENT: f64 = 40.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSchedule {
    #[default]
    Geometric,
    Linear,
}

/// Sweep budgets standing in for short, medium and long anneals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTier {
    Low,
    Mid,
    High,
}

impl SweepTier {
    pub const ALL: [SweepTier; 3] = [SweepTier::Low, SweepTier::Mid, SweepTier::High];

    pub fn sweeps(self) -> usize {
        match self {
            SweepTier::Low => 20,
            SweepTier::Mid => 100,
            SweepTier::High => 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaParams {
    pub num_reads: usize,
    pub sweeps_per_read: usize,
    /// Inverse temperature at the first sweep. Leave both betas unset to
    /// derive them from the problem's single-flip energy scale.
    pub beta_initial: Option<f64>,
    pub beta_final: Option<f64>,
    pub schedule: BetaSchedule,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            num_reads: 10,
            sweeps_per_read: SweepTier::High.sweeps(),
            beta_initial: None,
            beta_final: None,
            schedule: BetaSchedule::Geometric,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::invalid("num_reads must be >= 1"));
        }
        if self.sweeps_per_read == 0 {
            return Err(Error::invalid("sweeps_per_read must be >= 1"));
        }
        match (self.beta_initial, self.beta_final) {
            (None, None) => Ok(()),
            (Some(lo), Some(hi)) if lo > 0.0 && hi >= lo && hi.is_finite() => Ok(()),
            (Some(lo), Some(hi)) => Err(Error::invalid(format!(
                "need 0 < beta_initial <= beta_final, got {lo} and {hi}"
            ))),
            _ => Err(Error::invalid(
                "set both beta_initial and beta_final, or neither",
            )),
        }
    }

    /// The `(initial, final)` inverse temperatures used for `problem`.
    ///
    /// When unset: `1 / ΔE_max` and `10 / ΔE_min` over the nonzero
    /// single-flip magnitudes at a random state.
    pub fn beta_range(&self, problem: &QuboProblem) -> (f64, f64) {
        if let (Some(lo), Some(hi)) = (self.beta_initial, self.beta_final) {
            return (lo, hi);
        }
        let mut rng = stream_rng(self.seed, CALIBRATION_STREAM);
        let bits: Vec<bool> = (0..problem.num_variables()).map(|_| rng.gen()).collect();
        let state = LocalFields::new(problem, bits);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..problem.num_variables() {
            let d = state.delta(i).abs();
            if d > 0.0 {
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        if hi == 0.0 {
            return (1.0, 1.0);
        }
        (1.0 / hi, 10.0 / lo)
    }

    fn betas(&self, problem: &QuboProblem) -> Vec<f64> {
        let (lo, hi) = self.beta_range(problem);
        let n = self.sweeps_per_read;
        if n == 1 {
            return vec![hi];
        }
        (0..n)
            .map(|s| {
                let t = s as f64 / (n - 1) as f64;
                match self.schedule {
                    BetaSchedule::Geometric => lo * (hi / lo).powf(t),
                    BetaSchedule::Linear => lo + (hi - lo) * t,
                }
            })
            .collect()
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn anneal_read(problem: &QuboProblem, betas: &[f64], seed: u64, read: usize) -> (f64, Vec<bool>) {
    let m = problem.num_variables();
    let mut rng = stream_rng(seed, read as u64);
    let bits: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
    let mut state = LocalFields::new(problem, bits);
    for &beta in betas {
        for i in 0..m {
            let delta = state.delta(i);
            let accept = delta <= 0.0 || {
                let x = beta * delta;
                x < MAX_EXPONENT && rng.gen::<f64>() < (-x).exp()
            };
            if accept {
                state.flip(i);
            }
        }
    }
    let bits = state.into_bits();
    (energy_unchecked(problem, &bits), bits)
}

/// Runs `num_reads` independent anneals and returns the lowest-energy final
/// state. Equal energies go to the lowest read index.
pub fn solve_sa(problem: &QuboProblem, params: &SaParams) -> Result<BinarySolution> {
    params.validate()?;
    let betas = params.betas(problem);
    let reads: Vec<(f64, Vec<bool>)> = (0..params.num_reads)
        .into_par_iter()
        .map(|r| anneal_read(problem, &betas, params.seed, r))
        .collect();

    let (read_index, (energy, bits)) = reads
        .into_iter()
        .enumerate()
        .reduce(|best, cand| if cand.1 .0 < best.1 .0 { cand } else { best })
        .expect("num_reads >= 1");
    Ok(BinarySolution {
        bits,
        energy,
        read_index: Some(read_index),
    })
}
