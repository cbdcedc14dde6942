use std::cmp::Ordering;

use super::fields::LocalFields;
use super::BinarySolution;
use crate::error::{Error, Result};
use crate::qubo::{energy_unchecked, QuboProblem};

/// Enumeration budget: `2^26` states.
pub const EXHAUSTIVE_MAX_VARIABLES: usize = 26;

/// Global minimum by Gray-code enumeration of all `2^M` states.
///
/// Ties go to the lexicographically smallest bit vector (bit 0 compared
/// first, `false < true`). The running energy accumulates single-flip
/// deltas, so near-ties are re-scored exactly before deciding.
pub fn solve_exhaustive(problem: &QuboProblem) -> Result<BinarySolution> {
    let m = problem.num_variables();
    if m > EXHAUSTIVE_MAX_VARIABLES {
        return Err(Error::ProblemTooLarge {
            variables: m,
            limit: EXHAUSTIVE_MAX_VARIABLES,
        });
    }
    let scale: f64 = problem
        .quadratic()
        .iter()
        .chain(problem.linear())
        .map(|v| v.abs())
        .sum();
    let tie_window = 1e-9 * (1.0 + scale);

    let mut state = LocalFields::new(problem, vec![false; m]);
    let mut running = 0.0;
    let mut best_bits = vec![false; m];
    let mut best_running = 0.0;
    let mut best_exact = 0.0;

    for step in 1u64..(1u64 << m) {
        let i = step.trailing_zeros() as usize;
        running += state.delta(i);
        state.flip(i);

        if running < best_running - tie_window {
            best_bits.copy_from_slice(state.bits());
            best_running = running;
            best_exact = energy_unchecked(problem, &best_bits);
        } else if running <= best_running + tie_window {
            let exact = energy_unchecked(problem, state.bits());
            let better = match exact.partial_cmp(&best_exact) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => state.bits() < best_bits.as_slice(),
                _ => false,
            };
            if better {
                best_bits.copy_from_slice(state.bits());
                best_running = running;
                best_exact = exact;
            }
        }
    }

    Ok(BinarySolution {
        bits: best_bits,
        energy: best_exact,
        read_index: None,
    })
}
