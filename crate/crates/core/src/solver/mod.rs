//! Samplers that minimize a [`QuboProblem`](crate::qubo::QuboProblem).

mod anneal;
mod exhaustive;
mod fields;

pub use anneal::{solve_sa, BetaSchedule, SaParams, SweepTier};
pub use exhaustive::{solve_exhaustive, EXHAUSTIVE_MAX_VARIABLES};
pub use fields::incremental_delta;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qubo::{energy, QuboProblem};

/// A bit assignment and its energy under the problem it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySolution {
    #[serde(with = "bits_as_ints")]
    pub bits: Vec<bool>,
    pub energy: f64,
    /// Which annealing read produced the sample; `None` for exhaustive search.
    pub read_index: Option<usize>,
}

impl BinarySolution {
    /// Evaluates `bits` on `problem` and records the energy.
    pub fn evaluate(
        problem: &QuboProblem,
        bits: Vec<bool>,
        read_index: Option<usize>,
    ) -> Result<Self> {
        let energy = energy(problem, &bits)?;
        Ok(Self {
            bits,
            energy,
            read_index,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

mod bits_as_ints {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(bits.iter().map(|&b| u8::from(b)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        Vec::<u8>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(D::Error::custom(format!("bit value {other} is not 0 or 1"))),
            })
            .collect()
    }
}
