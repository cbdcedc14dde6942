use crate::error::{Error, Result};
use crate::qubo::QuboProblem;

/// `energy(bits with bit i flipped) − energy(bits)` in O(M).
pub fn incremental_delta(problem: &QuboProblem, bits: &[bool], flip_index: usize) -> Result<f64> {
    let m = problem.num_variables();
    if bits.len() != m {
        return Err(Error::invalid(format!(
            "bit vector has length {}, problem has {m} variables",
            bits.len()
        )));
    }
    if flip_index >= m {
        return Err(Error::invalid(format!(
            "flip index {flip_index} out of range for {m} variables"
        )));
    }
    let row = problem.quadratic_row(flip_index);
    let coupling: f64 = bits
        .iter()
        .zip(row)
        .enumerate()
        .filter(|&(j, (&z, _))| z && j != flip_index)
        .map(|(_, (_, a))| a)
        .sum();
    let field = problem.linear()[flip_index] + row[flip_index] + 2.0 * coupling;
    Ok(if bits[flip_index] { -field } else { field })
}

/// Cached local fields `g_i = b_i + A_ii + 2 Σ_{j≠i} A_ij z_j`, so that
/// flipping bit `i` changes the energy by `±g_i` and costs O(M) to apply.
pub(crate) struct LocalFields<'a> {
    problem: &'a QuboProblem,
    bits: Vec<bool>,
    fields: Vec<f64>,
}

impl<'a> LocalFields<'a> {
    pub(crate) fn new(problem: &'a QuboProblem, bits: Vec<bool>) -> Self {
        let m = problem.num_variables();
        let mut fields: Vec<f64> = (0..m)
            .map(|i| problem.linear()[i] + problem.quadratic_row(i)[i])
            .collect();
        for (j, _) in bits.iter().enumerate().filter(|(_, &z)| z) {
            let row = problem.quadratic_row(j);
            for (i, f) in fields.iter_mut().enumerate() {
                if i != j {
                    *f += 2.0 * row[i];
                }
            }
        }
        Self {
            problem,
            bits,
            fields,
        }
    }

    #[inline]
    pub(crate) fn delta(&self, i: usize) -> f64 {
        if self.bits[i] {
            -self.fields[i]
        } else {
            self.fields[i]
        }
    }

    pub(crate) fn flip(&mut self, j: usize) {
        let sign = if self.bits[j] { -2.0 } else { 2.0 };
        self.bits[j] = !self.bits[j];
        let row = self.problem.quadratic_row(j);
        let own = self.fields[j];
        for (f, a) in self.fields.iter_mut().zip(row) {
            *f += sign * a;
        }
        self.fields[j] = own;
    }

    pub(crate) fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn into_bits(self) -> Vec<bool> {
        self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::energy;
    use proptest::prelude::*;

    fn two_point() -> QuboProblem {
        QuboProblem::from_dense(vec![0.125; 4], vec![-0.5, -0.5], 2, 1).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(
            incremental_delta(&two_point(), &[false, false], 0).unwrap(),
            -0.375
        );
        let linear = QuboProblem::from_dense(vec![0.0; 9], vec![0.5, -2.0, 3.0], 3, 1).unwrap();
        for i in 0..3 {
            assert_eq!(
                incremental_delta(&linear, &[false; 3], i).unwrap(),
                linear.linear()[i]
            );
        }
        assert!(incremental_delta(&two_point(), &[false, false], 2).is_err());
        assert!(incremental_delta(&two_point(), &[false], 0).is_err());
    }

    fn random_problem() -> impl Strategy<Value = (QuboProblem, Vec<bool>)> {
        (1usize..12).prop_flat_map(|m| {
            (
                prop::collection::vec(-2.0f64..2.0, m * m),
                prop::collection::vec(-2.0f64..2.0, m),
                prop::collection::vec(any::<bool>(), m),
            )
                .prop_map(move |(raw, linear, bits)| {
                    let mut a = vec![0.0; m * m];
                    for i in 0..m {
                        for j in 0..m {
                            a[i * m + j] = 0.5 * (raw[i * m + j] + raw[j * m + i]);
                        }
                    }
                    (QuboProblem::from_dense(a, linear, m, 1).unwrap(), bits)
                })
        })
    }

    proptest! {
        #[test]
        fn delta_matches_full_evaluation((q, bits) in random_problem(), pick in any::<prop::sample::Index>()) {
            let i = pick.index(bits.len());
            let before = energy(&q, &bits).unwrap();
            let mut flipped = bits.clone();
            flipped[i] = !flipped[i];
            let after = energy(&q, &flipped).unwrap();
            let d = incremental_delta(&q, &bits, i).unwrap();
            prop_assert!((d - (after - before)).abs() <= 1e-10);
            let back = incremental_delta(&q, &flipped, i).unwrap();
            prop_assert!((d + back).abs() <= 1e-12);
        }

        #[test]
        fn cached_fields_track_flips((q, bits) in random_problem(), flips in prop::collection::vec(any::<prop::sample::Index>(), 1..20)) {
            let mut state = LocalFields::new(&q, bits.clone());
            let mut e = energy(&q, &bits).unwrap();
            for f in flips {
                let i = f.index(bits.len());
                prop_assert!((state.delta(i) - incremental_delta(&q, state.bits(), i).unwrap()).abs() <= 1e-10);
                e += state.delta(i);
                state.flip(i);
            }
            prop_assert!((e - energy(&q, state.bits()).unwrap()).abs() <= 1e-9);
        }
    }
}
