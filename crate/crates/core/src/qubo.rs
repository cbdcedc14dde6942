//! QUBO encoding of the linear SVM dual.
//!
//! Each multiplier `λ_i` is written as a fixed-point number over a sorted
//! vector of powers of two, `λ_i = Σ_k p_k z_{iK+k}`. Substituting into the
//! matrix-form dual `½ λᵀ (XXᵀ ⊙ YYᵀ) λ − λᵀ1` gives a quadratic form over
//! `M = N·K` bits, minimized as `zᵀAz + zᵀb` with
//!
//! ```text
//! A[(i,k),(j,l)] = (½ H_ij + μ y_i y_j) p_k p_l      H = XXᵀ ⊙ YYᵀ
//! b[(i,k)]       = −p_k
//! ```
//!
//! where `μ ≥ 0` optionally penalizes `(Σ λ_i y_i)²`. Bit `(i, k)` lives at
//! flat index `i·K + k`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gram::signed_gram_matrix;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Sorted, strictly increasing powers of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PrecisionVector(Vec<f64>);

fn is_power_of_two(v: f64) -> bool {
    const MANTISSA: u64 = (1 << 52) - 1;
    v.is_normal() && v > 0.0 && v.to_bits() & MANTISSA == 0
}

impl PrecisionVector {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::invalid(
                "precision vector must have at least one entry",
            ));
        }
        if let Some(bad) = powers.iter().find(|&&p| !is_power_of_two(p)) {
            return Err(Error::invalid(format!(
                "precision entry {bad} is not a power of two"
            )));
        }
        if powers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "precision vector must be strictly increasing",
            ));
        }
        Ok(Self(powers))
    }

    /// `2^lo, 2^(lo+1), ..., 2^hi`.
    pub fn from_exponents(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::invalid(format!("empty exponent range {lo}..={hi}")));
        }
        Self::new((lo..=hi).map(|e| 2f64.powi(e)).collect())
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest value a single multiplier can take.
    pub fn max_value(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `(¼, ½, 1, 2)`.
impl Default for PrecisionVector {
    fn default() -> Self {
        Self(vec![0.25, 0.5, 1.0, 2.0])
    }
}

impl TryFrom<Vec<f64>> for PrecisionVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PrecisionVector> for Vec<f64> {
    fn from(p: PrecisionVector) -> Self {
        p.0
    }
}

/// Minimize `zᵀAz + zᵀb` over `z ∈ {0,1}^M` with `A` stored as a dense
/// symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    quadratic: Vec<f64>,
    linear: Vec<f64>,
    n_points: usize,
    k_bits: usize,
}

impl QuboProblem {
    /// Wraps a dense row-major symmetric matrix and linear vector.
    pub fn from_dense(
        quadratic: Vec<f64>,
        linear: Vec<f64>,
        n_points: usize,
        k_bits: usize,
    ) -> Result<Self> {
        let m = linear.len();
        if m == 0 {
            return Err(Error::invalid("QUBO must have at least one variable"));
        }
        if n_points * k_bits != m {
            return Err(Error::invalid(format!(
                "{n_points} points x {k_bits} bits does not match {m} variables"
            )));
        }
        if quadratic.len() != m * m {
            return Err(Error::invalid(format!(
                "quadratic matrix has {} entries, expected {m}x{m}",
                quadratic.len()
            )));
        }
        if quadratic.iter().chain(&linear).any(|v| !v.is_finite()) {
            return Err(Error::invalid("QUBO coefficients must be finite"));
        }
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (quadratic[i * m + j], quadratic[j * m + i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid(format!(
                        "quadratic matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self {
            quadratic,
            linear,
            n_points,
            k_bits,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.linear.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn k_bits(&self) -> usize {
        self.k_bits
    }

    pub fn quadratic(&self) -> &[f64] {
        &self.quadratic
    }

    pub fn quadratic_row(&self, i: usize) -> &[f64] {
        let m = self.num_variables();
        &self.quadratic[i * m..(i + 1) * m]
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    /// Upper-triangular coefficients `Q` with `zᵀAz = Σ_{i≤j} Q_ij z_i z_j`:
    /// `Q_ii = A_ii`, `Q_ij = 2 A_ij`. Exact zeros are skipped.
    pub fn upper_triangular(&self) -> Vec<(usize, usize, f64)> {
        let m = self.num_variables();
        let mut out = Vec::new();
        for i in 0..m {
            let row = self.quadratic_row(i);
            if row[i] != 0.0 {
                out.push((i, i, row[i]));
            }
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if v != 0.0 {
                    out.push((i, j, 2.0 * v));
                }
            }
        }
        out
    }

    /// Inverse of [`upper_triangular`](Self::upper_triangular). Repeated
    /// `(i, j)` entries accumulate.
    pub fn from_upper_triangular(
        entries: &[(usize, usize, f64)],
        linear: Vec<f64>,
        n_points: usize,
        k_bits: usize,
    ) -> Result<Self> {
        let m = linear.len();
        let mut quadratic = vec![0.0; m * m];
        for &(i, j, v) in entries {
            if i >= m || j >= m {
                return Err(Error::invalid(format!(
                    "entry ({i}, {j}) out of range for {m} variables"
                )));
            }
            if i == j {
                quadratic[i * m + i] += v;
            } else {
                quadratic[i * m + j] += v / 2.0;
                quadratic[j * m + i] += v / 2.0;
            }
        }
        Self::from_dense(quadratic, linear, n_points, k_bits)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = QuboDocument {
            n_points: self.n_points,
            k_bits: self.k_bits,
            linear: self.linear.clone(),
            quadratic: self.upper_triangular(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: QuboDocument = serde_json::from_str(s)?;
        Self::from_upper_triangular(&doc.quadratic, doc.linear, doc.n_points, doc.k_bits)
    }
}

/// Interchange form read by external samplers.
#[derive(Debug, Serialize, Deserialize)]
struct QuboDocument {
    n_points: usize,
    k_bits: usize,
    linear: Vec<f64>,
    quadratic: Vec<(usize, usize, f64)>,
}

/// Builds the QUBO for `train` under `precision`.
///
/// `equality_penalty = 0` gives the plain binarized dual; a positive value
/// adds `μ (Σ λ_i y_i)²` to every energy.
pub fn build_qubo(
    train: &Dataset,
    precision: &PrecisionVector,
    equality_penalty: f64,
) -> Result<QuboProblem> {
    if !(equality_penalty >= 0.0 && equality_penalty.is_finite()) {
        return Err(Error::invalid(format!(
            "equality penalty must be a finite nonnegative number, got {equality_penalty}"
        )));
    }
    train.require_both_classes()?;

    let n = train.len();
    let p = precision.powers();
    let k = p.len();
    let m = n * k;
    let hessian = signed_gram_matrix(train);

    let mut quadratic = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let block = 0.5 * hessian[i * n + j] + equality_penalty * train.y(i) * train.y(j);
            for (a, pa) in p.iter().enumerate() {
                let row = (i * k + a) * m + j * k;
                for (b, pb) in p.iter().enumerate() {
                    quadratic[row + b] = block * pa * pb;
                }
            }
        }
    }
    let linear = (0..n).flat_map(|_| p.iter().map(|&v| -v)).collect();

    Ok(QuboProblem {
        quadratic,
        linear,
        n_points: n,
        k_bits: k,
    })
}

fn check_len(problem: &QuboProblem, bits: &[bool]) -> Result<()> {
    if bits.len() != problem.num_variables() {
        return Err(Error::invalid(format!(
            "bit vector has length {}, problem has {} variables",
            bits.len(),
            problem.num_variables()
        )));
    }
    Ok(())
}

/// `zᵀAz + zᵀb`.
pub fn energy(problem: &QuboProblem, bits: &[bool]) -> Result<f64> {
    check_len(problem, bits)?;
    Ok(energy_unchecked(problem, bits))
}

pub(crate) fn energy_unchecked(problem: &QuboProblem, bits: &[bool]) -> f64 {
    let mut total = 0.0;
    for (i, _) in bits.iter().enumerate().filter(|(_, &z)| z) {
        let row = problem.quadratic_row(i);
        let quad: f64 = bits
            .iter()
            .zip(row)
            .filter(|(&z, _)| z)
            .map(|(_, a)| a)
            .sum();
        total += quad + problem.linear[i];
    }
    total
}

/// `λ_i = Σ_k p_k z_{iK+k}`.
pub fn decode_multipliers(
    bits: &[bool],
    precision: &PrecisionVector,
    n_points: usize,
) -> Result<Vec<f64>> {
    let k = precision.len();
    if bits.len() != n_points * k {
        return Err(Error::invalid(format!(
            "bit vector has length {}, expected {n_points} x {k}",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            chunk
                .iter()
                .zip(precision.powers())
                .filter(|(&z, _)| z)
                .map(|(_, p)| p)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_points() -> Dataset {
        Dataset::from_rows(&[vec![1.0], vec![-1.0]], vec![1, -1]).unwrap()
    }

    #[test]
    fn precision_vector_validation() {
        assert!(PrecisionVector::new(vec![0.25, 0.5, 1.0, 2.0]).is_ok());
        assert!(PrecisionVector::new(vec![]).is_err());
        assert!(PrecisionVector::new(vec![0.3]).is_err());
        assert!(PrecisionVector::new(vec![1.0, 0.5]).is_err());
        assert!(PrecisionVector::new(vec![1.0, 1.0]).is_err());
        assert!(PrecisionVector::new(vec![-1.0]).is_err());
        assert_eq!(
            PrecisionVector::from_exponents(-2, 1).unwrap(),
            PrecisionVector::default()
        );
        let parsed: PrecisionVector = serde_json::from_str("[0.5, 1.0]").unwrap();
        assert_eq!(parsed.powers(), &[0.5, 1.0]);
        assert!(serde_json::from_str::<PrecisionVector>("[3.0]").is_err());
    }

    #[test]
    fn two_point_hand_instance() {
        let p = PrecisionVector::new(vec![0.5]).unwrap();
        let q = build_qubo(&two_points(), &p, 0.0).unwrap();
        assert_eq!(q.quadratic(), &[0.125, 0.125, 0.125, 0.125]);
        assert_eq!(q.linear(), &[-0.5, -0.5]);
        assert_eq!(energy(&q, &[false, false]).unwrap(), 0.0);
        assert_eq!(energy(&q, &[true, true]).unwrap(), -0.5);
        assert_eq!(energy(&q, &[true, false]).unwrap(), -0.375);
        assert!(energy(&q, &[true]).is_err());
    }

    #[test]
    fn unit_precision_is_half_the_hessian() {
        let d = Dataset::from_rows(
            &[vec![1.0, 2.0], vec![0.5, -1.0], vec![3.0, 0.0]],
            vec![1, -1, 1],
        )
        .unwrap();
        let q = build_qubo(&d, &PrecisionVector::new(vec![1.0]).unwrap(), 0.0).unwrap();
        let h = signed_gram_matrix(&d);
        for (a, h) in q.quadratic().iter().zip(&h) {
            assert_eq!(*a, 0.5 * h);
        }
        assert_eq!(q.linear(), &[-1.0; 3]);
    }

    #[test]
    fn default_precision_shape() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![-1.0]], vec![1, 1, -1]).unwrap();
        let q = build_qubo(&d, &PrecisionVector::default(), 0.0).unwrap();
        assert_eq!(q.num_variables(), 12);
        assert_eq!(q.quadratic().len(), 144);
        assert_eq!((q.n_points(), q.k_bits()), (3, 4));
    }

    #[test]
    fn single_class_rejected() {
        let d = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![1, 1]).unwrap();
        assert!(matches!(
            build_qubo(&d, &PrecisionVector::default(), 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_qubo(&two_points(), &PrecisionVector::default(), -1.0).is_err());
    }

    #[test]
    fn decode_examples() {
        let half = PrecisionVector::new(vec![0.5]).unwrap();
        assert_eq!(
            decode_multipliers(&[true, true], &half, 2).unwrap(),
            vec![0.5, 0.5]
        );
        let p = PrecisionVector::new(vec![0.25, 0.5]).unwrap();
        assert_eq!(
            decode_multipliers(&[false, true, false, true], &p, 2).unwrap(),
            vec![0.5, 0.5]
        );
        assert_eq!(
            decode_multipliers(&[true; 4], &p, 2).unwrap(),
            vec![0.75, 0.75]
        );
        assert!(decode_multipliers(&[true; 3], &p, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let q = build_qubo(
            &two_points(),
            &PrecisionVector::new(vec![0.5, 1.0]).unwrap(),
            0.0,
        )
        .unwrap();
        let text = q.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n_points"], 2);
        assert_eq!(v["k_bits"], 2);
        assert_eq!(v["quadratic"][0], serde_json::json!([0, 0, 0.125]));
        assert_eq!(v["quadratic"][1], serde_json::json!([0, 1, 0.5]));
        assert_eq!(QuboProblem::from_json(&text).unwrap(), q);
        assert!(QuboProblem::from_json(
            r#"{"n_points":1,"k_bits":1,"linear":[1.0],"quadratic":[[0,3,1.0]]}"#
        )
        .is_err());
    }

    #[test]
    fn asymmetric_dense_rejected() {
        assert!(QuboProblem::from_dense(vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0], 2, 1).is_err());
    }

    /// Dual objective by explicit double sum over raw feature dot products.
    fn dual_by_loops(d: &Dataset, lambda: &[f64]) -> f64 {
        let mut quad = 0.0;
        for i in 0..d.len() {
            for j in 0..d.len() {
                let xx: f64 = d.row(i).iter().zip(d.row(j)).map(|(a, b)| a * b).sum();
                quad += lambda[i] * lambda[j] * d.y(i) * d.y(j) * xx;
            }
        }
        0.5 * quad - lambda.iter().sum::<f64>()
    }

    fn instance() -> impl Strategy<Value = (Dataset, PrecisionVector, Vec<bool>)> {
        (2usize..=6, 1usize..=4, 1usize..=4, -3i32..=1).prop_flat_map(|(n, d, k, lo)| {
            (
                prop::collection::vec(-2.0f64..2.0, n * d),
                prop::collection::vec(any::<bool>(), n),
                prop::collection::vec(any::<bool>(), n * k),
            )
                .prop_map(move |(f, signs, bits)| {
                    let mut labels: Vec<i8> =
                        signs.iter().map(|&s| if s { 1 } else { -1 }).collect();
                    labels[0] = 1;
                    labels[1] = -1;
                    let data = Dataset::from_flat(f, d, labels).unwrap();
                    let p = PrecisionVector::from_exponents(lo, lo + k as i32 - 1).unwrap();
                    (data, p, bits)
                })
        })
    }

    proptest! {
        #[test]
        fn energy_matches_dual_by_loops((data, p, bits) in instance()) {
            let q = build_qubo(&data, &p, 0.0).unwrap();
            let e = energy(&q, &bits).unwrap();
            let lambda = decode_multipliers(&bits, &p, data.len()).unwrap();
            let dual = dual_by_loops(&data, &lambda);
            prop_assert!((e - dual).abs() <= 1e-9 * (1.0 + e.abs()), "{} vs {}", e, dual);
        }

        #[test]
        fn penalty_adds_squared_constraint((data, p, bits) in instance(), mu in 0.0f64..5.0) {
            let plain = build_qubo(&data, &p, 0.0).unwrap();
            let penalized = build_qubo(&data, &p, mu).unwrap();
            let lambda = decode_multipliers(&bits, &p, data.len()).unwrap();
            let residual: f64 = lambda.iter().zip(data.labels()).map(|(l, &y)| l * f64::from(y)).sum();
            let gain = energy(&penalized, &bits).unwrap() - energy(&plain, &bits).unwrap();
            prop_assert!((gain - mu * residual * residual).abs() <= 1e-9 * (1.0 + gain.abs()));
        }

        #[test]
        fn decoding_is_additive_over_disjoint_supports(
            (k, n, picks) in (1usize..4, 1usize..5)
                .prop_flat_map(|(k, n)| (Just(k), Just(n), prop::collection::vec(0u8..3, n * k))),
        ) {
            let p = PrecisionVector::from_exponents(-1, k as i32 - 2).unwrap();
            let a: Vec<bool> = picks.iter().map(|&t| t == 1).collect();
            let b: Vec<bool> = picks.iter().map(|&t| t == 2).collect();
            let union: Vec<bool> = picks.iter().map(|&t| t != 0).collect();
            let da = decode_multipliers(&a, &p, n).unwrap();
            let db = decode_multipliers(&b, &p, n).unwrap();
            let du = decode_multipliers(&union, &p, n).unwrap();
            for i in 0..n {
                prop_assert_eq!(du[i], da[i] + db[i]);
            }
        }
    }

    #[test]
    fn permuting_points_permutes_blocks() {
        let rows = [vec![1.0, -0.5], vec![0.25, 2.0], vec![-1.5, 0.75]];
        let labels = vec![1, -1, 1];
        let perm = [2usize, 0, 1];
        let a = Dataset::from_rows(&rows, labels.clone()).unwrap();
        let permuted_rows: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let b =
            Dataset::from_rows(&permuted_rows, perm.iter().map(|&i| labels[i]).collect()).unwrap();
        let p = PrecisionVector::default();
        let (qa, qb) = (
            build_qubo(&a, &p, 0.3).unwrap(),
            build_qubo(&b, &p, 0.3).unwrap(),
        );
        assert_eq!(qa, build_qubo(&a, &p, 0.3).unwrap());
        let k = p.len();
        let m = qa.num_variables();
        for (bi, &ai) in perm.iter().enumerate() {
            for (bj, &aj) in perm.iter().enumerate() {
                for s in 0..k {
                    for t in 0..k {
                        assert_eq!(
                            qb.quadratic()[(bi * k + s) * m + bj * k + t],
                            qa.quadratic()[(ai * k + s) * m + aj * k + t]
                        );
                    }
                }
            }
            assert_eq!(
                &qb.linear()[bi * k..(bi + 1) * k],
                &qa.linear()[ai * k..(ai + 1) * k]
            );
        }
    }
}
