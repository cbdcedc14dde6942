//! Dense linear-kernel Gram matrices.

use rayon::prelude::*;

use crate::dataset::Dataset;

/// Below this many multiply-adds the Gram matrix is built on one thread.
const PARALLEL_WORK_THRESHOLD: usize = 1 << 18;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `X Xᵀ` as a row-major `N x N` buffer.
///
/// Each entry is one sequential dot product, so the result does not depend
/// on how rows are distributed over threads.
pub fn gram_matrix(data: &Dataset) -> Vec<f64> {
    let n = data.len();
    let upper_row = |i: usize| -> Vec<f64> {
        let xi = data.row(i);
        (i..n).map(|j| dot(xi, data.row(j))).collect()
    };
    let rows: Vec<Vec<f64>> = if n * n * data.n_features() / 2 >= PARALLEL_WORK_THRESHOLD {
        (0..n).into_par_iter().map(upper_row).collect()
    } else {
        (0..n).map(upper_row).collect()
    };

    let mut gram = vec![0.0; n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            let j = i + offset;
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }
    gram
}

/// `X Xᵀ ⊙ Y Yᵀ`, the Hessian of the SVM dual.
pub fn signed_gram_matrix(data: &Dataset) -> Vec<f64> {
    let n = data.len();
    let mut h = gram_matrix(data);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] *= data.y(i) * data.y(j);
        }
    }
    h
}
