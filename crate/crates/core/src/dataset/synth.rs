//! Synthetic two-class generators: Gaussian blobs and uniform points
//! labelled by a fixed hyperplane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::{Error, Result};

/// Points closer than this to the labelling hyperplane are redrawn.
pub const HYPERPLANE_MARGIN_EPSILON: f64 = 1e-6;

const DRAWS_PER_POINT: usize = 1000;

/// Two isotropic unit-variance Gaussian clusters whose centers sit
/// `center_distance` apart along a random direction through the origin.
///
/// Labels alternate `+1, -1, +1, ...` so each class gets exactly `n / 2`
/// points.
pub fn generate_blobs(n: usize, d: usize, seed: u64, center_distance: f64) -> Result<Dataset> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "blob count must be even and >= 2, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::invalid("blob dimension must be >= 1"));
    }
    if !(center_distance > 0.0 && center_distance.is_finite()) {
        return Err(Error::invalid(format!(
            "center distance must be positive, got {center_distance}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let direction = loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            break v.into_iter().map(|x| x / norm).collect::<Vec<_>>();
        }
    };
    let half = center_distance / 2.0;

    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label: i8 = if i % 2 == 0 { 1 } else { -1 };
        let offset = half * f64::from(label);
        for &u in &direction {
            let noise: f64 = rng.sample(StandardNormal);
            features.push(offset * u + noise);
        }
        labels.push(label);
    }
    Dataset::from_flat(features, d, labels)
}

/// Uniform points in `[-1, 1]^d` labelled by `sign(w.x + b)`.
///
/// Points within [`HYPERPLANE_MARGIN_EPSILON`] of the plane are redrawn, and
/// the final slot is reserved for the missing class if only one class has
/// been seen so far. Gives up after `1000 * n` draws.
pub fn generate_hyperplane(n: usize, d: usize, w: &[f64], b: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "hyperplane dataset needs n >= 2, got {n}"
        )));
    }
    if d == 0 || w.len() != d {
        return Err(Error::invalid(format!(
            "normal vector has {} entries, expected d = {d} >= 1",
            w.len()
        )));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("hyperplane normal must be nonzero"));
    }
    if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("hyperplane coefficients must be finite"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n * d);
    let mut labels: Vec<i8> = Vec::with_capacity(n);
    let mut counts = [0usize; 2];
    let mut point = vec![0.0; d];

    for _ in 0..DRAWS_PER_POINT * n {
        if labels.len() == n {
            break;
        }
        for v in point.iter_mut() {
            *v = rng.gen_range(-1.0..=1.0);
        }
        let score = w.iter().zip(&point).map(|(a, x)| a * x).sum::<f64>() + b;
        if score.abs() < HYPERPLANE_MARGIN_EPSILON {
            continue;
        }
        let label: i8 = if score > 0.0 { 1 } else { -1 };
        let slot = usize::from(label < 0);
        if labels.len() == n - 1 && counts[1 - slot] == 0 {
            continue;
        }
        counts[slot] += 1;
        labels.push(label);
        features.extend_from_slice(&point);
    }

    if labels.len() < n {
        return Err(Error::GenerationFailure(format!(
            "placed {} of {n} points ({} positive, {} negative) within {} draws",
            labels.len(),
            counts[0],
            counts[1],
            DRAWS_PER_POINT * n
        )));
    }
    Dataset::from_flat(features, d, labels)
}
