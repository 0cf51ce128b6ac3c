//! Synthetic Gaussian clusters with a controllable separation index.
//!
//! Clusters are spherical with unit variance and radius `r = 2σ`. For two
//! clusters whose centres are `D` apart the separation index is
//!
//! ```text
//! J = (D − (r_i + r_j)) / (D + (r_i + r_j))
//! ```
//!
//! so J = 0 means the 2σ shells just touch, positive values leave a gap and
//! negative values overlap them. Centres are placed so that the nearest pair
//! is exactly at the distance that realises the requested J.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

/// Radius of a unit-variance cluster for the separation index.
pub const CLUSTER_RADIUS: f64 = 2.0;

const PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub features: FeatureMatrix,
    /// 0-based true cluster of each row; rows are grouped by cluster.
    pub labels: Vec<usize>,
    pub centres: Array2<f64>,
}

/// Centre distance at which two clusters reach `separation`.
pub fn centre_distance(separation: f64) -> f64 {
    let span = 2.0 * CLUSTER_RADIUS;
    span * (1.0 + separation) / (1.0 - separation)
}

/// Separation index of the closest pair of centres; `NaN` for fewer than two.
pub fn separation_index(centres: &Array2<f64>, radius: f64) -> f64 {
    let k = centres.nrows();
    let mut nearest = f64::INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            let d = (&centres.row(a) - &centres.row(b))
                .mapv(|v| v * v)
                .sum()
                .sqrt();
            nearest = nearest.min(d);
        }
    }
    if !nearest.is_finite() {
        return f64::NAN;
    }
    (nearest - 2.0 * radius) / (nearest + 2.0 * radius)
}

pub fn generate_clusters(
    n_per_cluster: usize,
    k: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<SimulatedData> {
    if n_per_cluster == 0 || k == 0 || d == 0 {
        return Err(Error::InvalidParameter(
            "cluster size, cluster count and dimension must all be positive".into(),
        ));
    }
    if !(-1.0..=1.0).contains(&separation) {
        return Err(Error::InvalidParameter(format!(
            "separation {separation} lies outside [-1, 1]"
        )));
    }
    if separation >= 1.0 {
        return Err(Error::InfeasibleGeometry { k, d, separation });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres = place_centres(k, d, centre_distance(separation), &mut rng)
        .ok_or(Error::InfeasibleGeometry { k, d, separation })?;

    let n = n_per_cluster * k;
    let mut values = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        for i in 0..n_per_cluster {
            let mut row = values.row_mut(c * n_per_cluster + i);
            for (v, centre) in row.iter_mut().zip(centres.row(c)) {
                let z: f64 = rng.sample(StandardNormal);
                *v = centre + z;
            }
            labels.push(c);
        }
    }
    Ok(SimulatedData {
        features: FeatureMatrix::new(values)?,
        labels,
        centres,
    })
}

/// Grows the configuration one centre at a time, each placed exactly
/// `distance` from a random existing centre and no closer to any other.
/// The accept test is scale free, so for a fixed seed the whole layout
/// scales linearly with `distance`.
fn place_centres(k: usize, d: usize, distance: f64, rng: &mut ChaCha8Rng) -> Option<Array2<f64>> {
    let mut centres = Array2::zeros((k, d));
    for placed in 1..k {
        let mut ok = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let anchor = rng.random_range(0..placed);
            let direction = random_direction(d, rng);
            let candidate: Array1<f64> = &centres.row(anchor) + &(direction * distance);
            let clear = (0..placed).all(|j| {
                let gap = (&candidate - &centres.row(j)).mapv(|v| v * v).sum().sqrt();
                gap >= distance * (1.0 - 1e-9)
            });
            if clear {
                centres.row_mut(placed).assign(&candidate);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    Some(centres)
}

fn random_direction(d: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    loop {
        let v: Array1<f64> = (0..d)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let norm = v.mapv(|x| x * x).sum().sqrt();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}
