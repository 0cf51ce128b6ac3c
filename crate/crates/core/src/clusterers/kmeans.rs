//! Lloyd's k-means with k-means++ seeding.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::check_k;
use crate::error::Result;
use crate::model::{AllocationMatrix, FeatureMatrix};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// 0-based cluster per observation.
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub within_ss: f64,
    /// Within-cluster sum of squares after every assignment step of the
    /// winning restart.
    pub ss_trace: Vec<f64>,
    pub iterations: usize,
}

/// Best of [`KMEANS_RESTARTS`] Lloyd runs by within-cluster sum of squares.
pub fn kmeans_fit(x: &FeatureMatrix, k: usize, seed: u64) -> Result<KMeansFit> {
    check_k(x, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..KMEANS_RESTARTS {
        let init = plus_plus_init(x, k, &mut rng);
        let fit = lloyd(x, init);
        if best.as_ref().is_none_or(|b| fit.within_ss < b.within_ss) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Hard allocation with model id `kmeans_k{k}`.
pub fn kmeans(x: &FeatureMatrix, k: usize, seed: u64) -> Result<AllocationMatrix> {
    let fit = kmeans_fit(x, k, seed)?;
    AllocationMatrix::one_hot(&fit.labels, k, format!("kmeans_k{k}"))
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(x: &FeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let v = x.values();
    let n = x.n();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(v.row(i), v.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // Every point coincides with a centre already; take an unused index.
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(v.row(i), v.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, x.d()));
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).assign(&v.row(i));
    }
    centroids
}

/// Nearest centroid per point (ties to the lowest index) and the total cost.
fn assign(x: &FeatureMatrix, centroids: &Array2<f64>, labels: &mut [usize]) -> f64 {
    let v = x.values();
    let mut total = 0.0;
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.outer_iter().enumerate() {
            let d = sq_dist(v.row(i), centroid);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        total += best.1;
    }
    total
}

fn update(x: &FeatureMatrix, labels: &[usize], centroids: &mut Array2<f64>) {
    let v = x.values();
    let k = centroids.nrows();
    let mut counts = vec![0usize; k];
    let mut sums = Array2::<f64>::zeros(centroids.dim());
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = sums.row_mut(l);
        row += &v.row(i);
    }
    let mut taken = Vec::new();
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            let mut row = centroids.row_mut(c);
            row.assign(&sums.row(c));
            row /= count as f64;
        }
    }
    // Empty clusters restart at the point farthest from its own centroid.
    for c in (0..k).filter(|&c| counts[c] == 0) {
        let far = (0..x.n())
            .filter(|i| !taken.contains(i))
            .map(|i| (i, sq_dist(v.row(i), centroids.row(labels[i]))))
            .fold((0, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        taken.push(far.0);
        centroids.row_mut(c).assign(&v.row(far.0));
    }
}

fn lloyd(x: &FeatureMatrix, mut centroids: Array2<f64>) -> KMeansFit {
    let mut labels = vec![0; x.n()];
    let mut ss = assign(x, &centroids, &mut labels);
    let mut ss_trace = vec![ss];
    let mut next = labels.clone();
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITER {
        iterations += 1;
        update(x, &labels, &mut centroids);
        ss = assign(x, &centroids, &mut next);
        ss_trace.push(ss);
        if next == labels {
            break;
        }
        std::mem::swap(&mut labels, &mut next);
    }
    // Leave the centroids consistent with the final labels.
    update(x, &next, &mut centroids);
    KMeansFit {
        labels: next,
        centroids,
        within_ss: ss,
        ss_trace,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::harden;

    fn line(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(Array2::from_shape_vec((points.len(), 1), points.to_vec()).unwrap())
            .unwrap()
    }

    #[test]
    fn separated_pairs() {
        let x = line(&[0.0, 0.1, 10.0, 10.1]);
        let fit = kmeans_fit(&x, 2, 7).unwrap();
        assert_eq!(fit.labels[0], fit.labels[1]);
        assert_eq!(fit.labels[2], fit.labels[3]);
        assert_ne!(fit.labels[0], fit.labels[2]);
        assert!((fit.within_ss - 0.01).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let x = line(&[0.0, 3.0, 7.0, 12.0, 20.0]);
        let fit = kmeans_fit(&x, 5, 1).unwrap();
        let mut labels = fit.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 5);
        assert_eq!(fit.within_ss, 0.0);
    }

    #[test]
    fn k_too_large() {
        let x = line(&[0.0, 1.0, 2.0]);
        assert_eq!(
            kmeans(&x, 4, 0).unwrap_err(),
            crate::Error::KTooLarge { k: 4, n: 3 }
        );
    }

    #[test]
    fn ss_trace_never_increases() {
        let values = Array2::from_shape_fn((60, 2), |(i, j)| {
            ((i * 37 + j * 11) % 23) as f64 + if i % 3 == 0 { 15.0 } else { 0.0 }
        });
        let x = FeatureMatrix::new(values).unwrap();
        let fit = kmeans_fit(&x, 4, 3).unwrap();
        for w in fit.ss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{:?}", fit.ss_trace);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let x = line(&[0.0, 0.5, 1.0, 4.0, 4.5, 9.0, 9.2, 9.9]);
        let a = kmeans(&x, 3, 11).unwrap();
        let b = kmeans(&x, 3, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model_id(), "kmeans_k3");
        assert!(a.is_hard());
        assert_eq!(harden(&a).len(), 8);
    }
}
