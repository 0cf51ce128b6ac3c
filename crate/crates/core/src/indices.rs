//! Internal cluster validity indices.
//!
//! Calinski–Harabasz and Xie–Beni use squared Euclidean distances, as their
//! defining formulas do. Dunn, silhouette and Davies–Bouldin use plain
//! Euclidean distances. Labels are arbitrary integers; label values that no
//! point carries are ignored, so an index never sees an empty cluster.

use std::ops::RangeInclusive;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::clusterers::Clusterer;
use crate::error::{Error, Result};
use crate::model::{harden, FeatureMatrix};

/// Below this squared centroid separation Xie–Beni is undefined.
pub const MIN_CENTROID_SQ_DIST: f64 = 1e-12;

/// The full index suite for one labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexReport {
    /// Calinski–Harabasz; `f64::INFINITY` when within-cluster dispersion is zero.
    pub ch: f64,
    pub xb: f64,
    pub dunn: f64,
    pub silhouette: f64,
    pub davies_bouldin: f64,
    pub k: usize,
    pub n: usize,
    pub centroids: Array2<f64>,
    pub overall_centroid: Array1<f64>,
    pub cluster_sizes: Vec<usize>,
}

/// Points grouped by (compacted) cluster, with centroids.
struct Partition {
    members: Vec<Vec<usize>>,
    centroids: Array2<f64>,
    overall: Array1<f64>,
}

impl Partition {
    fn new(x: &FeatureMatrix, labels: &[usize]) -> Result<Self> {
        if labels.len() != x.n() {
            return Err(Error::DimensionMismatch {
                expected: x.n(),
                found: labels.len(),
            });
        }
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let mut members = vec![Vec::new(); distinct.len()];
        for (i, l) in labels.iter().enumerate() {
            let k = distinct.binary_search(l).expect("label collected above");
            members[k].push(i);
        }
        let values = x.values();
        let mut centroids = Array2::zeros((members.len(), x.d()));
        for (k, m) in members.iter().enumerate() {
            let mut c = centroids.row_mut(k);
            for &i in m {
                c += &values.row(i);
            }
            c /= m.len() as f64;
        }
        let overall = values.mean_axis(ndarray::Axis(0)).expect("n >= 2");
        Ok(Self {
            members,
            centroids,
            overall,
        })
    }

    fn k(&self) -> usize {
        self.members.len()
    }

    fn require_clusters(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::TooFewClusters { k: self.k() });
        }
        Ok(())
    }

    fn within_ss(&self, x: &FeatureMatrix) -> f64 {
        let values = x.values();
        self.members
            .iter()
            .enumerate()
            .map(|(k, m)| {
                m.iter()
                    .map(|&i| sq_dist(values.row(i), self.centroids.row(k)))
                    .sum::<f64>()
            })
            .sum()
    }

    fn min_centroid_sq_dist(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.k() {
            for b in (a + 1)..self.k() {
                best = best.min(sq_dist(self.centroids.row(a), self.centroids.row(b)));
            }
        }
        best
    }
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn pairwise_distances(x: &FeatureMatrix) -> Array2<f64> {
    let n = x.n();
    let v = x.values();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = sq_dist(v.row(i), v.row(j)).sqrt();
            d[[i, j]] = dij;
            d[[j, i]] = dij;
        }
    }
    d
}

/// Between-cluster over within-cluster dispersion, each normalised by its
/// degrees of freedom (K−1 and N−K).
pub fn calinski_harabasz(x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
    let p = Partition::new(x, labels)?;
    ch_of(x, &p)
}

fn ch_of(x: &FeatureMatrix, p: &Partition) -> Result<f64> {
    p.require_clusters()?;
    let (n, k) = (x.n(), p.k());
    if n <= k {
        return Err(Error::TooFewPoints { n, k });
    }
    let between: f64 = p
        .members
        .iter()
        .enumerate()
        .map(|(c, m)| m.len() as f64 * sq_dist(p.overall.view(), p.centroids.row(c)))
        .sum();
    let within = p.within_ss(x);
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Within-cluster sum of squares over N times the smallest squared
/// centroid separation.
pub fn xie_beni(x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
    let p = Partition::new(x, labels)?;
    xb_of(x, &p)
}

fn xb_of(x: &FeatureMatrix, p: &Partition) -> Result<f64> {
    p.require_clusters()?;
    let min_sq_dist = p.min_centroid_sq_dist();
    if min_sq_dist < MIN_CENTROID_SQ_DIST {
        return Err(Error::CoincidentCentroids { min_sq_dist });
    }
    Ok(p.within_ss(x) / (x.n() as f64 * min_sq_dist))
}

fn dunn_of(p: &Partition, dist: &Array2<f64>) -> f64 {
    let mut max_diameter = 0.0_f64;
    for m in &p.members {
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                max_diameter = max_diameter.max(dist[[i, j]]);
            }
        }
    }
    let mut min_between = f64::INFINITY;
    for (a, ma) in p.members.iter().enumerate() {
        for mb in &p.members[a + 1..] {
            for &i in ma {
                for &j in mb {
                    min_between = min_between.min(dist[[i, j]]);
                }
            }
        }
    }
    if max_diameter == 0.0 {
        return if min_between > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    min_between / max_diameter
}

fn silhouette_of(p: &Partition, dist: &Array2<f64>, n: usize) -> f64 {
    let mut total = 0.0;
    for (own, m) in p.members.iter().enumerate() {
        if m.len() == 1 {
            continue;
        }
        for &i in m {
            let a = m.iter().map(|&j| dist[[i, j]]).sum::<f64>() / (m.len() - 1) as f64;
            let b = p
                .members
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != own)
                .map(|(_, other)| {
                    other.iter().map(|&j| dist[[i, j]]).sum::<f64>() / other.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    total / n as f64
}

fn davies_bouldin_of(x: &FeatureMatrix, p: &Partition) -> f64 {
    let values = x.values();
    let scatter: Vec<f64> = p
        .members
        .iter()
        .enumerate()
        .map(|(k, m)| {
            m.iter()
                .map(|&i| sq_dist(values.row(i), p.centroids.row(k)).sqrt())
                .sum::<f64>()
                / m.len() as f64
        })
        .collect();
    let k = p.k();
    let mut total = 0.0;
    for a in 0..k {
        let mut worst = 0.0_f64;
        for b in 0..k {
            if a == b {
                continue;
            }
            let sep = sq_dist(p.centroids.row(a), p.centroids.row(b)).sqrt();
            let ratio = if sep > 0.0 {
                (scatter[a] + scatter[b]) / sep
            } else {
                f64::INFINITY
            };
            worst = worst.max(ratio);
        }
        total += worst;
    }
    total / k as f64
}

/// Smallest between-cluster point distance over the largest cluster diameter.
pub fn dunn(x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
    let p = Partition::new(x, labels)?;
    p.require_clusters()?;
    Ok(dunn_of(&p, &pairwise_distances(x)))
}

/// Mean silhouette width; points in singleton clusters contribute 0.
pub fn silhouette(x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
    let p = Partition::new(x, labels)?;
    p.require_clusters()?;
    Ok(silhouette_of(&p, &pairwise_distances(x), x.n()))
}

pub fn davies_bouldin(x: &FeatureMatrix, labels: &[usize]) -> Result<f64> {
    let p = Partition::new(x, labels)?;
    p.require_clusters()?;
    Ok(davies_bouldin_of(x, &p))
}

/// Computes every index for one labelling.
pub fn auxiliary_indices(x: &FeatureMatrix, labels: &[usize]) -> Result<IndexReport> {
    let p = Partition::new(x, labels)?;
    let ch = ch_of(x, &p)?;
    let xb = xb_of(x, &p)?;
    let dist = pairwise_distances(x);
    Ok(IndexReport {
        ch,
        xb,
        dunn: dunn_of(&p, &dist),
        silhouette: silhouette_of(&p, &dist, x.n()),
        davies_bouldin: davies_bouldin_of(x, &p),
        k: p.k(),
        n: x.n(),
        cluster_sizes: p.members.iter().map(Vec::len).collect(),
        centroids: p.centroids,
        overall_centroid: p.overall,
    })
}

/// One row of an [`index_scan`].
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub k: usize,
    pub outcome: Result<IndexReport>,
}

/// Fits `clusterer` at every k in `k_range` and scores the crisp projection
/// of each fit. A failed fit is recorded in its row, not propagated.
pub fn index_scan(
    x: &FeatureMatrix,
    clusterer: &(dyn Clusterer + Sync),
    k_range: RangeInclusive<usize>,
) -> Result<Vec<ScanRow>> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    let max = x.n() - 1;
    if lo < 2 || hi > max || lo > hi {
        return Err(Error::InvalidRange { lo, hi, max });
    }
    let rows = k_range
        .into_par_iter()
        .map(|k| {
            let outcome = clusterer
                .fit(x, k)
                .and_then(|a| auxiliary_indices(x, &harden(&a)));
            ScanRow { k, outcome }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn line(points: &[f64]) -> FeatureMatrix {
        FeatureMatrix::new(Array2::from_shape_vec((points.len(), 1), points.to_vec()).unwrap())
            .unwrap()
    }

    #[test]
    fn ch_two_pairs() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        assert_eq!(calinski_harabasz(&x, &[1, 1, 2, 2]).unwrap(), 200.0);
    }

    #[test]
    fn ch_zero_within_is_infinite() {
        let x = line(&[0.0, 0.0, 1.0, 1.0]);
        assert_eq!(calinski_harabasz(&x, &[1, 1, 2, 2]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn single_cluster_is_rejected() {
        let x = line(&[0.0, 1.0, 2.0]);
        assert_eq!(
            calinski_harabasz(&x, &[1, 1, 1]).unwrap_err(),
            Error::TooFewClusters { k: 1 }
        );
        assert_eq!(
            xie_beni(&x, &[0, 0, 0]).unwrap_err(),
            Error::TooFewClusters { k: 1 }
        );
    }

    #[test]
    fn ch_needs_more_points_than_clusters() {
        let x = line(&[0.0, 1.0, 2.0]);
        assert_eq!(
            calinski_harabasz(&x, &[0, 1, 2]).unwrap_err(),
            Error::TooFewPoints { n: 3, k: 3 }
        );
    }

    #[test]
    fn xb_two_pairs() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        assert!((xie_beni(&x, &[1, 1, 2, 2]).unwrap() - 0.0025).abs() < 1e-15);
    }

    #[test]
    fn xb_of_repeated_points_is_zero() {
        let x = line(&[3.0, 3.0, 3.0, 7.0, 7.0]);
        assert_eq!(xie_beni(&x, &[0, 0, 0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn xb_coincident_centroids() {
        let x = line(&[-1.0, 1.0, -2.0, 2.0]);
        assert!(matches!(
            xie_beni(&x, &[0, 0, 1, 1]).unwrap_err(),
            Error::CoincidentCentroids { .. }
        ));
    }

    #[test]
    fn auxiliary_suite_on_two_pairs() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        let r = auxiliary_indices(&x, &[1, 1, 2, 2]).unwrap();
        assert!((r.dunn - 9.0).abs() < 1e-12);
        // Per point: (10.5-1)/10.5 and (9.5-1)/9.5, mirrored on the other pair.
        let expected_sil = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
        assert!((r.silhouette - expected_sil).abs() < 1e-12);
        assert!((r.silhouette - 0.89975).abs() < 1e-3);
        assert!((r.davies_bouldin - 0.1).abs() < 1e-12);
        assert_eq!(r.cluster_sizes, vec![2, 2]);
        assert_eq!(r.centroids, array![[0.5], [10.5]]);
        assert_eq!(r.overall_centroid, array![5.5]);
    }

    #[test]
    fn empty_labels_are_dropped() {
        let x = line(&[0.0, 1.0, 10.0, 11.0]);
        let r = auxiliary_indices(&x, &[0, 0, 7, 7]).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.ch, 200.0);
    }

    #[test]
    fn singleton_points_score_zero_silhouette() {
        let x = line(&[0.0, 1.0, 10.0]);
        // Cluster 0 scores (10-1)/10 and (9-1)/9; the singleton adds 0.
        let s = silhouette(&x, &[0, 0, 1]).unwrap();
        assert!((s - (0.9 + 8.0 / 9.0) / 3.0).abs() < 1e-12);
    }
}
