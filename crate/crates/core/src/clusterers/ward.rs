//! Agglomerative clustering with Ward's criterion on Euclidean input
//! (the `ward.D2` variant: squared distances are updated by Lance–Williams,
//! merge heights are reported as their square roots).

use ndarray::Array2;

use super::check_k;
use crate::error::Result;
use crate::model::{AllocationMatrix, FeatureMatrix};

/// One agglomeration step. `left` and `right` are the smallest point index
/// of each merged cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Labels after undoing all but the first `n - k` merges. Clusters are
    /// numbered in order of their smallest member.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let k = k.clamp(1, self.n);
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for m in &self.merges[..self.n - k] {
            let (a, b) = (root(&mut parent, m.left), root(&mut parent, m.right));
            parent[a.max(b)] = a.min(b);
        }
        let mut label_of_root = vec![usize::MAX; self.n];
        let mut next = 0;
        (0..self.n)
            .map(|i| {
                let r = root(&mut parent, i);
                if label_of_root[r] == usize::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect()
    }
}

/// Full Ward agglomeration. Among equal dissimilarities the pair with the
/// smallest (left, right) indices merges first.
pub fn ward_linkage(x: &FeatureMatrix) -> Dendrogram {
    let n = x.n();
    let v = x.values();
    let mut d = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = v
                .row(i)
                .iter()
                .zip(v.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d[[i, j]] = s;
            d[[j, i]] = s;
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| active[i]) {
            for j in ((i + 1)..n).filter(|&j| active[j]) {
                if d[[i, j]] < best.2 {
                    best = (i, j, d[[i, j]]);
                }
            }
        }
        let (i, j, dij) = best;
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in (0..n).filter(|&k| active[k] && k != i && k != j) {
            let nk = size[k] as f64;
            let updated =
                ((ni + nk) * d[[i, k]] + (nj + nk) * d[[j, k]] - nk * dij) / (ni + nj + nk);
            d[[i, k]] = updated;
            d[[k, i]] = updated;
        }
        active[j] = false;
        size[i] += size[j];
        merges.push(Merge {
            left: i,
            right: j,
            height: dij.max(0.0).sqrt(),
            size: size[i],
        });
    }
    Dendrogram { n, merges }
}

/// Hard allocation with model id `hclust_k{k}`.
pub fn ward_hclust(x: &FeatureMatrix, k: usize) -> Result<AllocationMatrix> {
    check_k(x, k)?;
    let labels = ward_linkage(x).cut(k);
    AllocationMatrix::one_hot(&labels, k, format!("hclust_k{k}"))
}
