//! Reference clustering algorithms: k-means, Ward hierarchical clustering
//! and a diagonal-covariance Gaussian mixture.

mod gmm;
mod kmeans;
mod ward;

pub use gmm::{gmm_diag, GmmFit, GMM_MAX_ITER, GMM_TOL};
pub use kmeans::{kmeans, kmeans_fit, KMeansFit, KMEANS_MAX_ITER, KMEANS_RESTARTS};
pub use ward::{ward_hclust, ward_linkage, Dendrogram, Merge};

use crate::error::{Error, Result};
use crate::model::{AllocationMatrix, FeatureMatrix};

/// Anything that can partition a feature matrix into `k` clusters.
pub trait Clusterer {
    fn name(&self) -> &'static str;

    fn fit(&self, x: &FeatureMatrix, k: usize) -> Result<AllocationMatrix>;
}

/// The built-in algorithms, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    KMeans,
    Ward,
    Gmm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Ward => "hclust",
            Algorithm::Gmm => "gmm",
        }
    }

    /// Fits the algorithm; the seed is ignored by Ward clustering.
    pub fn fit(self, x: &FeatureMatrix, k: usize, seed: u64) -> Result<AllocationMatrix> {
        match self {
            Algorithm::KMeans => kmeans(x, k, seed),
            Algorithm::Ward => ward_hclust(x, k),
            Algorithm::Gmm => gmm_diag(x, k, seed).map(|f| f.allocation),
        }
    }

    pub fn with_seed(self, seed: u64) -> Seeded {
        Seeded {
            algorithm: self,
            seed,
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            "hclust" | "ward" | "ward.d2" => Ok(Algorithm::Ward),
            "gmm" => Ok(Algorithm::Gmm),
            other => Err(Error::InvalidParameter(format!(
                "unknown clustering algorithm `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// An [`Algorithm`] bound to a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seeded {
    pub algorithm: Algorithm,
    pub seed: u64,
}

impl Clusterer for Seeded {
    fn name(&self) -> &'static str {
        self.algorithm.name()
    }

    fn fit(&self, x: &FeatureMatrix, k: usize) -> Result<AllocationMatrix> {
        self.algorithm.fit(x, k, self.seed)
    }
}

pub(crate) fn check_k(x: &FeatureMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidK { k, n: x.n() });
    }
    if k > x.n() {
        return Err(Error::KTooLarge { k, n: x.n() });
    }
    Ok(())
}
