//! Bayesian model averaging across clustering solutions.
//!
//! Each input clustering is turned into a pairwise co-assignment
//! [`SimilarityMatrix`]. Models are weighted by an approximate posterior
//! probability built from validity indices ([`chxb_weights`]) or, for
//! Gaussian mixtures, from the BIC ([`bic_weights`]). The weighted average
//! is a [`ConsensusMatrix`], which [`factorize`] turns into soft cluster
//! allocations with a per-point allocation uncertainty.
//!
//! ```
//! use bma_cluster::{
//!     chxb_weights, consensus, factorize, generate_clusters, similarity_from_allocation,
//!     Algorithm, SsmfConfig, WeightMode,
//! };
//!
//! let data = generate_clusters(20, 3, 2, 0.5, 7).unwrap();
//! let x = &data.features;
//! let models = vec![
//!     Algorithm::KMeans.fit(x, 3, 1).unwrap(),
//!     Algorithm::Ward.fit(x, 3, 0).unwrap(),
//! ];
//! let weights = chxb_weights(x, &models, WeightMode::Standard).unwrap();
//! let sims: Vec<_> = models.iter().map(similarity_from_allocation).collect();
//! let c = consensus(&sims, &weights).unwrap();
//! let result = factorize(&c, &SsmfConfig::new(3).restarts(2)).unwrap();
//! assert_eq!(result.allocation.dim(), (60, 3));
//! ```

pub mod clusterers;
mod error;
pub mod indices;
pub mod metrics;
pub mod model;
pub mod simdata;
pub mod ssmf;
pub mod weights;

pub use clusterers::{gmm_diag, kmeans, ward_hclust, Algorithm, Clusterer, GmmFit};
pub use error::{Error, Result};
pub use indices::{
    auxiliary_indices, calinski_harabasz, index_scan, xie_beni, IndexReport, ScanRow,
};
pub use metrics::adjusted_rand_index;
pub use model::{
    consensus, harden, similarity_from_allocation, validate_allocation, AllocationMatrix,
    BmaResult, ConsensusMatrix, FeatureMatrix, ModelWeights, RawIndices, SimilarityMatrix,
    WeightMode,
};
pub use simdata::{generate_clusters, SimulatedData};
pub use ssmf::{allocation_uncertainty, factorize, project_row_simplex, suggest_k_bma, SsmfConfig};
pub use weights::{apply_prior, bic_weights, chxb_weights};
