//! Shared data types and the similarity / consensus algebra.
//!
//! Every clustering solution, hard or soft, is reduced to an N×N matrix of
//! pairwise co-assignment probabilities. Because that matrix only asks
//! whether two points share a cluster, the labels a model happens to use
//! never matter and no cross-model label alignment is required.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row sums within this distance of 1 are silently renormalised.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// N observations by D real-valued features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        if n < 2 || d < 1 {
            return Err(Error::BadShape {
                rows: n,
                cols: d,
                min_rows: 2,
            });
        }
        check_finite(values.view())?;
        Ok(Self { values })
    }

    /// Builds a matrix from row vectors of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let values =
            Array2::from_shape_vec((rows.len(), d), flat).expect("row lengths were checked above");
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.values * factor)
    }
}

/// Row-stochastic N×K matrix of cluster membership probabilities for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMatrix {
    probs: Array2<f64>,
    model_id: String,
    hard: bool,
}

impl AllocationMatrix {
    /// One-hot allocation from 0-based labels. K is `max(label) + 1`, so
    /// unused label values produce empty columns.
    pub fn from_labels(labels: &[usize], model_id: impl Into<String>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Self::one_hot(labels, k, model_id)
    }

    /// One-hot allocation with exactly `k` columns.
    pub fn one_hot(labels: &[usize], k: usize, model_id: impl Into<String>) -> Result<Self> {
        let n = labels.len();
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {k} clusters"
            )));
        }
        if n < 2 || k < 1 {
            return Err(Error::BadShape {
                rows: n,
                cols: k,
                min_rows: 2,
            });
        }
        let mut probs = Array2::zeros((n, k));
        for (i, &label) in labels.iter().enumerate() {
            probs[[i, label]] = 1.0;
        }
        Ok(Self {
            probs,
            model_id: model_id.into(),
            hard: true,
        })
    }

    pub fn probs(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn k(&self) -> usize {
        self.probs.ncols()
    }

    pub fn n(&self) -> usize {
        self.probs.nrows()
    }

    pub fn is_hard(&self) -> bool {
        self.hard
    }

    pub fn with_model_id(mut self, model_id: impl Into<String>) -> Self {
        self.model_id = model_id.into();
        self
    }

    /// Returns a copy whose columns are reordered so that new column `j`
    /// holds old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: perm.len(),
            });
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation"
                )));
            }
        }
        let probs = Array2::from_shape_fn(self.probs.dim(), |(i, j)| self.probs[[i, perm[j]]]);
        Ok(Self {
            probs,
            model_id: self.model_id.clone(),
            hard: self.hard,
        })
    }
}

/// Validates a raw N×K probability matrix.
///
/// Tiny negative entries (above -1e-12) are clamped to zero and rows whose
/// sum lies within [`ROW_SUM_TOLERANCE`] of one are renormalised.
pub fn validate_allocation(
    raw: Array2<f64>,
    model_id: impl Into<String>,
) -> Result<AllocationMatrix> {
    let (n, k) = raw.dim();
    if n < 2 || k < 1 {
        return Err(Error::BadShape {
            rows: n,
            cols: k,
            min_rows: 2,
        });
    }
    check_finite(raw.view())?;
    let mut probs = raw;
    for (row, mut r) in probs.outer_iter_mut().enumerate() {
        for (col, v) in r.iter_mut().enumerate() {
            if *v < -NEGATIVE_TOLERANCE {
                return Err(Error::NegativeProbability {
                    row,
                    col,
                    value: *v,
                });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = r.sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::RowSumViolation { row, sum });
        }
        if sum != 1.0 {
            r.mapv_inplace(|v| v / sum);
        }
    }
    let hard = probs.outer_iter().all(|r| {
        r.iter().filter(|&&v| v == 1.0).count() == 1 && r.iter().all(|&v| v == 0.0 || v == 1.0)
    });
    Ok(AllocationMatrix {
        probs,
        model_id: model_id.into(),
        hard,
    })
}

/// Crisp projection: the 0-based index of each row's largest probability,
/// ties going to the lowest column.
pub fn harden(a: &AllocationMatrix) -> Vec<usize> {
    argmax_rows(a.probs.view())
}

pub(crate) fn argmax_rows(m: ArrayView2<'_, f64>) -> Vec<usize> {
    m.outer_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// N×N co-assignment probabilities for one model, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    values: Array2<f64>,
    model_id: String,
}

impl SimilarityMatrix {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// `s_ij = Σ_k p(k|i) p(k|j)` off the diagonal, 1 on it.
///
/// The per-pair products are summed in ascending order, which makes the
/// result bit-identical under any relabelling of the model's clusters.
pub fn similarity_from_allocation(a: &AllocationMatrix) -> SimilarityMatrix {
    let n = a.n();
    let p = &a.probs;
    let mut values = Array2::<f64>::eye(n);
    let mut products = Vec::with_capacity(a.k());
    for i in 0..n {
        let pi = p.row(i);
        for j in (i + 1)..n {
            products.clear();
            products.extend(pi.iter().zip(p.row(j)).map(|(x, y)| x * y));
            products.sort_unstable_by(f64::total_cmp);
            let s = products.iter().sum::<f64>().clamp(0.0, 1.0);
            values[[i, j]] = s;
            values[[j, i]] = s;
        }
    }
    SimilarityMatrix {
        values,
        model_id: a.model_id.clone(),
    }
}

/// How a set of model weights was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `CH/ΣCH + XB⁻¹/ΣXB⁻¹`: high CH and low XB are rewarded.
    #[default]
    Standard,
    /// `CH⁻¹/ΣCH⁻¹ + XB/ΣXB`, the opposite directions.
    Literal,
    /// Softmax of half the BIC of Gaussian mixture fits.
    Bic,
    /// Supplied directly by the caller.
    Fixed,
}

impl std::fmt::Display for WeightMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WeightMode::Standard => "standard",
            WeightMode::Literal => "literal",
            WeightMode::Bic => "bic",
            WeightMode::Fixed => "fixed",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(WeightMode::Standard),
            "literal" => Ok(WeightMode::Literal),
            "bic" => Ok(WeightMode::Bic),
            "fixed" => Ok(WeightMode::Fixed),
            other => Err(Error::InvalidParameter(format!(
                "unknown weighting mode `{other}`"
            ))),
        }
    }
}

/// Per-model quantities the weights were derived from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RawIndices {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ch: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bic: Option<f64>,
}

/// Approximate posterior model probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub(crate) model_ids: Vec<String>,
    pub(crate) weights: Vec<f64>,
    pub(crate) prior: Vec<f64>,
    pub(crate) raw: Vec<f64>,
    pub(crate) mode: WeightMode,
    pub(crate) indices: Vec<RawIndices>,
}

impl ModelWeights {
    /// Caller-supplied weights; they are normalised to sum to one.
    pub fn fixed(model_ids: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::NoModels);
        }
        if model_ids.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: model_ids.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("weights sum to zero".into()));
        }
        let m = weights.len();
        Ok(Self {
            model_ids,
            weights: weights.iter().map(|w| w / total).collect(),
            prior: vec![1.0 / m as f64; m],
            raw: weights,
            mode: WeightMode::Fixed,
            indices: vec![RawIndices::default(); m],
        })
    }

    pub fn uniform(model_ids: Vec<String>) -> Result<Self> {
        let m = model_ids.len();
        Self::fixed(model_ids, vec![1.0; m])
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    /// Normalised weights Ŵ_m.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    /// Pre-normalisation values W_m.
    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn indices(&self) -> &[RawIndices] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Weighted element-wise average of similarity matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusMatrix {
    values: Array2<f64>,
    contributing_models: Vec<(String, f64)>,
}

impl ConsensusMatrix {
    /// Wraps an arbitrary co-assignment matrix, checking symmetry, range and
    /// the unit diagonal.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let (n, m) = values.dim();
        if n != m {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m,
            });
        }
        if n < 1 {
            return Err(Error::BadShape {
                rows: n,
                cols: m,
                min_rows: 1,
            });
        }
        check_finite(values.view())?;
        for i in 0..n {
            if values[[i, i]] != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is {}, expected 1",
                    values[[i, i]]
                )));
            }
            for j in 0..i {
                let (a, b) = (values[[i, j]], values[[j, i]]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                if !(0.0..=1.0).contains(&a) {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i}, {j}) = {a} lies outside [0, 1]"
                    )));
                }
            }
        }
        Ok(Self {
            values,
            contributing_models: Vec::new(),
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn contributing_models(&self) -> &[(String, f64)] {
        &self.contributing_models
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// `C = Σ_m Ŵ_m S_m`, with the diagonal pinned to 1.
pub fn consensus(sims: &[SimilarityMatrix], w: &ModelWeights) -> Result<ConsensusMatrix> {
    let first = sims.first().ok_or(Error::NoModels)?;
    if sims.len() != w.len() {
        return Err(Error::WeightCountMismatch {
            matrices: sims.len(),
            weights: w.len(),
        });
    }
    let n = first.n();
    if let Some(bad) = sims.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    let mut values = Array2::<f64>::zeros((n, n));
    for (s, &wm) in sims.iter().zip(&w.weights) {
        values.scaled_add(wm, &s.values);
    }
    for i in 0..n {
        for j in 0..n {
            values[[i, j]] = if i == j {
                1.0
            } else {
                values[[i, j]].clamp(0.0, 1.0)
            };
        }
    }
    let contributing_models = sims
        .iter()
        .zip(&w.weights)
        .map(|(s, &wm)| (s.model_id.clone(), wm))
        .collect();
    Ok(ConsensusMatrix {
        values,
        contributing_models,
    })
}

/// Final averaged allocation and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BmaResult {
    /// N×K_BMA row-stochastic allocation probabilities.
    pub allocation: Array2<f64>,
    /// `p(g_i ≠ ĝ_i)` per observation.
    pub uncertainty: Array1<f64>,
    pub k_bma: usize,
    /// Columns whose total mass fell below the emptying threshold. They stay
    /// in `allocation`.
    pub emptied: Vec<usize>,
    /// Objective value after initialisation and after every accepted step of
    /// the winning restart.
    pub objective_trace: Vec<f64>,
    pub seed: u64,
    pub converged: bool,
    pub iterations: usize,
    pub best_restart: usize,
    /// `‖C − AAᵀ‖_F` of the returned allocation.
    pub residual: f64,
}

impl BmaResult {
    /// Modal cluster per observation (0-based).
    pub fn modal_labels(&self) -> Vec<usize> {
        argmax_rows(self.allocation.view())
    }
}

fn check_finite(m: ArrayView2<'_, f64>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteEntry { row, col });
        }
    }
    Ok(())
}
