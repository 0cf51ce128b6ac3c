//! Approximate posterior model probabilities.
//!
//! Validity-index weights combine the Calinski–Harabasz and Xie–Beni
//! indices as a sum of two shares, each of which sums to one across
//! models, so the pre-normalisation total is always 2:
//!
//! ```text
//! standard:  W_m = CH_m / Σ CH   + XB_m⁻¹ / Σ XB⁻¹
//! literal:   W_m = CH_m⁻¹ / Σ CH⁻¹ + XB_m / Σ XB
//! Ŵ_m = W_m / Σ W
//! ```
//!
//! `standard` rewards high CH (separation over compactness) and low XB
//! (compactness over separation). `literal` rewards the opposite directions
//! and exists for comparison with implementations that use them.

use crate::error::{Error, Result};
use crate::indices::{calinski_harabasz, xie_beni};
use crate::model::{harden, AllocationMatrix, FeatureMatrix, ModelWeights, RawIndices, WeightMode};
use crate::GmmFit;

/// Finite stand-in for an infinite Calinski–Harabasz value.
pub const CH_CEILING: f64 = 1e12;
/// Xie–Beni values below this are raised to it before inversion.
pub const XB_FLOOR: f64 = 1e-12;

/// Index-based weights for a set of models scored on their crisp projections.
pub fn chxb_weights(
    x: &FeatureMatrix,
    models: &[AllocationMatrix],
    mode: WeightMode,
) -> Result<ModelWeights> {
    if models.is_empty() {
        return Err(Error::NoModels);
    }
    let mut ch = Vec::with_capacity(models.len());
    let mut xb = Vec::with_capacity(models.len());
    for m in models {
        if m.n() != x.n() {
            return Err(Error::DimensionMismatch {
                expected: x.n(),
                found: m.n(),
            }
            .for_model(m.model_id()));
        }
        let labels = harden(m);
        ch.push(calinski_harabasz(x, &labels).map_err(|e| e.for_model(m.model_id()))?);
        xb.push(xie_beni(x, &labels).map_err(|e| e.for_model(m.model_id()))?);
    }
    let ids = models.iter().map(|m| m.model_id().to_string()).collect();
    chxb_weights_from_indices(ids, &ch, &xb, mode)
}

/// Index-based weights from precomputed CH and XB values.
pub fn chxb_weights_from_indices(
    model_ids: Vec<String>,
    ch: &[f64],
    xb: &[f64],
    mode: WeightMode,
) -> Result<ModelWeights> {
    if ch.is_empty() {
        return Err(Error::NoModels);
    }
    if ch.len() != xb.len() || ch.len() != model_ids.len() {
        return Err(Error::DimensionMismatch {
            expected: ch.len(),
            found: if xb.len() != ch.len() {
                xb.len()
            } else {
                model_ids.len()
            },
        });
    }
    if ch.iter().chain(xb).any(|v| v.is_nan() || *v < 0.0) {
        return Err(Error::InvalidParameter(
            "validity indices must be non-negative numbers".into(),
        ));
    }
    let ch_c: Vec<f64> = ch.iter().map(|v| v.clamp(XB_FLOOR, CH_CEILING)).collect();
    let xb_c: Vec<f64> = xb.iter().map(|v| v.clamp(XB_FLOOR, CH_CEILING)).collect();
    let (ch_term, xb_term): (Vec<f64>, Vec<f64>) = match mode {
        WeightMode::Standard => (ch_c, xb_c.iter().map(|v| v.recip()).collect()),
        WeightMode::Literal => (ch_c.iter().map(|v| v.recip()).collect(), xb_c),
        other => {
            return Err(Error::InvalidParameter(format!(
                "`{other}` is not a validity-index weighting mode"
            )))
        }
    };
    let ch_total: f64 = ch_term.iter().sum();
    let xb_total: f64 = xb_term.iter().sum();
    let raw: Vec<f64> = ch_term
        .iter()
        .zip(&xb_term)
        .map(|(c, x)| c / ch_total + x / xb_total)
        .collect();
    let indices = ch
        .iter()
        .zip(xb)
        .map(|(&c, &x)| RawIndices {
            ch: Some(c),
            xb: Some(x),
            bic: None,
        })
        .collect();
    Ok(normalised(model_ids, raw, mode, indices))
}

/// `Ŵ_m ∝ exp(½ BIC_m)` over Gaussian mixture fits of the same data.
pub fn bic_weights(fits: &[GmmFit]) -> Result<ModelWeights> {
    let first = fits.first().ok_or(Error::NoModels)?;
    if let Some(other) = fits.iter().find(|f| f.n != first.n) {
        return Err(Error::MixedSampleSizes {
            first: first.n,
            other: other.n,
        });
    }
    let bics: Vec<f64> = fits.iter().map(|f| f.bic).collect();
    let model_ids = fits
        .iter()
        .map(|f| f.allocation.model_id().to_string())
        .collect();
    bic_weights_from_values(model_ids, &bics)
}

/// Softmax of half the BIC values, shifted by the maximum so that large
/// magnitudes cannot overflow.
pub fn bic_weights_from_values(model_ids: Vec<String>, bics: &[f64]) -> Result<ModelWeights> {
    if bics.is_empty() {
        return Err(Error::NoModels);
    }
    if model_ids.len() != bics.len() {
        return Err(Error::DimensionMismatch {
            expected: bics.len(),
            found: model_ids.len(),
        });
    }
    if bics.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter("BIC values must be finite".into()));
    }
    let max = bics.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = bics.iter().map(|b| (0.5 * (b - max)).exp()).collect();
    let indices = bics
        .iter()
        .map(|&b| RawIndices {
            bic: Some(b),
            ..RawIndices::default()
        })
        .collect();
    Ok(normalised(model_ids, raw, WeightMode::Bic, indices))
}

/// Reweights by a model prior: `Ŵ_m p_m / Σ Ŵ p`.
pub fn apply_prior(w: &ModelWeights, prior: &[f64]) -> Result<ModelWeights> {
    if prior.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: prior.len(),
        });
    }
    if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidPrior(
            "entries must be finite and non-negative".into(),
        ));
    }
    let prior_total: f64 = prior.iter().sum();
    if (prior_total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidPrior(format!(
            "entries sum to {prior_total}, expected 1"
        )));
    }
    let products: Vec<f64> = w.weights.iter().zip(prior).map(|(a, b)| a * b).collect();
    let total: f64 = products.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegeneratePrior);
    }
    let mut out = w.clone();
    out.weights = products.iter().map(|p| p / total).collect();
    out.prior = prior.iter().map(|p| p / prior_total).collect();
    Ok(out)
}

fn normalised(
    model_ids: Vec<String>,
    raw: Vec<f64>,
    mode: WeightMode,
    indices: Vec<RawIndices>,
) -> ModelWeights {
    let m = raw.len();
    let total: f64 = raw.iter().sum();
    // Equal raw values get exactly 1/M rather than whatever rounding gives.
    let weights = if raw.iter().all(|&r| r == raw[0]) {
        vec![1.0 / m as f64; m]
    } else {
        raw.iter().map(|r| r / total).collect()
    };
    ModelWeights {
        model_ids,
        weights,
        prior: vec![1.0 / m as f64; m],
        raw,
        mode,
        indices,
    }
}
