//! Gaussian mixture with diagonal covariances, fitted by EM.
//!
//! The mixture density is `p(y) = Σ_k π_k N(y | μ_k, diag(σ²_k))` and the
//! reported log-likelihood is `Σ_n ln p(y_n)`. EM starts from a seeded
//! k-means partition. Variances are floored at `1e-6` times the overall
//! per-dimension data variance, which keeps components from collapsing onto
//! single points; the floored update is still the constrained maximiser of
//! the M-step objective, so the likelihood stays monotone.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, Axis};

use super::kmeans::kmeans_fit;
use crate::error::{Error, Result};
use crate::model::{validate_allocation, AllocationMatrix, FeatureMatrix};

pub const GMM_MAX_ITER: usize = 500;
pub const GMM_TOL: f64 = 1e-8;
const VARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit {
    /// Responsibilities, model id `gmm_k{k}`.
    pub allocation: AllocationMatrix,
    pub means: Array2<f64>,
    pub variances: Array2<f64>,
    pub mixing: Array1<f64>,
    pub loglik: f64,
    /// Free parameters: `K·2D + (K − 1)`.
    pub kappa: usize,
    pub n: usize,
    /// `2·loglik − κ·ln N`.
    pub bic: f64,
    /// Log-likelihood at the initial parameters and after every EM step.
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
}

struct Params {
    means: Array2<f64>,
    variances: Array2<f64>,
    mixing: Array1<f64>,
}

pub fn gmm_diag(x: &FeatureMatrix, k: usize, seed: u64) -> Result<GmmFit> {
    let (n, d) = (x.n(), x.d());
    if k == 0 {
        return Err(Error::InvalidK { k, n });
    }
    if k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    let data_var = x.values().var_axis(Axis(0), 0.0);
    let max_var = data_var.fold(0.0_f64, |a, &b| a.max(b));
    if max_var <= 0.0 {
        return Err(Error::DegenerateData);
    }
    // A constant column borrows its floor from the widest column.
    let floor = data_var.mapv(|v| VARIANCE_FLOOR * if v > 0.0 { v } else { max_var });

    let init = kmeans_fit(x, k, seed)?;
    let mut resp = Array2::<f64>::zeros((n, k));
    for (i, &l) in init.labels.iter().enumerate() {
        resp[[i, l]] = 1.0;
    }
    let mut params = Params {
        means: Array2::zeros((k, d)),
        variances: Array2::ones((k, d)),
        mixing: Array1::from_elem(k, 1.0 / k as f64),
    };
    m_step(x, &resp, &floor, &mut params);

    let mut loglik = e_step(x, &params, &mut resp);
    let mut loglik_trace = vec![loglik];
    let mut converged = false;
    for _ in 0..GMM_MAX_ITER {
        m_step(x, &resp, &floor, &mut params);
        let next = e_step(x, &params, &mut resp);
        loglik_trace.push(next);
        let change = (next - loglik).abs();
        loglik = next;
        if change < GMM_TOL {
            converged = true;
            break;
        }
    }

    let kappa = k * 2 * d + (k - 1);
    let bic = 2.0 * loglik - kappa as f64 * (n as f64).ln();
    let allocation = validate_allocation(resp, format!("gmm_k{k}"))?;
    Ok(GmmFit {
        allocation,
        means: params.means,
        variances: params.variances,
        mixing: params.mixing,
        loglik,
        kappa,
        n,
        bic,
        loglik_trace,
        converged,
    })
}

/// Fills `resp` with posterior responsibilities and returns the log-likelihood.
fn e_step(x: &FeatureMatrix, p: &Params, resp: &mut Array2<f64>) -> f64 {
    let k = p.mixing.len();
    let v = x.values();
    // Per-component constant: ln π_k − ½ Σ_d ln(2π σ²_kd).
    let consts: Vec<f64> = (0..k)
        .map(|c| {
            p.mixing[c].ln()
                - 0.5
                    * p.variances
                        .row(c)
                        .iter()
                        .map(|s| (2.0 * PI * s).ln())
                        .sum::<f64>()
        })
        .collect();
    let mut total = 0.0;
    let mut logp = vec![0.0; k];
    for (i, y) in v.outer_iter().enumerate() {
        for c in 0..k {
            let quad: f64 = y
                .iter()
                .zip(p.means.row(c))
                .zip(p.variances.row(c))
                .map(|((yv, m), s)| (yv - m) * (yv - m) / s)
                .sum();
            logp[c] = consts[c] - 0.5 * quad;
        }
        let lse = log_sum_exp(&logp);
        total += lse;
        for c in 0..k {
            resp[[i, c]] = (logp[c] - lse).exp();
        }
    }
    total
}

fn m_step(x: &FeatureMatrix, resp: &Array2<f64>, floor: &Array1<f64>, p: &mut Params) {
    let n = x.n() as f64;
    let v = x.values();
    for c in 0..p.mixing.len() {
        let r = resp.column(c);
        let nk: f64 = r.sum();
        p.mixing[c] = nk / n;
        // A vanished component keeps its shape; only its weight drops.
        if nk <= f64::MIN_POSITIVE * 1e6 {
            continue;
        }
        let mean = r.dot(v) / nk;
        let mut var = Array1::<f64>::zeros(x.d());
        for (y, &w) in v.outer_iter().zip(r) {
            for ((acc, yv), m) in var.iter_mut().zip(y).zip(&mean) {
                *acc += w * (yv - m) * (yv - m);
            }
        }
        var /= nk;
        for (s, f) in var.iter_mut().zip(floor) {
            *s = s.max(*f);
        }
        p.means.row_mut(c).assign(&mean);
        p.variances.row_mut(c).assign(&var);
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
