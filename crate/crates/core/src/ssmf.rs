//! Symmetric simplex matrix factorisation of a consensus matrix.
//!
//! Finds an N×K allocation `A` with every row on the probability simplex
//! minimising
//!
//! ```text
//! J(A) = ‖C − A Aᵀ‖²_F − λ ‖A‖²_F
//! ```
//!
//! The `−λ‖A‖²` term rewards rows that sit close to a simplex vertex, which
//! drains mass from columns the data does not need; such columns are
//! reported as emptied. The solver is projected gradient descent with a
//! backtracking line search: a step is only accepted when it strictly lowers
//! `J`, so every recorded objective trace is non-increasing.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AllocationMatrix, BmaResult, ConsensusMatrix};

/// Solver settings. [`SsmfConfig::new`] fills in the defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmfConfig {
    pub k_bma: usize,
    pub lambda: f64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
    pub seed: u64,
    /// A column is emptied when its total mass is below this fraction of N.
    pub empty_fraction: f64,
    /// Amplitude of the uniform noise added to the flat initial rows.
    pub init_noise: f64,
}

impl SsmfConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.01;
    pub const DEFAULT_RESTARTS: usize = 10;
    pub const DEFAULT_MAX_ITER: usize = 1000;
    pub const DEFAULT_TOL: f64 = 1e-8;

    pub fn new(k_bma: usize) -> Self {
        Self {
            k_bma,
            lambda: Self::DEFAULT_LAMBDA,
            restarts: Self::DEFAULT_RESTARTS,
            max_iter: Self::DEFAULT_MAX_ITER,
            tol: Self::DEFAULT_TOL,
            seed: 0,
            empty_fraction: 1e-3,
            init_noise: 0.01,
        }
    }

    pub fn lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k_bma == 0 || self.k_bma > n {
            return Err(Error::InvalidK { k: self.k_bma, n });
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter(
                "restarts must be at least 1".into(),
            ));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be finite and non-negative, got {}",
                self.tol
            )));
        }
        if !(self.init_noise.is_finite() && self.init_noise >= 0.0) {
            return Err(Error::InvalidParameter(
                "init_noise must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Euclidean projection onto `{u : u_k ≥ 0, Σ u_k = 1}`.
pub fn project_row_simplex(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    project_in_place(&mut out, &mut scratch);
    out
}

fn project_in_place(row: &mut [f64], sorted: &mut Vec<f64>) {
    sorted.clear();
    sorted.extend_from_slice(row);
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in row.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

fn project_rows(a: &mut Array2<f64>) {
    let mut scratch = Vec::with_capacity(a.ncols());
    for mut row in a.outer_iter_mut() {
        let slice = row.as_slice_mut().expect("standard layout");
        project_in_place(slice, &mut scratch);
    }
}

/// `p(g_i ≠ ĝ_i) = 1 − max_k A_ik` for every row.
pub fn allocation_uncertainty(a: &Array2<f64>) -> Array1<f64> {
    a.map_axis(Axis(1), |row| {
        (1.0 - row.iter().copied().fold(f64::NEG_INFINITY, f64::max)).max(0.0)
    })
}

/// Largest cluster count among the input models.
pub fn suggest_k_bma(models: &[AllocationMatrix]) -> Result<usize> {
    models
        .iter()
        .map(AllocationMatrix::k)
        .max()
        .ok_or(Error::NoModels)
}

/// `‖C − AAᵀ‖²_F − λ‖A‖²_F`, evaluated directly.
pub fn objective(c: &Array2<f64>, a: &Array2<f64>, lambda: f64) -> f64 {
    let residual = c - &a.dot(&a.t());
    residual.iter().map(|v| v * v).sum::<f64>() - lambda * a.iter().map(|v| v * v).sum::<f64>()
}

struct Problem<'a> {
    c: &'a Array2<f64>,
    c_sq: f64,
    lambda: f64,
}

impl Problem<'_> {
    /// Objective from the cached product `CA`, using
    /// `‖C − AAᵀ‖² = ‖C‖² − 2⟨A, CA⟩ + ‖AᵀA‖²`.
    fn value(&self, a: &Array2<f64>, ca: &Array2<f64>) -> f64 {
        let gram = a.t().dot(a);
        let cross: f64 = a.iter().zip(ca.iter()).map(|(x, y)| x * y).sum();
        let gram_sq: f64 = gram.iter().map(|v| v * v).sum();
        let a_sq: f64 = a.iter().map(|v| v * v).sum();
        self.c_sq - 2.0 * cross + gram_sq - self.lambda * a_sq
    }

    /// `−4(C − AAᵀ)A − 2λA`.
    fn gradient(&self, a: &Array2<f64>, ca: &Array2<f64>) -> Array2<f64> {
        let a_gram = a.dot(&a.t().dot(a));
        (&a_gram - ca) * 4.0 - a * (2.0 * self.lambda)
    }
}

struct Run {
    allocation: Array2<f64>,
    objective: f64,
    trace: Vec<f64>,
    converged: bool,
    iterations: usize,
}

fn initial_allocation(n: usize, k: usize, noise: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::from_shape_fn((n, k), |_| {
        1.0 / k as f64 + noise * (2.0 * rng.random::<f64>() - 1.0)
    });
    project_rows(&mut a);
    a
}

fn solve(problem: &Problem<'_>, cfg: &SsmfConfig, restart: usize) -> Run {
    let n = problem.c.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);
    let mut a = initial_allocation(n, cfg.k_bma, cfg.init_noise, &mut rng);
    let mut ca = problem.c.dot(&a);
    let mut value = problem.value(&a, &ca);
    let mut trace = vec![value];
    let mut step = 1.0 / n as f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let grad = problem.gradient(&a, &ca);
        let mut t = step;
        let accepted = loop {
            let mut candidate = &a - &(&grad * t);
            project_rows(&mut candidate);
            let candidate_ca = problem.c.dot(&candidate);
            let candidate_value = problem.value(&candidate, &candidate_ca);
            if candidate_value < value {
                break Some((candidate, candidate_ca, candidate_value));
            }
            t *= 0.5;
            if t < 1e-30 {
                break None;
            }
        };
        let Some((next, next_ca, next_value)) = accepted else {
            // No descent direction left at machine precision.
            converged = true;
            break;
        };
        let decrease = value - next_value;
        a = next;
        ca = next_ca;
        value = next_value;
        trace.push(value);
        step = t * 2.0;
        if decrease <= cfg.tol * value.abs() {
            converged = true;
            break;
        }
    }
    Run {
        allocation: a,
        objective: value,
        trace,
        converged,
        iterations,
    }
}

/// Factorises `c` into `A Aᵀ` with simplex rows, keeping the best of
/// `cfg.restarts` seeded restarts.
pub fn factorize(c: &ConsensusMatrix, cfg: &SsmfConfig) -> Result<BmaResult> {
    let n = c.n();
    cfg.validate(n)?;
    let values = c.values();
    let problem = Problem {
        c: values,
        c_sq: values.iter().map(|v| v * v).sum(),
        lambda: cfg.lambda,
    };
    let runs: Vec<Run> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| solve(&problem, cfg, r))
        .collect();
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .reduce(|best, cur| {
            if cur.1.objective < best.1.objective {
                cur
            } else {
                best
            }
        })
        .expect("restarts >= 1");

    let threshold = cfg.empty_fraction * n as f64;
    let emptied = best
        .allocation
        .axis_iter(Axis(1))
        .enumerate()
        .filter(|(_, col)| col.sum() < threshold)
        .map(|(k, _)| k)
        .collect();
    let residual = (values - &best.allocation.dot(&best.allocation.t()))
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    Ok(BmaResult {
        uncertainty: allocation_uncertainty(&best.allocation),
        allocation: best.allocation,
        k_bma: cfg.k_bma,
        emptied,
        objective_trace: best.trace,
        seed: cfg.seed,
        converged: best.converged,
        iterations: best.iterations,
        best_restart,
        residual,
    })
}
