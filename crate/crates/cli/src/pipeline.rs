//! The end-to-end run: fit or load models, weight them, average their
//! similarity matrices, factorise the consensus and write every artifact.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use bma_cluster::{
    adjusted_rand_index, apply_prior, bic_weights, chxb_weights, consensus, factorize, gmm_diag,
    similarity_from_allocation, suggest_k_bma, Algorithm, AllocationMatrix, BmaResult, GmmFit,
    ModelWeights, RawIndices, SsmfConfig, WeightMode,
};
use indexmap::IndexMap;
use serde::Serialize;

use crate::config::{Config, ModelSpec};
use crate::error::{CliError, Result};
use crate::io::{self, Dataset};
use crate::svg;

/// What a run produced, for callers that want more than the files.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub models: Vec<AllocationMatrix>,
    pub weights: ModelWeights,
    pub result: BmaResult,
    pub dataset: Dataset,
    /// Every file written, in write order.
    pub files: Vec<PathBuf>,
}

struct LoadedModel {
    allocation: AllocationMatrix,
    gmm: Option<GmmFit>,
    source: Option<PathBuf>,
}

#[derive(Serialize)]
struct WeightsJson<'a> {
    mode: WeightMode,
    weights: IndexMap<&'a str, f64>,
    raw_indices: IndexMap<&'a str, RawIndices>,
    prior: IndexMap<&'a str, f64>,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    seed: u64,
    k_bma: usize,
    lambda: f64,
    restarts: usize,
    converged: bool,
    iterations: usize,
    best_restart: usize,
    residual: f64,
    /// 1-based allocation columns that were emptied.
    emptied: Vec<usize>,
    objective_trace: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    ari_vs_label: Option<f64>,
}

#[derive(Serialize)]
struct GmmJson<'a> {
    model_id: &'a str,
    loglik: f64,
    bic: f64,
    kappa: usize,
    converged: bool,
    mixing: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

pub fn run(cfg: &Config) -> Result<RunOutput> {
    let data_path = cfg
        .data
        .as_deref()
        .ok_or_else(|| CliError::Config("no feature data given".into()))?;
    if cfg.models.is_empty() {
        return Err(CliError::Config(
            "no models given; add allocation files or built-in algorithms".into(),
        ));
    }
    let dataset = io::read_dataset(data_path)?;
    let loaded = load_models(cfg, &dataset)?;
    let models: Vec<AllocationMatrix> = loaded.iter().map(|m| m.allocation.clone()).collect();

    let mut weights = match cfg.weights.mode {
        WeightMode::Standard | WeightMode::Literal => {
            chxb_weights(&dataset.features, &models, cfg.weights.mode)?
        }
        WeightMode::Bic => {
            let fits = loaded
                .iter()
                .map(|m| {
                    m.gmm.clone().ok_or_else(|| {
                        CliError::Config(format!(
                            "BIC weighting needs built-in gmm models; `{}` is not one",
                            m.allocation.model_id()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            bic_weights(&fits)?
        }
        WeightMode::Fixed => {
            let values =
                cfg.weights.values.clone().ok_or_else(|| {
                    CliError::Config("fixed weighting needs `weights.values`".into())
                })?;
            let ids = models.iter().map(|m| m.model_id().to_string()).collect();
            ModelWeights::fixed(ids, values)?
        }
    };
    if let Some(prior) = &cfg.weights.prior {
        weights = apply_prior(&weights, prior)?;
    }

    let sims: Vec<_> = models.iter().map(similarity_from_allocation).collect();
    let c = consensus(&sims, &weights)?;
    let k_bma = match cfg.k_bma {
        Some(k) => k,
        None => suggest_k_bma(&models)?,
    };
    let ssmf = SsmfConfig::new(k_bma)
        .lambda(cfg.ssmf.lambda)
        .restarts(cfg.ssmf.restarts)
        .max_iter(cfg.ssmf.max_iter)
        .tol(cfg.ssmf.tol)
        .seed(cfg.seed);
    let result = factorize(&c, &ssmf)?;

    let out = &cfg.out;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<()> {
        let path = out.join(name);
        io::write_file(&path, &contents)?;
        files.push(path);
        Ok(())
    };

    emit("weights.json".into(), weights_json(&weights))?;
    for (m, s) in models.iter().zip(&sims) {
        let stem = file_stem(m.model_id());
        emit(format!("similarity_{stem}.csv"), io::matrix_csv(s.values()))?;
        emit(
            format!("heatmap_similarity_{stem}.svg"),
            svg::heatmap(s.values(), None)?,
        )?;
    }
    emit("consensus.csv".into(), io::matrix_csv(c.values()))?;
    let order = svg::order_by_cluster(&result.modal_labels());
    emit(
        "heatmap_consensus.svg".into(),
        svg::heatmap(c.values(), Some(&order))?,
    )?;
    emit("allocations.csv".into(), io::allocations_csv(&result))?;

    let ari = dataset
        .truth
        .as_ref()
        .map(|t| adjusted_rand_index(&result.modal_labels(), t));
    let diagnostics = Diagnostics {
        seed: result.seed,
        k_bma: result.k_bma,
        lambda: ssmf.lambda,
        restarts: ssmf.restarts,
        converged: result.converged,
        iterations: result.iterations,
        best_restart: result.best_restart,
        residual: result.residual,
        emptied: result.emptied.iter().map(|e| e + 1).collect(),
        objective_trace: &result.objective_trace,
        ari_vs_label: ari,
    };
    emit("diagnostics.json".into(), to_json(&diagnostics))?;
    for m in &loaded {
        if let Some(fit) = &m.gmm {
            emit(
                format!("gmm_{}.json", file_stem(m.allocation.model_id())),
                gmm_json(fit),
            )?;
        }
    }
    if let Some(plot) = svg::scatter(
        dataset.features.values(),
        &result.modal_labels(),
        result.uncertainty.as_slice().unwrap_or(&[]),
    ) {
        emit("scatter.svg".into(), plot)?;
    }

    Ok(RunOutput {
        out_dir: out.clone(),
        models,
        weights,
        result,
        dataset,
        files,
    })
}

fn load_models(cfg: &Config, dataset: &Dataset) -> Result<Vec<LoadedModel>> {
    let x = &dataset.features;
    let mut used = HashSet::new();
    let mut loaded = Vec::with_capacity(cfg.models.len());
    for spec in &cfg.models {
        let mut model = match spec {
            ModelSpec::Builtin(b) => {
                let algorithm = b.algorithm()?;
                let seed = b.seed.unwrap_or(cfg.seed);
                let (allocation, gmm) = if algorithm == Algorithm::Gmm {
                    let fit = gmm_diag(x, b.k, seed)?;
                    (fit.allocation.clone(), Some(fit))
                } else {
                    (algorithm.fit(x, b.k, seed)?, None)
                };
                let allocation = match &b.id {
                    Some(id) => allocation.with_model_id(id.clone()),
                    None => allocation,
                };
                LoadedModel {
                    allocation,
                    gmm,
                    source: None,
                }
            }
            ModelSpec::File(f) => {
                let id = f.id.clone().unwrap_or_else(|| {
                    f.file
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "model".into())
                });
                LoadedModel {
                    allocation: io::read_allocation(&f.file, &id)?,
                    gmm: None,
                    source: Some(f.file.clone()),
                }
            }
        };
        if model.allocation.n() != x.n() {
            let path = model
                .source
                .clone()
                .unwrap_or_else(|| PathBuf::from(model.allocation.model_id()));
            return Err(CliError::Dimension {
                path,
                expected: x.n(),
                found: model.allocation.n(),
            });
        }
        let id = unique_id(model.allocation.model_id(), &mut used);
        if id != model.allocation.model_id() {
            model.allocation = model.allocation.with_model_id(id.clone());
            if let Some(fit) = model.gmm.as_mut() {
                fit.allocation = fit.allocation.clone().with_model_id(id);
            }
        }
        loaded.push(model);
    }
    Ok(loaded)
}

/// Appends `_2`, `_3`, ... to repeated ids.
fn unique_id(id: &str, used: &mut HashSet<String>) -> String {
    let mut candidate = id.to_string();
    let mut n = 1;
    while !used.insert(file_stem(&candidate)) {
        n += 1;
        candidate = format!("{id}_{n}");
    }
    candidate
}

/// Model id made safe for use in a file name.
fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serialises");
    s.push('\n');
    s
}

fn weights_json(w: &ModelWeights) -> String {
    let ids = w.model_ids();
    to_json(&WeightsJson {
        mode: w.mode(),
        weights: ids
            .iter()
            .map(String::as_str)
            .zip(w.weights().iter().copied())
            .collect(),
        raw_indices: ids
            .iter()
            .map(String::as_str)
            .zip(w.indices().iter().copied())
            .collect(),
        prior: ids
            .iter()
            .map(String::as_str)
            .zip(w.prior().iter().copied())
            .collect(),
    })
}

fn gmm_json(fit: &GmmFit) -> String {
    let rows = |m: &ndarray::Array2<f64>| m.outer_iter().map(|r| r.to_vec()).collect();
    to_json(&GmmJson {
        model_id: fit.allocation.model_id(),
        loglik: fit.loglik,
        bic: fit.bic,
        kappa: fit.kappa,
        converged: fit.converged,
        mixing: fit.mixing.to_vec(),
        means: rows(&fit.means),
        variances: rows(&fit.variances),
    })
}

/// Reads a run's `allocations.csv` modal labels back as 0-based clusters.
pub fn read_modal_labels(path: &Path) -> Result<Vec<usize>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| CliError::input(path, None, e.to_string()))?
        .clone();
    let col = header
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| CliError::input(path, None, "no `label` column"))?;
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| CliError::input(path, Some(i + 1), e.to_string()))?;
            match r.get(col).and_then(|v| v.parse::<usize>().ok()) {
                Some(l) if l >= 1 => Ok(l - 1),
                _ => Err(CliError::input(path, Some(i + 1), "bad label")),
            }
        })
        .collect()
}
