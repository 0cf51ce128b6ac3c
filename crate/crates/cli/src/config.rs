//! Pipeline configuration, loaded from TOML and overridable from flags.
//!
//! ```toml
//! data = "data.csv"
//! k_bma = 3
//! seed = 1
//! out = "results"
//!
//! [[models]]
//! algorithm = "kmeans"
//! k = 3
//!
//! [[models]]
//! file = "hclust_labels.csv"
//! id = "hclust"
//!
//! [weights]
//! mode = "standard"
//! prior = [0.5, 0.5]
//!
//! [ssmf]
//! lambda = 0.01
//! restarts = 10
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bma_cluster::{Algorithm, WeightMode};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    /// Defaults to the largest cluster count among the input models.
    pub k_bma: Option<usize>,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub ssmf: SsmfSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data: None,
            models: Vec::new(),
            k_bma: None,
            weights: WeightsConfig::default(),
            ssmf: SsmfSection::default(),
            seed: 0,
            out: default_out(),
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("bma_out")
}

/// A model is either fitted by a built-in algorithm or read from a file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Builtin(BuiltinSpec),
    File(FileSpec),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub algorithm: String,
    pub k: usize,
    /// Defaults to the top-level seed.
    pub seed: Option<u64>,
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub file: PathBuf,
    /// Defaults to the file stem.
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default)]
    pub mode: WeightMode,
    pub prior: Option<Vec<f64>>,
    /// Explicit weights for `mode = "fixed"`.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsmfSection {
    pub lambda: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SsmfSection {
    fn default() -> Self {
        let d = bma_cluster::SsmfConfig::new(1);
        SsmfSection {
            lambda: d.lambda,
            restarts: d.restarts,
            max_iter: d.max_iter,
            tol: d.tol,
        }
    }
}

impl BuiltinSpec {
    pub fn algorithm(&self) -> Result<Algorithm> {
        Algorithm::from_str(&self.algorithm).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Parses `algorithm:k` or `algorithm:k:seed`, e.g. `kmeans:3`.
impl FromStr for BuiltinSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("model `{s}` is not `algorithm:k[:seed]`"));
        if !(2..=3).contains(&parts.len()) {
            return Err(bad());
        }
        let spec = BuiltinSpec {
            algorithm: parts[0].to_string(),
            k: parts[1].parse().map_err(|_| bad())?,
            seed: parts
                .get(2)
                .map(|p| p.parse())
                .transpose()
                .map_err(|_| bad())?,
            id: None,
        };
        spec.algorithm()?;
        Ok(spec)
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Loads a config file, resolving its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(d) = self.data.as_mut() {
            join(d);
        }
        join(&mut self.out);
        for m in &mut self.models {
            if let ModelSpec::File(f) = m {
                join(&mut f.file);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = Config::from_toml("data = \"x.csv\"").unwrap();
        assert_eq!(cfg.weights.mode, WeightMode::Standard);
        assert_eq!(cfg.ssmf.lambda, 0.01);
        assert_eq!(cfg.ssmf.restarts, 10);
        assert_eq!(cfg.ssmf.max_iter, 1000);
        assert_eq!(cfg.ssmf.tol, 1e-8);
        assert_eq!(cfg.out, PathBuf::from("bma_out"));
        assert_eq!(cfg.k_bma, None);
    }

    #[test]
    fn full_file() {
        let cfg = Config::from_toml(
            r#"
            data = "d.csv"
            k_bma = 3
            seed = 9
            out = "o"
            [[models]]
            algorithm = "kmeans"
            k = 3
            [[models]]
            file = "a.csv"
            [weights]
            mode = "literal"
            prior = [0.25, 0.75]
            [ssmf]
            lambda = 0.0
            restarts = 4
            "#,
        )
        .unwrap();
        assert_eq!(cfg.models.len(), 2);
        assert!(matches!(&cfg.models[0], ModelSpec::Builtin(b) if b.k == 3 && b.seed.is_none()));
        assert!(matches!(&cfg.models[1], ModelSpec::File(f) if f.file == Path::new("a.csv")));
        assert_eq!(cfg.weights.mode, WeightMode::Literal);
        assert_eq!(cfg.ssmf.restarts, 4);
        assert_eq!(cfg.ssmf.max_iter, 1000);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Config::from_toml("dat = \"x\"").is_err());
        assert!(Config::from_toml("[ssmf]\nlamda = 1.0").is_err());
    }

    #[test]
    fn model_flag_syntax() {
        let s: BuiltinSpec = "hclust:2".parse().unwrap();
        assert_eq!((s.algorithm.as_str(), s.k, s.seed), ("hclust", 2, None));
        let s: BuiltinSpec = "gmm:4:7".parse().unwrap();
        assert_eq!(s.seed, Some(7));
        assert!("dbscan:2".parse::<BuiltinSpec>().is_err());
        assert!("kmeans".parse::<BuiltinSpec>().is_err());
    }
}
