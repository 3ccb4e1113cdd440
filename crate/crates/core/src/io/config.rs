use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{
    Classifier, SvmParams, DEFAULT_C, DEFAULT_MAX_ITER, DEFAULT_TOL, DEFAULT_TRAIN_FRACTION,
};
use crate::datamodel::{DEFAULT_LEVELS, MAX_LEVELS};
use crate::error::{Error, Result};
use crate::selection::{Method, SelectionParams, DEFAULT_BETA, DEFAULT_LAMBDA, DEFAULT_THRESHOLD};

pub const DEFAULT_K: usize = 80;
pub const DEFAULT_SEED: u64 = 42;

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_k() -> usize {
    DEFAULT_K
}
fn default_levels() -> usize {
    DEFAULT_LEVELS
}
fn default_beta() -> f64 {
    DEFAULT_BETA
}
fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}
fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn default_classifier() -> Classifier {
    Classifier::Svm
}
fn default_svm_c() -> f64 {
    DEFAULT_C
}
fn default_svm_tol() -> f64 {
    DEFAULT_TOL
}
fn default_svm_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_train_fraction() -> f64 {
    DEFAULT_TRAIN_FRACTION
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_out() -> PathBuf {
    PathBuf::from("run")
}

/// Everything one `compare` run depends on. Only `cube` and `gt` lack
/// defaults. `raw` defaults to the header path with `.hdr.json` replaced by
/// `.raw`; an absent `svm_gamma` means `1 / k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cube: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<PathBuf>,
    pub gt: PathBuf,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_classifier")]
    pub classifier: Classifier,
    #[serde(default = "default_svm_c")]
    pub svm_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svm_gamma: Option<f64>,
    #[serde(default = "default_svm_tol")]
    pub svm_tol: f64,
    #[serde(default = "default_svm_max_iter")]
    pub svm_max_iter: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Display names for class ids 1, 2, ...; ids beyond the list print as
    /// numbers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_names: Vec<String>,
}

impl RunConfig {
    pub fn new(cube: impl Into<PathBuf>, gt: impl Into<PathBuf>) -> Self {
        Self {
            cube: cube.into(),
            raw: None,
            gt: gt.into(),
            methods: default_methods(),
            k: DEFAULT_K,
            levels: DEFAULT_LEVELS,
            beta: DEFAULT_BETA,
            threshold: DEFAULT_THRESHOLD,
            lambda: DEFAULT_LAMBDA,
            classifier: default_classifier(),
            svm_c: DEFAULT_C,
            svm_gamma: None,
            svm_tol: DEFAULT_TOL,
            svm_max_iter: DEFAULT_MAX_ITER,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: DEFAULT_SEED,
            out: default_out(),
            class_names: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn raw_path(&self) -> PathBuf {
        self.raw
            .clone()
            .unwrap_or_else(|| super::raw_path_for(&self.cube))
    }

    pub fn selection_params(&self) -> SelectionParams {
        SelectionParams {
            beta: self.beta,
            threshold: self.threshold,
            lambda: self.lambda,
        }
    }

    pub fn svm_params(&self) -> SvmParams {
        SvmParams {
            c: self.svm_c,
            gamma: self.svm_gamma,
            tol: self.svm_tol,
            max_iter: self.svm_max_iter,
        }
    }

    pub fn class_name(&self, class: u32) -> String {
        (class as usize)
            .checked_sub(1)
            .and_then(|i| self.class_names.get(i))
            .cloned()
            .unwrap_or_else(|| class.to_string())
    }

    /// Parameter checks that need no data. Band-count checks on `k` happen
    /// once the cube is loaded.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if !(2..=MAX_LEVELS).contains(&self.levels) {
            return Err(Error::Config(format!(
                "levels must be in 2..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        self.selection_params().validate()?;
        self.svm_params().validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}
