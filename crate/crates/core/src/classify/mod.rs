//! Evaluation harness: stratified splitting, classifiers and accuracy metrics.

mod knn;
mod metrics;
mod split;
mod svm;

pub use knn::knn_predict;
pub use metrics::{evaluate, evaluate_with_classes, ConfusionMatrix, EvalReport};
pub use split::{stratified_split, Role, SplitPlan, DEFAULT_TRAIN_FRACTION};
pub use svm::{
    predict, train_svm, BinaryModel, SupportVectors, SvmModel, SvmParams, DEFAULT_C,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datamodel::QuantizedCube;
use crate::error::{Error, Result};

/// Row-major sample matrix, one row per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dims: usize, data: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidParameter(
                "feature dimension must be positive".into(),
            ));
        }
        if data.len() != rows * dims {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: rows * dims,
            });
        }
        Ok(Self { rows, dims, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dims);
        for r in rows {
            if r.len() != dims {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: dims,
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), dims, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.dims);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            rows: rows.len(),
            dims: self.dims,
            data,
        }
    }
}

/// Quantized values of `bands` at `pixels`, scaled to `[0, 1]` by
/// `q / (levels - 1)`.
pub fn extract_features(
    qcube: &QuantizedCube,
    bands: &[usize],
    pixels: &[usize],
) -> Result<FeatureMatrix> {
    if bands.is_empty() {
        return Err(Error::Empty("band set"));
    }
    if let Some(&b) = bands.iter().find(|&&b| b >= qcube.bands()) {
        return Err(Error::InvalidParameter(format!("band {b} out of range")));
    }
    if let Some(&p) = pixels.iter().find(|&&p| p >= qcube.pixels()) {
        return Err(Error::InvalidParameter(format!("pixel {p} out of range")));
    }
    let scale = 1.0 / (qcube.levels() - 1) as f64;
    let mut data = Vec::with_capacity(pixels.len() * bands.len());
    for &p in pixels {
        for &b in bands {
            data.push(f64::from(qcube.band(b)[p]) * scale);
        }
    }
    FeatureMatrix::new(pixels.len(), bands.len(), data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Svm,
    Knn,
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classifier::Svm => "svm",
            Classifier::Knn => "knn",
        })
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svm" => Ok(Classifier::Svm),
            "knn" | "1nn" | "1-nn" => Ok(Classifier::Knn),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}
