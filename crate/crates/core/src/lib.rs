//! Information-gain band selection for hyperspectral images.
//!
//! The crate covers the full pipeline: per-band quantization of a radiance
//! cube, histogram estimators of entropy / mutual information / interaction
//! information, five greedy band selectors (MIM, MIFS, MRMR, MIBF, IGBS), a
//! classification harness (one-vs-one RBF SVM trained by SMO, plus a 1-NN
//! baseline), a synthetic cube generator with planted informative bands, and
//! file I/O for cubes, ground truth, reports and class maps.

pub mod classify;
pub mod datamodel;
pub mod error;
pub mod infotheory;
pub mod io;
pub mod selection;
pub mod synth;

pub use datamodel::{
    label_series, labeled_series, quantize_cube, DiscreteSeries, GroundTruth, HyperCube,
    LabeledData, QuantizedCube,
};
pub use error::{Error, Result};
pub use selection::{greedy_select, Method, SelectionParams, SelectionResult};
