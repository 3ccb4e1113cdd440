//! File formats and the compare pipeline.

mod config;
mod cube;
mod map;
mod pipeline;

pub use config::{RunConfig, DEFAULT_K, DEFAULT_SEED};
pub use cube::{load_cube, load_gt, raw_path_for, write_cube, write_gt_raw, CubeHeader, Dtype};
pub use map::{
    color_of, decode_estimated_gt, export_gt, export_map, render_ppm, scatter, PALETTE, UNLABELED,
};
pub use pipeline::{
    classify_bands, compare_on, config_from_report, run_compare, Classification, CompareOutcome,
    Dataset, MethodOutcome, MethodRun, TABLE_MARKER,
};

use std::path::Path;

use crate::error::Result;
use crate::synth::{generate_cube, SynthOracle, SynthSpec};

/// Generates a synthetic dataset and writes `<stem>.hdr.json`, `<stem>.raw`
/// (f32) and `<stem>.gt.raw` next to each other.
pub fn export_synth(spec: &SynthSpec, dir: &Path, stem: &str) -> Result<SynthOracle> {
    let (cube, gt, oracle) = generate_cube(spec)?;
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    write_cube(
        &cube,
        &dir.join(format!("{stem}.hdr.json")),
        &dir.join(format!("{stem}.raw")),
        Dtype::F32,
    )?;
    write_gt_raw(&gt, &dir.join(format!("{stem}.gt.raw")))?;
    Ok(oracle)
}

pub fn load_synth_spec(path: &Path) -> Result<SynthSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| crate::Error::Config(format!("{}: {e}", path.display())))?;
    let spec: SynthSpec = toml::from_str(&text).map_err(|e| crate::Error::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}
