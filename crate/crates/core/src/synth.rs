//! Synthetic hypercubes with planted informative bands.
//!
//! The ground truth tiles the raster into `classes` contiguous runs of
//! row-major pixels. Informative band number `j` (its position in
//! `informative_bands`) splits the ordered classes at threshold
//! `t_j = 1 + j mod (classes - 1)`: classes below the threshold have mean 0,
//! the rest mean `class_separation`. Every band therefore keeps the class
//! order, consecutive thresholds carry complementary information, and the
//! informative bands jointly identify the class. With two classes every
//! informative band identifies the class on its own. Remaining bands are
//! pure `N(0, noise_sigma)` noise.
//!
//! Values are rounded to `f32` precision so that exporting to an `f32` cube
//! file and reading it back is lossless.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datamodel::{GroundTruth, HyperCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub classes: usize,
    pub informative_bands: Vec<usize>,
    pub noise_sigma: f64,
    pub class_separation: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.bands == 0 {
            return Err(Error::InvalidParameter(format!(
                "synthetic cube needs positive dimensions, got {}x{}x{}",
                self.bands, self.rows, self.cols
            )));
        }
        if self.classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "at least 2 classes required, got {}",
                self.classes
            )));
        }
        if self.classes > self.rows * self.cols {
            return Err(Error::InvalidParameter(format!(
                "cannot tile {} classes onto {} pixels",
                self.classes,
                self.rows * self.cols
            )));
        }
        if !(self.class_separation.is_finite() && self.class_separation > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "class separation must be positive, got {}",
                self.class_separation
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        let mut seen = vec![false; self.bands];
        for &b in &self.informative_bands {
            if b >= self.bands {
                return Err(Error::InvalidParameter(format!(
                    "informative band {b} outside 0..{}",
                    self.bands
                )));
            }
            if std::mem::replace(&mut seen[b], true) {
                return Err(Error::InvalidParameter(format!(
                    "informative band {b} listed twice"
                )));
            }
        }
        Ok(())
    }
}

/// Ground-truth construction details for checking selectors against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOracle {
    pub informative_bands: Vec<usize>,
    /// `class_means[j][c]` is the mean of informative band `j` for class
    /// label `c + 1`.
    pub class_means: Vec<Vec<f64>>,
}

/// Class label (1-based) of each row-major pixel.
fn tile_labels(pixels: usize, classes: usize) -> Vec<u32> {
    (0..pixels)
        .map(|p| (p * classes / pixels) as u32 + 1)
        .collect()
}

pub fn class_means(spec: &SynthSpec) -> Vec<Vec<f64>> {
    (0..spec.informative_bands.len())
        .map(|j| {
            let threshold = 1 + j % (spec.classes - 1);
            (0..spec.classes)
                .map(|c| {
                    if c >= threshold {
                        spec.class_separation
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

pub fn generate_cube(spec: &SynthSpec) -> Result<(HyperCube, GroundTruth, SynthOracle)> {
    spec.validate()?;
    let n = spec.rows * spec.cols;
    let labels = tile_labels(n, spec.classes);
    let means = class_means(spec);
    let mut mean_of_band: Vec<Option<&Vec<f64>>> = vec![None; spec.bands];
    for (j, &b) in spec.informative_bands.iter().enumerate() {
        mean_of_band[b] = Some(&means[j]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = Vec::with_capacity(spec.bands * n);
    for band_means in &mean_of_band {
        for &label in &labels {
            let z: f64 = StandardNormal.sample(&mut rng);
            let mean = band_means.map_or(0.0, |m| m[label as usize - 1]);
            values.push((mean + spec.noise_sigma * z) as f32 as f64);
        }
    }
    let cube = HyperCube::new(spec.bands, spec.rows, spec.cols, values)?;
    let gt = GroundTruth::new(spec.rows, spec.cols, labels)?;
    Ok((
        cube,
        gt,
        SynthOracle {
            informative_bands: spec.informative_bands.clone(),
            class_means: means,
        },
    ))
}
