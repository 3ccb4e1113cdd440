//! Raster types, per-band quantization and labeled-pixel extraction.
//!
//! Every estimator in the crate works on [`DiscreteSeries`] drawn from the
//! labeled pixels of a [`QuantizedCube`]. Unlabeled pixels (label 0) never
//! enter a probability estimate.

use crate::error::{Error, Result};

/// Default number of quantization levels.
pub const DEFAULT_LEVELS: usize = 16;
pub const MAX_LEVELS: usize = 256;

/// Band-major radiance cube: value `(band, row, col)` lives at
/// `band * rows * cols + row * cols + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    bands: usize,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl HyperCube {
    pub fn new(bands: usize, rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if bands == 0 || rows == 0 || cols == 0 {
            return Err(Error::Geometry(format!(
                "cube dimensions must be positive, got {bands}x{rows}x{cols}"
            )));
        }
        let expected = bands * rows * cols;
        if values.len() != expected {
            return Err(Error::Geometry(format!(
                "cube {bands}x{rows}x{cols} needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            bands,
            rows,
            cols,
            values,
        })
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn band(&self, band: usize) -> &[f64] {
        let n = self.pixels();
        &self.values[band * n..(band + 1) * n]
    }

    /// Fails with the index of the first band holding a NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        for band in 0..self.bands {
            if self.band(band).iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { band });
            }
        }
        Ok(())
    }
}

/// Per-pixel class labels in row-major order. 0 means unlabeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
}

impl GroundTruth {
    pub fn new(rows: usize, cols: usize, labels: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Geometry(format!(
                "ground truth dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if labels.len() != rows * cols {
            return Err(Error::Geometry(format!(
                "ground truth {rows}x{cols} needs {} labels, got {}",
                rows * cols,
                labels.len()
            )));
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Distinct nonzero labels, ascending.
    pub fn classes(&self) -> Vec<u32> {
        let mut classes: Vec<u32> = self.labels.iter().copied().filter(|&l| l != 0).collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Row-major indices of labeled pixels.
    pub fn labeled_pixels(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l != 0).count()
    }

    /// Checks that the map is usable for supervised work: at least one
    /// labeled pixel and at least two classes.
    pub fn validate(&self) -> Result<()> {
        let classes = self.classes();
        if classes.is_empty() {
            return Err(Error::NoLabeledPixels);
        }
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        Ok(())
    }

    pub fn matches(&self, cube: &HyperCube) -> Result<()> {
        if self.rows != cube.rows() || self.cols != cube.cols() {
            return Err(Error::Geometry(format!(
                "ground truth is {}x{} but cube is {}x{}",
                self.rows,
                self.cols,
                cube.rows(),
                cube.cols()
            )));
        }
        Ok(())
    }
}

/// A cube whose values have been discretized to `levels` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedCube {
    bands: usize,
    rows: usize,
    cols: usize,
    levels: usize,
    values: Vec<u8>,
}

impl QuantizedCube {
    pub fn new(
        bands: usize,
        rows: usize,
        cols: usize,
        levels: usize,
        values: Vec<u8>,
    ) -> Result<Self> {
        check_levels(levels)?;
        if bands == 0 || rows == 0 || cols == 0 || values.len() != bands * rows * cols {
            return Err(Error::Geometry(format!(
                "quantized cube {bands}x{rows}x{cols} cannot hold {} values",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v as usize >= levels) {
            return Err(Error::InvalidParameter(format!(
                "quantized value {v} outside [0, {}]",
                levels - 1
            )));
        }
        Ok(Self {
            bands,
            rows,
            cols,
            levels,
            values,
        })
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    pub fn band(&self, band: usize) -> &[u8] {
        let n = self.pixels();
        &self.values[band * n..(band + 1) * n]
    }

    /// Widens the symbols back to a real-valued cube.
    pub fn to_cube(&self) -> HyperCube {
        HyperCube {
            bands: self.bands,
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if !(2..=MAX_LEVELS).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "levels must be in 2..={MAX_LEVELS}, got {levels}"
        )));
    }
    Ok(())
}

/// Per-band min-max scaling onto `0..levels`, rounding half up.
/// A constant band maps entirely to 0.
pub fn quantize_cube(cube: &HyperCube, levels: usize) -> Result<QuantizedCube> {
    check_levels(levels)?;
    cube.check_finite()?;
    let top = (levels - 1) as f64;
    let mut values = Vec::with_capacity(cube.values.len());
    for band in 0..cube.bands {
        let data = cube.band(band);
        let (min, max) = data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let range = max - min;
        if range == 0.0 {
            values.extend(std::iter::repeat_n(0u8, data.len()));
            continue;
        }
        values.extend(data.iter().map(|&v| {
            let q = ((v - min) / range * top + 0.5).floor();
            q.clamp(0.0, top) as u8
        }));
    }
    Ok(QuantizedCube {
        bands: cube.bands,
        rows: cube.rows,
        cols: cube.cols,
        levels,
        values,
    })
}

/// A sequence of symbols drawn from `0..alphabet`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteSeries {
    symbols: Vec<u32>,
    alphabet: usize,
}

impl DiscreteSeries {
    pub fn new(symbols: Vec<u32>, alphabet: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Empty("discrete series"));
        }
        if alphabet == 0 {
            return Err(Error::InvalidParameter("alphabet must be positive".into()));
        }
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= alphabet) {
            return Err(Error::InvalidParameter(format!(
                "symbol {s} outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self { symbols, alphabet })
    }

    /// Builds a series with the smallest alphabet that holds every symbol.
    pub fn from_symbols(symbols: Vec<u32>) -> Result<Self> {
        let alphabet = symbols.iter().copied().max().map_or(0, |m| m as usize + 1);
        Self::new(symbols, alphabet)
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Quantized values of `band` at the labeled pixels, row-major.
pub fn labeled_series(
    qcube: &QuantizedCube,
    gt: &GroundTruth,
    band: usize,
) -> Result<DiscreteSeries> {
    check_pair(qcube, gt)?;
    if band >= qcube.bands {
        return Err(Error::InvalidParameter(format!(
            "band {band} out of range for a {}-band cube",
            qcube.bands
        )));
    }
    let data = qcube.band(band);
    let symbols: Vec<u32> = gt
        .labels
        .iter()
        .zip(data)
        .filter(|(&l, _)| l != 0)
        .map(|(_, &v)| u32::from(v))
        .collect();
    if symbols.is_empty() {
        return Err(Error::NoLabeledPixels);
    }
    DiscreteSeries::new(symbols, qcube.levels)
}

/// Class labels at the labeled pixels, in the same order as
/// [`labeled_series`]. Labels are re-indexed densely: the i-th smallest
/// class becomes symbol i.
pub fn label_series(gt: &GroundTruth) -> Result<DiscreteSeries> {
    let classes = gt.classes();
    if classes.is_empty() {
        return Err(Error::NoLabeledPixels);
    }
    let symbols = gt
        .labels
        .iter()
        .filter(|&&l| l != 0)
        .map(|l| classes.binary_search(l).expect("label drawn from classes") as u32)
        .collect();
    DiscreteSeries::new(symbols, classes.len())
}

fn check_pair(qcube: &QuantizedCube, gt: &GroundTruth) -> Result<()> {
    if qcube.rows != gt.rows || qcube.cols != gt.cols {
        return Err(Error::Geometry(format!(
            "ground truth is {}x{} but cube is {}x{}",
            gt.rows, gt.cols, qcube.rows, qcube.cols
        )));
    }
    Ok(())
}

/// Every band's labeled series plus the matching label series, extracted
/// once so that selection never touches the full raster again.
#[derive(Debug, Clone)]
pub struct LabeledData {
    levels: usize,
    bands: Vec<DiscreteSeries>,
    labels: DiscreteSeries,
    classes: Vec<u32>,
    pixels: Vec<usize>,
}

impl LabeledData {
    pub fn new(qcube: &QuantizedCube, gt: &GroundTruth) -> Result<Self> {
        check_pair(qcube, gt)?;
        let labels = label_series(gt)?;
        let bands = (0..qcube.bands)
            .map(|b| labeled_series(qcube, gt, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            levels: qcube.levels,
            bands,
            labels,
            classes: gt.classes(),
            pixels: gt.labeled_pixels(),
        })
    }

    /// Assembles labeled data directly from series; all must share one length.
    pub fn from_series(
        levels: usize,
        bands: Vec<DiscreteSeries>,
        labels: DiscreteSeries,
    ) -> Result<Self> {
        check_levels(levels)?;
        if bands.is_empty() {
            return Err(Error::Empty("band list"));
        }
        for b in &bands {
            if b.len() != labels.len() {
                return Err(Error::LengthMismatch {
                    left: b.len(),
                    right: labels.len(),
                });
            }
            if b.alphabet() > levels {
                return Err(Error::InvalidParameter(format!(
                    "band alphabet {} exceeds {levels} levels",
                    b.alphabet()
                )));
            }
        }
        let bands = bands
            .into_iter()
            .map(|b| DiscreteSeries::new(b.symbols, levels))
            .collect::<Result<Vec<_>>>()?;
        let classes = (1..=labels.alphabet() as u32).collect();
        let pixels = (0..labels.len()).collect();
        Ok(Self {
            levels,
            bands,
            labels,
            classes,
            pixels,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn band(&self, band: usize) -> &DiscreteSeries {
        &self.bands[band]
    }

    pub fn labels(&self) -> &DiscreteSeries {
        &self.labels
    }

    /// Original class ids; `classes()[s]` is the label behind symbol `s`.
    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    /// Row-major raster index of each labeled sample.
    pub fn pixels(&self) -> &[usize] {
        &self.pixels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_band(values: Vec<f64>) -> HyperCube {
        let n = values.len();
        HyperCube::new(1, 1, n, values).unwrap()
    }

    #[test]
    fn quantize_identity_on_integer_ramp() {
        let q = quantize_cube(&one_band(vec![0.0, 1.0, 2.0, 3.0]), 4).unwrap();
        assert_eq!(q.band(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn quantize_constant_band_is_zero() {
        for levels in [2, 16, 256] {
            let q = quantize_cube(&one_band(vec![5.0, 5.0, 5.0]), levels).unwrap();
            assert_eq!(q.band(0), &[0, 0, 0]);
        }
    }

    #[test]
    fn quantize_two_point_band_hits_both_ends() {
        let q = quantize_cube(&one_band(vec![0.0, 10.0]), 16).unwrap();
        assert_eq!(q.band(0), &[0, 15]);
    }

    #[test]
    fn quantize_rounds_half_up() {
        // 0.5 of a step lands exactly on the upper bin.
        let q = quantize_cube(&one_band(vec![0.0, 0.5, 1.5, 3.0]), 4).unwrap();
        assert_eq!(q.band(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn quantize_is_per_band() {
        let cube = HyperCube::new(2, 1, 2, vec![0.0, 1.0, 100.0, 300.0]).unwrap();
        let q = quantize_cube(&cube, 8).unwrap();
        assert_eq!(q.band(0), &[0, 7]);
        assert_eq!(q.band(1), &[0, 7]);
    }

    #[test]
    fn quantize_rejects_non_finite_naming_band() {
        let cube = HyperCube::new(3, 1, 2, vec![0.0, 1.0, 2.0, 3.0, f64::NAN, 1.0]).unwrap();
        match quantize_cube(&cube, 16) {
            Err(Error::NonFinite { band }) => assert_eq!(band, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quantize_rejects_bad_levels() {
        let cube = one_band(vec![0.0, 1.0]);
        assert!(quantize_cube(&cube, 1).is_err());
        assert!(quantize_cube(&cube, 257).is_err());
    }

    #[test]
    fn cube_geometry_checked() {
        assert!(HyperCube::new(0, 1, 1, vec![]).is_err());
        assert!(HyperCube::new(2, 2, 2, vec![0.0; 7]).is_err());
        assert!(GroundTruth::new(2, 2, vec![0; 3]).is_err());
    }

    #[test]
    fn labeled_series_follows_mask() {
        let cube = HyperCube::new(1, 2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let q = quantize_cube(&cube, 4).unwrap();
        let gt = GroundTruth::new(2, 2, vec![1, 0, 2, 2]).unwrap();
        let s = labeled_series(&q, &gt, 0).unwrap();
        assert_eq!(s.symbols(), &[0, 2, 3]);
        let l = label_series(&gt).unwrap();
        assert_eq!(l.symbols(), &[0, 1, 1]);
        assert_eq!(l.alphabet(), 2);

        let all = GroundTruth::new(2, 2, vec![3, 1, 2, 2]).unwrap();
        assert_eq!(labeled_series(&q, &all, 0).unwrap().len(), 4);
    }

    #[test]
    fn labeled_series_errors() {
        let q = quantize_cube(&HyperCube::new(1, 2, 2, vec![0.0; 4]).unwrap(), 4).unwrap();
        let empty = GroundTruth::new(2, 2, vec![0; 4]).unwrap();
        assert!(matches!(
            labeled_series(&q, &empty, 0),
            Err(Error::NoLabeledPixels)
        ));
        assert!(matches!(label_series(&empty), Err(Error::NoLabeledPixels)));
        let gt = GroundTruth::new(2, 2, vec![1; 4]).unwrap();
        assert!(labeled_series(&q, &gt, 1).is_err());
        let other = GroundTruth::new(1, 4, vec![1; 4]).unwrap();
        assert!(matches!(
            labeled_series(&q, &other, 0),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn ground_truth_validation() {
        assert!(matches!(
            GroundTruth::new(1, 3, vec![0, 0, 0]).unwrap().validate(),
            Err(Error::NoLabeledPixels)
        ));
        assert!(matches!(
            GroundTruth::new(1, 3, vec![0, 4, 4]).unwrap().validate(),
            Err(Error::TooFewClasses(1))
        ));
        assert!(GroundTruth::new(1, 3, vec![0, 4, 2])
            .unwrap()
            .validate()
            .is_ok());
    }

    fn cube_strategy() -> impl Strategy<Value = HyperCube> {
        (1usize..4, 1usize..5, 1usize..5).prop_flat_map(|(b, r, c)| {
            prop::collection::vec(-1.0e6f64..1.0e6, b * r * c)
                .prop_map(move |v| HyperCube::new(b, r, c, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn quantize_is_idempotent(cube in cube_strategy(), levels in 2usize..=256) {
            let q = quantize_cube(&cube, levels).unwrap();
            let again = quantize_cube(&q.to_cube(), levels).unwrap();
            prop_assert_eq!(q, again);
        }

        #[test]
        fn quantize_is_monotone(values in prop::collection::vec(-1.0e3f64..1.0e3, 2..40), levels in 2usize..=64) {
            let q = quantize_cube(&one_band(values.clone()), levels).unwrap();
            let out = q.band(0);
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if values[i] <= values[j] {
                        prop_assert!(out[i] <= out[j]);
                    }
                }
            }
        }

        #[test]
        fn quantize_attains_both_ends(values in prop::collection::vec(-50.0f64..50.0, 2..40), levels in 2usize..=256) {
            let q = quantize_cube(&one_band(values.clone()), levels).unwrap();
            let out = q.band(0);
            let constant = values.iter().all(|&v| v == values[0]);
            if constant {
                prop_assert!(out.iter().all(|&v| v == 0));
            } else {
                prop_assert!(out.contains(&0));
                prop_assert!(out.contains(&((levels - 1) as u8)));
            }
        }

        #[test]
        fn series_share_pixel_order(labels in prop::collection::vec(0u32..4, 12), seed in 0u64..1000) {
            prop_assume!(labels.iter().any(|&l| l != 0));
            let values: Vec<f64> = (0..24).map(|i| ((i as u64 * 2654435761 + seed) % 97) as f64).collect();
            let cube = HyperCube::new(2, 3, 4, values).unwrap();
            let q = quantize_cube(&cube, 8).unwrap();
            let gt = GroundTruth::new(3, 4, labels.clone()).unwrap();
            let lab = label_series(&gt).unwrap();
            let classes = gt.classes();
            for b in 0..2 {
                let s = labeled_series(&q, &gt, b).unwrap();
                prop_assert_eq!(s.len(), lab.len());
                for (k, &px) in gt.labeled_pixels().iter().enumerate() {
                    prop_assert_eq!(s.symbols()[k], u32::from(q.band(b)[px]));
                    prop_assert_eq!(classes[lab.symbols()[k] as usize], labels[px]);
                }
            }
        }
    }
}
