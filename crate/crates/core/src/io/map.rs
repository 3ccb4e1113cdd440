//! Class maps as binary PPM (P6) images.
//!
//! Label 0 (unlabeled) is black. Label `l >= 1` takes entry `(l - 1) mod 16`
//! of [`PALETTE`].

use std::fs;
use std::path::Path;

use crate::datamodel::{DiscreteSeries, GroundTruth, LabeledData};
use crate::error::{Error, Result};

pub const UNLABELED: [u8; 3] = [0, 0, 0];

pub const PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
];

pub fn color_of(label: u32) -> [u8; 3] {
    match label {
        0 => UNLABELED,
        l => PALETTE[(l as usize - 1) % PALETTE.len()],
    }
}

/// Encodes a row-major label grid as a P6 image.
pub fn render_ppm(labels: &[u32], rows: usize, cols: usize) -> Result<Vec<u8>> {
    if labels.len() != rows * cols {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: rows * cols,
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("label grid"));
    }
    let mut out = format!("P6\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(labels.len() * 3);
    for &l in labels {
        out.extend_from_slice(&color_of(l));
    }
    Ok(out)
}

pub fn export_map(labels: &[u32], rows: usize, cols: usize, path: &Path) -> Result<()> {
    let bytes = render_ppm(labels, rows, cols)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn export_gt(gt: &GroundTruth, path: &Path) -> Result<()> {
    export_map(gt.labels(), gt.rows(), gt.cols(), path)
}

/// Turns an estimated-GT level series into class labels: each level maps to
/// the class it co-occurs with most often among labeled pixels, ties to the
/// lowest class id. Returns one class id per labeled pixel.
pub fn decode_estimated_gt(data: &LabeledData, estimate: &DiscreteSeries) -> Result<Vec<u32>> {
    if estimate.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: estimate.len(),
            right: data.len(),
        });
    }
    let classes = data.classes();
    let c = classes.len();
    let mut counts = vec![0u64; estimate.alphabet() * c];
    for (&level, &class) in estimate.symbols().iter().zip(data.labels().symbols()) {
        counts[level as usize * c + class as usize] += 1;
    }
    let winner: Vec<u32> = counts
        .chunks(c)
        .map(|row| {
            let mut best = 0;
            for (i, &n) in row.iter().enumerate() {
                if n > row[best] {
                    best = i;
                }
            }
            classes[best]
        })
        .collect();
    Ok(estimate
        .symbols()
        .iter()
        .map(|&level| winner[level as usize])
        .collect())
}

/// Scatters per-labeled-pixel values back onto the full grid, 0 elsewhere.
pub fn scatter(data: &LabeledData, values: &[u32], rows: usize, cols: usize) -> Result<Vec<u32>> {
    if values.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: data.len(),
        });
    }
    let mut grid = vec![0u32; rows * cols];
    for (&p, &v) in data.pixels().iter().zip(values) {
        *grid.get_mut(p).ok_or(Error::LengthMismatch {
            left: p,
            right: rows * cols,
        })? = v;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_colors() {
        let ppm = render_ppm(&[0, 1, 17, 16], 2, 2).unwrap();
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        let px = &ppm[header.len()..];
        assert_eq!(&px[0..3], &UNLABELED);
        assert_eq!(&px[3..6], &PALETTE[0]);
        assert_eq!(&px[6..9], &PALETTE[0]);
        assert_eq!(&px[9..12], &PALETTE[15]);
    }

    #[test]
    fn constant_grid_is_one_color() {
        let ppm = render_ppm(&[3; 12], 3, 4).unwrap();
        let px = &ppm[b"P6\n4 3\n255\n".len()..];
        assert!(px.chunks(3).all(|c| c == PALETTE[2]));
    }

    #[test]
    fn wrong_size_is_rejected() {
        assert!(render_ppm(&[1, 2, 3], 2, 2).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            export_map(&[1], 1, 1, &dir.path().join("missing/x.ppm")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn gt_export_matches_direct_rendering() {
        let dir = tempfile::tempdir().unwrap();
        let gt = GroundTruth::new(2, 3, vec![0, 1, 2, 2, 0, 5]).unwrap();
        let path = dir.path().join("gt.ppm");
        export_gt(&gt, &path).unwrap();
        assert_eq!(
            fs::read(&path).unwrap(),
            render_ppm(gt.labels(), 2, 3).unwrap()
        );
    }

    #[test]
    fn decoding_uses_majority_with_low_ties() {
        let band = DiscreteSeries::new(vec![0; 6], 4).unwrap();
        let labels = DiscreteSeries::new(vec![0, 0, 1, 1, 1, 0], 2).unwrap();
        let data = LabeledData::from_series(4, vec![band], labels).unwrap();
        // level 0: classes {0, 0}; level 1: {1, 1, 0} -> 1; level 2: {1, 0} tie -> 0
        let est = DiscreteSeries::new(vec![0, 0, 1, 1, 2, 2], 4).unwrap();
        let decoded = decode_estimated_gt(&data, &est).unwrap();
        let ids = data.classes();
        assert_eq!(
            decoded,
            vec![ids[0], ids[0], ids[1], ids[1], ids[0], ids[0]]
        );
    }
}
