//! Band-sequential raw cubes with a JSON sidecar header, and ground-truth
//! grids stored as raw little-endian `u16` or CSV.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datamodel::{GroundTruth, HyperCube};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U16,
    F32,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::U16 => 2,
            Dtype::F32 => 4,
        }
    }
}

fn default_interleave() -> String {
    "bsq".into()
}

fn default_byte_order() -> String {
    "little".into()
}

/// Contents of `<name>.hdr.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeHeader {
    pub rows: usize,
    pub cols: usize,
    pub bands: usize,
    pub dtype: String,
    #[serde(default = "default_interleave")]
    pub interleave: String,
    #[serde(default = "default_byte_order")]
    pub byte_order: String,
}

impl CubeHeader {
    pub fn new(rows: usize, cols: usize, bands: usize, dtype: Dtype) -> Self {
        Self {
            rows,
            cols,
            bands,
            dtype: match dtype {
                Dtype::U16 => "u16".into(),
                Dtype::F32 => "f32".into(),
            },
            interleave: default_interleave(),
            byte_order: default_byte_order(),
        }
    }

    pub fn dtype(&self) -> Result<Dtype> {
        match self.dtype.to_ascii_lowercase().as_str() {
            "u16" => Ok(Dtype::U16),
            "f32" => Ok(Dtype::F32),
            _ => Err(Error::UnknownDtype(self.dtype.clone())),
        }
    }

    pub fn validate(&self) -> Result<Dtype> {
        let dtype = self.dtype()?;
        if !self.interleave.eq_ignore_ascii_case("bsq") {
            return Err(Error::Data(format!(
                "unsupported interleave `{}`; only band-sequential (bsq) is read",
                self.interleave
            )));
        }
        if !self.byte_order.eq_ignore_ascii_case("little") {
            return Err(Error::Data(format!(
                "unsupported byte order `{}`; only little-endian is read",
                self.byte_order
            )));
        }
        if self.rows == 0 || self.cols == 0 || self.bands == 0 {
            return Err(Error::Data(format!(
                "header declares an empty cube {}x{}x{}",
                self.bands, self.rows, self.cols
            )));
        }
        Ok(dtype)
    }

    pub fn expected_bytes(&self) -> Result<u64> {
        let dtype = self.dtype()?;
        Ok((self.rows * self.cols * self.bands * dtype.size()) as u64)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("{}: malformed header: {e}", path.display())))
    }
}

/// `foo.hdr.json` -> `foo.raw`.
pub fn raw_path_for(header: &Path) -> PathBuf {
    let name = header
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name
        .strip_suffix(".hdr.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(&name);
    header.with_file_name(format!("{stem}.raw"))
}

pub fn load_cube(header_path: &Path, raw_path: &Path) -> Result<HyperCube> {
    let header = CubeHeader::read(header_path)?;
    let dtype = header.validate()?;
    let expected = header.expected_bytes()?;
    let actual = fs::metadata(raw_path)
        .map_err(|e| Error::io(raw_path, e))?
        .len();
    if actual != expected {
        return Err(Error::SizeMismatch {
            path: raw_path.to_path_buf(),
            expected,
            actual,
        });
    }
    let bytes = fs::read(raw_path).map_err(|e| Error::io(raw_path, e))?;
    if bytes.len() as u64 != expected {
        return Err(Error::SizeMismatch {
            path: raw_path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let values: Vec<f64> = match dtype {
        Dtype::U16 => bytes
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_le_bytes([c[0], c[1]])))
            .collect(),
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
    };
    let cube = HyperCube::new(header.bands, header.rows, header.cols, values)?;
    cube.check_finite()?;
    Ok(cube)
}

/// Writes `cube` as band-sequential little-endian data. `f32` output is
/// lossless only for values representable in single precision; `u16`
/// output requires integral values in range.
pub fn write_cube(
    cube: &HyperCube,
    header_path: &Path,
    raw_path: &Path,
    dtype: Dtype,
) -> Result<()> {
    let mut bytes = Vec::with_capacity(cube.values().len() * dtype.size());
    for &v in cube.values() {
        match dtype {
            Dtype::F32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::U16 => {
                if v.fract() != 0.0 || !(0.0..=f64::from(u16::MAX)).contains(&v) {
                    return Err(Error::Data(format!("value {v} does not fit u16")));
                }
                bytes.extend_from_slice(&(v as u16).to_le_bytes());
            }
        }
    }
    let header = CubeHeader::new(cube.rows(), cube.cols(), cube.bands(), dtype);
    let json = serde_json::to_string_pretty(&header).expect("header serializes");
    fs::write(header_path, json + "\n").map_err(|e| Error::io(header_path, e))?;
    fs::write(raw_path, bytes).map_err(|e| Error::io(raw_path, e))
}

/// Reads a ground-truth grid of `rows x cols`. Files ending in `.csv` are
/// parsed as comma-separated integers, one raster row per line; anything
/// else as row-major little-endian `u16`.
pub fn load_gt(path: &Path, rows: usize, cols: usize) -> Result<GroundTruth> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let labels = if is_csv {
        read_csv_grid(path, rows, cols)?
    } else {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let expected = (rows * cols * 2) as u64;
        if bytes.len() as u64 != expected {
            return Err(Error::SizeMismatch {
                path: path.to_path_buf(),
                expected,
                actual: bytes.len() as u64,
            });
        }
        bytes
            .chunks_exact(2)
            .map(|c| u32::from(u16::from_le_bytes([c[0], c[1]])))
            .collect()
    };
    let gt = GroundTruth::new(rows, cols, labels)?;
    gt.validate()?;
    Ok(gt)
}

fn read_csv_grid(path: &Path, rows: usize, cols: usize) -> Result<Vec<u32>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() != rows {
        return Err(Error::Geometry(format!(
            "{}: expected {rows} rows, found {}",
            path.display(),
            lines.len()
        )));
    }
    let mut labels = Vec::with_capacity(rows * cols);
    for (r, line) in lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != cols {
            return Err(Error::Geometry(format!(
                "{}: row {r} has {} columns, expected {cols}",
                path.display(),
                cells.len()
            )));
        }
        for cell in cells {
            let v: i64 = cell.parse().map_err(|_| {
                Error::Data(format!(
                    "{}: row {r}: `{cell}` is not an integer",
                    path.display()
                ))
            })?;
            if v < 0 {
                return Err(Error::Data(format!(
                    "{}: row {r}: negative label {v}",
                    path.display()
                )));
            }
            let v = u32::try_from(v).map_err(|_| {
                Error::Data(format!("{}: row {r}: label {v} too large", path.display()))
            })?;
            labels.push(v);
        }
    }
    Ok(labels)
}

pub fn write_gt_raw(gt: &GroundTruth, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(gt.labels().len() * 2);
    for &l in gt.labels() {
        let l = u16::try_from(l).map_err(|_| Error::Data(format!("label {l} does not fit u16")))?;
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f32_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cube =
            HyperCube::new(2, 2, 3, (0..12).map(|i| (i as f32 * 0.37) as f64).collect()).unwrap();
        let (h, r) = (dir.path().join("c.hdr.json"), dir.path().join("c.raw"));
        write_cube(&cube, &h, &r, Dtype::F32).unwrap();
        let back = load_cube(&h, &r).unwrap();
        assert_eq!(back, cube);
        assert_eq!(raw_path_for(&h), r);
    }

    #[test]
    fn u16_cube_widens() {
        let dir = tempfile::tempdir().unwrap();
        let cube = HyperCube::new(1, 1, 3, vec![0.0, 1.0, 65535.0]).unwrap();
        let (h, r) = (dir.path().join("u.hdr.json"), dir.path().join("u.raw"));
        write_cube(&cube, &h, &r, Dtype::U16).unwrap();
        assert_eq!(load_cube(&h, &r).unwrap(), cube);
        let bad = HyperCube::new(1, 1, 1, vec![0.5]).unwrap();
        assert!(write_cube(&bad, &h, &r, Dtype::U16).is_err());
    }

    #[test]
    fn truncated_raw_reports_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let cube = HyperCube::new(2, 2, 2, vec![1.0; 8]).unwrap();
        let (h, r) = (dir.path().join("t.hdr.json"), dir.path().join("t.raw"));
        write_cube(&cube, &h, &r, Dtype::F32).unwrap();
        let bytes = fs::read(&r).unwrap();
        fs::write(&r, &bytes[..bytes.len() - 3]).unwrap();
        match load_cube(&h, &r) {
            Err(Error::SizeMismatch {
                expected, actual, ..
            }) => assert_eq!((expected, actual), (32, 29)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_errors() {
        let dir = tempfile::tempdir().unwrap();
        let h = dir.path().join("x.hdr.json");
        let r = dir.path().join("x.raw");
        fs::write(&r, [0u8; 8]).unwrap();
        fs::write(&h, r#"{"rows":1,"cols":1,"bands":1,"dtype":"f64"}"#).unwrap();
        assert!(matches!(load_cube(&h, &r), Err(Error::UnknownDtype(_))));
        fs::write(
            &h,
            r#"{"rows":1,"cols":2,"bands":1,"dtype":"f32","interleave":"bil"}"#,
        )
        .unwrap();
        assert!(matches!(load_cube(&h, &r), Err(Error::Data(_))));
        fs::write(&h, "not json").unwrap();
        assert!(matches!(load_cube(&h, &r), Err(Error::Data(_))));
    }

    #[test]
    fn non_finite_values_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (h, r) = (dir.path().join("n.hdr.json"), dir.path().join("n.raw"));
        let cube = HyperCube::new(2, 1, 1, vec![0.0, f64::NAN]).unwrap();
        write_cube(&cube, &h, &r, Dtype::F32).unwrap();
        assert!(matches!(
            load_cube(&h, &r),
            Err(Error::NonFinite { band: 1 })
        ));
    }

    #[test]
    fn gt_raw_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let gt = GroundTruth::new(2, 3, vec![0, 1, 2, 2, 0, 16]).unwrap();
        let raw = dir.path().join("g.gt.raw");
        write_gt_raw(&gt, &raw).unwrap();
        assert_eq!(load_gt(&raw, 2, 3).unwrap(), gt);
        assert!(matches!(
            load_gt(&raw, 3, 3),
            Err(Error::SizeMismatch { .. })
        ));

        let csv = dir.path().join("g.csv");
        fs::write(&csv, "0,1,2\n2, 0 ,16\n").unwrap();
        assert_eq!(load_gt(&csv, 2, 3).unwrap(), gt);
        assert!(matches!(load_gt(&csv, 2, 4), Err(Error::Geometry(_))));
        assert!(matches!(load_gt(&csv, 3, 3), Err(Error::Geometry(_))));
        fs::write(&csv, "0,-1,2\n2,0,16\n").unwrap();
        assert!(matches!(load_gt(&csv, 2, 3), Err(Error::Data(_))));
        fs::write(&csv, "0,0,0\n0,0,0\n").unwrap();
        assert!(matches!(load_gt(&csv, 2, 3), Err(Error::NoLabeledPixels)));
    }
}
