use rayon::prelude::*;

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// 1-nearest-neighbour labels under Euclidean distance. Equidistant
/// neighbours resolve to the lowest training index.
pub fn knn_predict(
    train: &FeatureMatrix,
    labels: &[u32],
    test: &FeatureMatrix,
) -> Result<Vec<u32>> {
    if train.rows() == 0 {
        return Err(Error::Empty("training set"));
    }
    if labels.len() != train.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: train.rows(),
        });
    }
    if train.dims() != test.dims() {
        return Err(Error::LengthMismatch {
            left: test.dims(),
            right: train.dims(),
        });
    }
    Ok((0..test.rows())
        .into_par_iter()
        .map(|t| {
            let x = test.row(t);
            let mut best = (f64::INFINITY, 0usize);
            for i in 0..train.rows() {
                let d: f64 = train
                    .row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best.0 {
                    best = (d, i);
                }
            }
            labels[best.1]
        })
        .collect())
}
