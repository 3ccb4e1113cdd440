use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square count matrix; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<u32>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(classes: Vec<u32>, counts: Vec<u64>) -> Result<Self> {
        let c = classes.len();
        if c == 0 {
            return Err(Error::Empty("class list"));
        }
        if counts.len() != c * c {
            return Err(Error::LengthMismatch {
                left: counts.len(),
                right: c * c,
            });
        }
        Ok(Self { classes, counts })
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes.len() + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        let c = self.classes.len();
        self.counts[i * c..(i + 1) * c].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.classes.len()).map(|i| self.get(i, j)).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.get(i, i)).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let c = self.classes.len();
        (0..c).all(|i| (0..c).all(|j| i == j || self.get(i, j) == 0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    /// Producer's accuracy per class (diagonal over row sum); `None` when the
    /// class has no test pixels.
    pub per_class: Vec<Option<f64>>,
    pub overall_accuracy: f64,
    pub kappa: f64,
    pub expected_agreement: f64,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self> {
        let total = confusion.total();
        if total == 0 {
            return Err(Error::Empty("confusion matrix"));
        }
        let n = confusion.classes().len();
        let per_class = (0..n)
            .map(|i| {
                let row = confusion.row_sum(i);
                (row > 0).then(|| confusion.get(i, i) as f64 / row as f64)
            })
            .collect();
        // Integer numerator and denominator keep kappa correctly rounded:
        // kappa = (t * trace - sum r_i c_i) / (t^2 - sum r_i c_i)
        let t = u128::from(total);
        let chance: u128 = (0..n)
            .map(|i| u128::from(confusion.row_sum(i)) * u128::from(confusion.col_sum(i)))
            .sum();
        let trace = u128::from(confusion.trace());
        let p_o = trace as f64 / t as f64;
        let p_e = chance as f64 / (t * t) as f64;
        // chance == t^2 only when every pixel is one class, predicted as such
        let kappa = if chance == t * t {
            1.0
        } else {
            ((t * trace) as i128 - chance as i128) as f64 / (t * t - chance) as f64
        };
        Ok(Self {
            confusion,
            per_class,
            overall_accuracy: p_o,
            kappa,
            expected_agreement: p_e,
        })
    }
}

/// Confusion matrix and summary accuracy over the union of observed labels.
pub fn evaluate(predicted: &[u32], truth: &[u32]) -> Result<EvalReport> {
    let mut classes: Vec<u32> = truth.iter().chain(predicted).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    evaluate_with_classes(predicted, truth, &classes)
}

/// Like [`evaluate`] with a fixed class list, so classes missing from the
/// test set still get a (undefined) row.
pub fn evaluate_with_classes(
    predicted: &[u32],
    truth: &[u32],
    classes: &[u32],
) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("label series"));
    }
    let c = classes.len();
    let index = |l: u32| {
        classes
            .iter()
            .position(|&x| x == l)
            .ok_or_else(|| Error::InvalidParameter(format!("label {l} not in class list")))
    };
    let mut counts = vec![0u64; c * c];
    for (&p, &t) in predicted.iter().zip(truth) {
        counts[index(t)? * c + index(p)?] += 1;
    }
    EvalReport::from_confusion(ConfusionMatrix::from_counts(classes.to_vec(), counts)?)
}
