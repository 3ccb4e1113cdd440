//! Plug-in (histogram) estimators of entropy, mutual information and
//! three-way interaction information. All quantities are in bits.

use crate::datamodel::DiscreteSeries;
use crate::error::{Error, Result};

/// Co-occurrence counts of one to three discrete series.
///
/// Cells are stored row-major: for dims `[a, b, c]` the cell `(i, j, k)`
/// sits at `(i * b + j) * c + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHistogram {
    dims: Vec<usize>,
    counts: Vec<u64>,
    total: u64,
}

impl JointHistogram {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, index: &[usize]) -> u64 {
        assert_eq!(index.len(), self.dims.len(), "index arity");
        let flat = index.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "index out of range");
            acc * d + i
        });
        self.counts[flat]
    }

    /// Sums out `axis`, returning a histogram of one lower arity.
    pub fn marginalize(&self, axis: usize) -> Result<JointHistogram> {
        if self.dims.len() < 2 {
            return Err(Error::InvalidParameter(
                "cannot marginalize a one-dimensional histogram".into(),
            ));
        }
        if axis >= self.dims.len() {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for a {}-d histogram",
                self.dims.len()
            )));
        }
        let outer: usize = self.dims[..axis].iter().product();
        let width = self.dims[axis];
        let inner: usize = self.dims[axis + 1..].iter().product();
        let mut counts = vec![0u64; outer * inner];
        for o in 0..outer {
            for w in 0..width {
                let src = (o * width + w) * inner;
                let dst = o * inner;
                for i in 0..inner {
                    counts[dst + i] += self.counts[src + i];
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(axis);
        Ok(JointHistogram {
            dims,
            counts,
            total: self.total,
        })
    }
}

/// Counts co-occurrences of 1 to 3 equal-length series.
pub fn joint_histogram(series: &[&DiscreteSeries]) -> Result<JointHistogram> {
    if series.is_empty() || series.len() > 3 {
        return Err(Error::InvalidParameter(format!(
            "joint histogram takes 1 to 3 series, got {}",
            series.len()
        )));
    }
    let n = series[0].len();
    if n == 0 {
        return Err(Error::Empty("series"));
    }
    for s in &series[1..] {
        if s.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: s.len(),
            });
        }
    }
    let dims: Vec<usize> = series.iter().map(|s| s.alphabet()).collect();
    let cells: usize = dims.iter().product();
    let mut counts = vec![0u64; cells];
    match series {
        [a] => {
            for &x in a.symbols() {
                counts[x as usize] += 1;
            }
        }
        [a, b] => {
            let nb = dims[1];
            for (&x, &y) in a.symbols().iter().zip(b.symbols()) {
                counts[x as usize * nb + y as usize] += 1;
            }
        }
        [a, b, c] => {
            let (nb, nc) = (dims[1], dims[2]);
            for ((&x, &y), &z) in a.symbols().iter().zip(b.symbols()).zip(c.symbols()) {
                counts[(x as usize * nb + y as usize) * nc + z as usize] += 1;
            }
        }
        _ => unreachable!(),
    }
    Ok(JointHistogram {
        dims,
        counts,
        total: n as u64,
    })
}

/// Shannon entropy of the (joint) distribution, `-sum p log2 p` over
/// nonzero cells.
pub fn entropy(h: &JointHistogram) -> f64 {
    let total = h.total as f64;
    -h.counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>()
}

pub fn series_entropy(x: &DiscreteSeries) -> f64 {
    entropy(&joint_histogram(&[x]).expect("single nonempty series"))
}

/// Joint entropy of 1 to 3 series.
pub fn joint_entropy(series: &[&DiscreteSeries]) -> Result<f64> {
    joint_histogram(series).map(|h| entropy(&h))
}

/// Encodes the pair `(y, z)` as the single symbol `y * |Z| + z`.
pub fn pair(y: &DiscreteSeries, z: &DiscreteSeries) -> Result<DiscreteSeries> {
    if y.len() != z.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: z.len(),
        });
    }
    let width = z.alphabet();
    let alphabet = y
        .alphabet()
        .checked_mul(width)
        .ok_or_else(|| Error::InvalidParameter("paired alphabet overflows".into()))?;
    let symbols = y
        .symbols()
        .iter()
        .zip(z.symbols())
        .map(|(&a, &b)| a * width as u32 + b)
        .collect();
    DiscreteSeries::new(symbols, alphabet)
}

/// `I(X;Y) = H(X) + H(Y) - H(X,Y)`.
pub fn mutual_information(x: &DiscreteSeries, y: &DiscreteSeries) -> Result<f64> {
    let joint = joint_histogram(&[x, y])?;
    let hx = entropy(&joint.marginalize(1)?);
    let hy = entropy(&joint.marginalize(0)?);
    Ok(hx + hy - entropy(&joint))
}

/// `I(X;(Y,Z))` with `(Y,Z)` treated as one paired variable.
pub fn mutual_information_with_pair(
    x: &DiscreteSeries,
    y: &DiscreteSeries,
    z: &DiscreteSeries,
) -> Result<f64> {
    mutual_information(x, &pair(y, z)?)
}

/// Three-way interaction information
/// `I(A;B;C) = I((A,B);C) - I(A;C) - I(B;C)`.
///
/// Positive values mean synergy, negative values redundancy. The result is
/// symmetric in its three arguments; it is evaluated from one joint
/// histogram as `H(AB) + H(AC) + H(BC) - H(A) - H(B) - H(C) - H(ABC)`.
pub fn interaction_information(
    a: &DiscreteSeries,
    b: &DiscreteSeries,
    c: &DiscreteSeries,
) -> Result<f64> {
    let abc = joint_histogram(&[a, b, c])?;
    let ab = abc.marginalize(2)?;
    let ac = abc.marginalize(1)?;
    let bc = abc.marginalize(0)?;
    let ha = entropy(&ab.marginalize(1)?);
    let hb = entropy(&ab.marginalize(0)?);
    let hc = entropy(&ac.marginalize(0)?);
    Ok(entropy(&ab) + entropy(&ac) + entropy(&bc) - ha - hb - hc - entropy(&abc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(symbols: &[u32]) -> DiscreteSeries {
        DiscreteSeries::from_symbols(symbols.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn histogram_counts() {
        let h = joint_histogram(&[&s(&[0, 0, 1, 1])]).unwrap();
        assert_eq!(h.counts(), &[2, 2]);
        assert_eq!(h.total(), 4);

        let x = s(&[0, 0, 1, 1]);
        let h = joint_histogram(&[&x, &x]).unwrap();
        assert_eq!(h.counts(), &[2, 0, 0, 2]);

        let h = joint_histogram(&[&s(&[0, 0, 1, 1]), &s(&[0, 1, 0, 1])]).unwrap();
        assert_eq!(h.counts(), &[1, 1, 1, 1]);
    }

    #[test]
    fn histogram_errors() {
        let x = s(&[0, 1, 1]);
        let y = s(&[0, 1]);
        assert!(matches!(
            joint_histogram(&[&x, &y]),
            Err(Error::LengthMismatch { left: 3, right: 2 })
        ));
        assert!(joint_histogram(&[]).is_err());
        assert!(joint_histogram(&[&x, &x, &x, &x]).is_err());
    }

    #[test]
    fn marginals_keep_total() {
        let a = s(&[0, 1, 2, 1, 0]);
        let b = s(&[1, 1, 0, 0, 1]);
        let c = s(&[3, 0, 2, 2, 1]);
        let h = joint_histogram(&[&a, &b, &c]).unwrap();
        for axis in 0..3 {
            let m = h.marginalize(axis).unwrap();
            assert_eq!(m.total(), 5);
            assert_eq!(m.counts().iter().sum::<u64>(), 5);
        }
        assert_eq!(
            h.marginalize(2).unwrap(),
            joint_histogram(&[&a, &b]).unwrap()
        );
        assert_eq!(
            h.marginalize(1).unwrap(),
            joint_histogram(&[&a, &c]).unwrap()
        );
        assert_eq!(
            h.marginalize(0).unwrap(),
            joint_histogram(&[&b, &c]).unwrap()
        );
        assert!(joint_histogram(&[&a]).unwrap().marginalize(0).is_err());
    }

    #[test]
    fn entropy_fixtures() {
        assert!(close(series_entropy(&s(&[0, 1, 0, 1])), 1.0));
        assert!(close(series_entropy(&s(&[3, 3, 3])), 0.0));
        let uniform: Vec<u32> = (0..16).collect();
        assert!(close(series_entropy(&s(&uniform)), 4.0));
    }

    #[test]
    fn mutual_information_fixtures() {
        let x = s(&[0, 1, 0, 1]);
        assert!(close(mutual_information(&x, &x).unwrap(), 1.0));
        let a = s(&[0, 0, 1, 1]);
        let b = s(&[0, 1, 0, 1]);
        assert!(close(mutual_information(&a, &b).unwrap(), 0.0));
        // counts [3,1;1,3] over 8 samples
        let x = s(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let y = s(&[0, 0, 0, 1, 0, 1, 1, 1]);
        let mi = mutual_information(&x, &y).unwrap();
        assert!((mi - 0.188_721_875_540_867).abs() < 1e-12, "{mi}");
    }

    #[test]
    fn interaction_fixtures() {
        let a = s(&[0, 0, 1, 1]);
        let b = s(&[0, 1, 0, 1]);
        let c = s(&[0, 1, 1, 0]);
        assert!(close(interaction_information(&a, &b, &c).unwrap(), 1.0));
        let x = s(&[0, 1, 0, 1]);
        assert!(close(interaction_information(&x, &x, &x).unwrap(), -1.0));
        // full product sample of three bits
        let a = s(&[0, 0, 0, 0, 1, 1, 1, 1]);
        let b = s(&[0, 0, 1, 1, 0, 0, 1, 1]);
        let c = s(&[0, 1, 0, 1, 0, 1, 0, 1]);
        assert!(close(interaction_information(&a, &b, &c).unwrap(), 0.0));
    }

    #[test]
    fn pair_encoding() {
        let y = DiscreteSeries::new(vec![0, 1, 2], 3).unwrap();
        let z = DiscreteSeries::new(vec![1, 0, 1], 2).unwrap();
        let p = pair(&y, &z).unwrap();
        assert_eq!(p.symbols(), &[1, 2, 5]);
        assert_eq!(p.alphabet(), 6);
    }

    fn series_pair(max_len: usize) -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<u32>)> {
        (1usize..=max_len, 1u32..=4, 1u32..=4, 1u32..=4).prop_flat_map(|(n, a, b, c)| {
            (
                prop::collection::vec(0..a, n),
                prop::collection::vec(0..b, n),
                prop::collection::vec(0..c, n),
            )
        })
    }

    proptest! {
        #[test]
        fn entropy_bounded((x, _, _) in series_pair(64)) {
            let x = s(&x);
            let h = series_entropy(&x);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (x.alphabet() as f64).log2() + 1e-12);
        }

        #[test]
        fn mi_properties((x, y, _) in series_pair(64)) {
            let (x, y) = (s(&x), s(&y));
            let xy = mutual_information(&x, &y).unwrap();
            let yx = mutual_information(&y, &x).unwrap();
            prop_assert!((xy - yx).abs() < 1e-9);
            prop_assert!(xy > -1e-9);
            prop_assert!((mutual_information(&x, &x).unwrap() - series_entropy(&x)).abs() < 1e-9);
        }

        #[test]
        fn grouping_identity((a, b, c) in series_pair(64)) {
            let (a, b, c) = (s(&a), s(&b), s(&c));
            let direct = mutual_information_with_pair(&a, &b, &c).unwrap();
            let via_entropies = series_entropy(&a) + joint_entropy(&[&b, &c]).unwrap()
                - joint_entropy(&[&a, &b, &c]).unwrap();
            prop_assert!((direct - via_entropies).abs() < 1e-9);
        }

        #[test]
        fn interaction_matches_definition((a, b, c) in series_pair(64)) {
            let (a, b, c) = (s(&a), s(&b), s(&c));
            let ii = interaction_information(&a, &b, &c).unwrap();
            let def = mutual_information(&pair(&a, &b).unwrap(), &c).unwrap()
                - mutual_information(&a, &c).unwrap()
                - mutual_information(&b, &c).unwrap();
            prop_assert!((ii - def).abs() < 1e-9);
        }
    }
}
