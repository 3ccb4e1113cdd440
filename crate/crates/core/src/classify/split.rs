use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datamodel::GroundTruth;
use crate::error::{Error, Result};

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Train,
    Test,
}

/// Train/test assignment of every labeled pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_fraction: f64,
    assignment: Vec<Option<Role>>,
}

impl SplitPlan {
    pub fn role(&self, pixel: usize) -> Option<Role> {
        self.assignment.get(pixel).copied().flatten()
    }

    /// Training pixels in row-major order.
    pub fn train(&self) -> Vec<usize> {
        self.pixels_with(Role::Train)
    }

    /// Test pixels in row-major order.
    pub fn test(&self) -> Vec<usize> {
        self.pixels_with(Role::Test)
    }

    fn pixels_with(&self, role: Role) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, r)| **r == Some(role))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Per class: shuffle the class's pixels with a seeded ChaCha stream (classes
/// visited in ascending id order) and send the first
/// `floor(fraction * n)` to training, the rest to test.
pub fn stratified_split(gt: &GroundTruth, fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let classes = gt.classes();
    if classes.is_empty() {
        return Err(Error::NoLabeledPixels);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (px, &l) in gt.labels().iter().enumerate() {
        if l != 0 {
            let c = classes.binary_search(&l).expect("label drawn from classes");
            members[c].push(px);
        }
    }
    if let Some((c, m)) = classes.iter().zip(&members).find(|(_, m)| m.len() < 2) {
        return Err(Error::ClassTooSmall {
            class: *c,
            count: m.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![None; gt.labels().len()];
    for mut pixels in members {
        pixels.shuffle(&mut rng);
        let n_train = (fraction * pixels.len() as f64).floor() as usize;
        for (i, px) in pixels.into_iter().enumerate() {
            assignment[px] = Some(if i < n_train { Role::Train } else { Role::Test });
        }
    }
    Ok(SplitPlan {
        seed,
        train_fraction: fraction,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt_with_counts(counts: &[usize]) -> GroundTruth {
        let mut labels = vec![0u32];
        for (c, &n) in counts.iter().enumerate() {
            labels.extend(std::iter::repeat_n(c as u32 + 1, n));
        }
        let n = labels.len();
        GroundTruth::new(1, n, labels).unwrap()
    }

    fn per_class(plan: &SplitPlan, gt: &GroundTruth, class: u32) -> (usize, usize) {
        let count = |px: Vec<usize>| px.into_iter().filter(|&p| gt.labels()[p] == class).count();
        (count(plan.train()), count(plan.test()))
    }

    #[test]
    fn floor_rule_per_class() {
        let gt = gt_with_counts(&[46, 5, 2]);
        let plan = stratified_split(&gt, 0.5, 7).unwrap();
        assert_eq!(per_class(&plan, &gt, 1), (23, 23));
        assert_eq!(per_class(&plan, &gt, 2), (2, 3));
        assert_eq!(per_class(&plan, &gt, 3), (1, 1));
        assert_eq!(plan.role(0), None);
    }

    #[test]
    fn deterministic_per_seed() {
        let gt = gt_with_counts(&[30, 17, 9]);
        let a = stratified_split(&gt, 0.5, 42).unwrap();
        let b = stratified_split(&gt, 0.5, 42).unwrap();
        assert_eq!(a, b);
        let c = stratified_split(&gt, 0.5, 43).unwrap();
        assert_ne!(a.train(), c.train());
    }

    #[test]
    fn rejects_tiny_class_by_name() {
        let gt = gt_with_counts(&[4, 1]);
        match stratified_split(&gt, 0.5, 1) {
            Err(Error::ClassTooSmall { class, count }) => {
                assert_eq!((class, count), (2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_fraction() {
        let gt = gt_with_counts(&[4, 4]);
        for f in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(stratified_split(&gt, f, 1).is_err());
        }
    }
}
