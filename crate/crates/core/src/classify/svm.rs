//! One-vs-one soft-margin RBF SVM trained by sequential minimal optimization.
//!
//! The binary solver follows the second-order working-set selection of Fan,
//! Chen and Lin (2005), as used by LIBSVM, without shrinking. Each class pair
//! is an independent problem; pairs are trained in parallel and collected in
//! a fixed order, so the model never depends on scheduling.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_C: f64 = 100.0;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 128 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / d` for `d` input features.
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            gamma: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SvmParams {
    pub fn gamma_for(&self, dims: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dims as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if let Some(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "gamma must be positive, got {g}"
                )));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Decision function for one class pair: positive values vote for `first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub first: u32,
    pub second: u32,
    /// Indices into [`SvmModel::support_vectors`].
    pub support: Vec<usize>,
    /// Dual coefficient of each support vector, in `(0, C]`.
    pub alpha: Vec<f64>,
    /// `+1` for `first`, `-1` for `second`.
    pub sign: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

impl BinaryModel {
    fn decision(&self, kernel: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.alpha)
            .zip(&self.sign)
            .map(|((&s, &a), &y)| a * y * kernel[s])
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<u32>,
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    pub support_vectors: SupportVectors,
    pub pairs: Vec<BinaryModel>,
}

/// Serializable copy of the support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVectors {
    pub rows: usize,
    pub dims: usize,
    pub data: Vec<f64>,
}

impl SupportVectors {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }
}

impl SvmModel {
    pub fn dims(&self) -> usize {
        self.support_vectors.dims
    }

    /// Pairwise decision values of one sample, in `pairs` order.
    pub fn decision_values(&self, x: &[f64]) -> Vec<f64> {
        let kernel: Vec<f64> = (0..self.support_vectors.rows)
            .map(|i| rbf(self.support_vectors.row(i), x, self.gamma))
            .collect();
        self.pairs.iter().map(|p| p.decision(&kernel)).collect()
    }
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// Trains one binary SVM per class pair `(a, b)`, `a < b`.
pub fn train_svm(features: &FeatureMatrix, labels: &[u32], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if labels.len() != features.rows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: features.rows(),
        });
    }
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }
    let gamma = params.gamma_for(features.dims());

    let members: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    let pairs: Vec<(usize, usize)> = (0..classes.len())
        .flat_map(|a| (a + 1..classes.len()).map(move |b| (a, b)))
        .collect();

    let solved: Vec<(Vec<usize>, Solution)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let idx: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
            let y: Vec<f64> = members[a]
                .iter()
                .map(|_| 1.0)
                .chain(members[b].iter().map(|_| -1.0))
                .collect();
            let problem = Problem::new(features, &idx, y, gamma);
            solve(&problem, params.c, params.tol, params.max_iter)
                .map(|s| (idx, s))
                .map_err(|iterations| Error::NonConvergence {
                    first: classes[a],
                    second: classes[b],
                    iterations,
                })
        })
        .collect::<Result<_>>()?;

    // Shared support-vector store, ordered by training index.
    let mut sv_rows: Vec<usize> = solved
        .iter()
        .flat_map(|(idx, s)| {
            idx.iter()
                .zip(&s.alpha)
                .filter(|(_, &a)| a > 0.0)
                .map(|(&i, _)| i)
        })
        .collect();
    sv_rows.sort_unstable();
    sv_rows.dedup();
    let position: HashMap<usize, usize> =
        sv_rows.iter().enumerate().map(|(p, &r)| (r, p)).collect();
    let mut data = Vec::with_capacity(sv_rows.len() * features.dims());
    for &r in &sv_rows {
        data.extend_from_slice(features.row(r));
    }

    let pairs = pairs
        .iter()
        .zip(solved)
        .map(|(&(a, b), (idx, sol))| {
            let mut support = Vec::new();
            let mut alpha = Vec::new();
            let mut sign = Vec::new();
            for (k, &i) in idx.iter().enumerate() {
                if sol.alpha[k] > 0.0 {
                    support.push(position[&i]);
                    alpha.push(sol.alpha[k]);
                    sign.push(if labels[i] == classes[a] { 1.0 } else { -1.0 });
                }
            }
            BinaryModel {
                first: classes[a],
                second: classes[b],
                support,
                alpha,
                sign,
                rho: sol.rho,
                iterations: sol.iterations,
            }
        })
        .collect();

    Ok(SvmModel {
        classes,
        c: params.c,
        gamma,
        tol: params.tol,
        support_vectors: SupportVectors {
            rows: sv_rows.len(),
            dims: features.dims(),
            data,
        },
        pairs,
    })
}

/// One-vs-one majority vote; ties go to the lowest class id.
pub fn predict(model: &SvmModel, features: &FeatureMatrix) -> Result<Vec<u32>> {
    if features.dims() != model.dims() {
        return Err(Error::LengthMismatch {
            left: features.dims(),
            right: model.dims(),
        });
    }
    let class_pos: HashMap<u32, usize> = model
        .classes
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    Ok((0..features.rows())
        .into_par_iter()
        .map(|r| {
            let dec = model.decision_values(features.row(r));
            let mut votes = vec![0usize; model.classes.len()];
            for (p, d) in model.pairs.iter().zip(dec) {
                let winner = if d > 0.0 { p.first } else { p.second };
                votes[class_pos[&winner]] += 1;
            }
            let mut best = 0;
            for (i, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = i;
                }
            }
            model.classes[best]
        })
        .collect())
}

struct Problem<'a> {
    x: &'a FeatureMatrix,
    idx: &'a [usize],
    y: Vec<f64>,
    gamma: f64,
}

impl<'a> Problem<'a> {
    fn new(x: &'a FeatureMatrix, idx: &'a [usize], y: Vec<f64>, gamma: f64) -> Self {
        Self { x, idx, y, gamma }
    }

    fn len(&self) -> usize {
        self.idx.len()
    }

    fn kernel_row(&self, i: usize) -> Vec<f64> {
        let xi = self.x.row(self.idx[i]);
        self.idx
            .iter()
            .map(|&t| rbf(xi, self.x.row(t), self.gamma))
            .collect()
    }
}

/// Bounded cache of kernel rows with least-recently-used eviction.
struct KernelCache {
    rows: Vec<Option<(Vec<f64>, u64)>>,
    cached: Vec<usize>,
    capacity: usize,
    clock: u64,
}

impl KernelCache {
    fn new(n: usize) -> Self {
        let capacity = (CACHE_BYTES / (n.max(1) * std::mem::size_of::<f64>())).max(2);
        Self {
            rows: vec![None; n],
            cached: Vec::new(),
            capacity,
            clock: 0,
        }
    }

    fn ensure(&mut self, problem: &Problem<'_>, i: usize) {
        self.clock += 1;
        if let Some((_, stamp)) = self.rows[i].as_mut() {
            *stamp = self.clock;
            return;
        }
        if self.cached.len() >= self.capacity {
            let (pos, _) = self
                .cached
                .iter()
                .enumerate()
                .min_by_key(|(_, &r)| self.rows[r].as_ref().map_or(0, |(_, s)| *s))
                .expect("cache is full");
            let evicted = self.cached.swap_remove(pos);
            self.rows[evicted] = None;
        }
        self.rows[i] = Some((problem.kernel_row(i), self.clock));
        self.cached.push(i);
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i].as_ref().expect("row ensured").0
    }
}

struct Solution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
}

/// Minimizes `1/2 a'Qa - e'a` s.t. `0 <= a <= C`, `y'a = 0`, with
/// `Q_ij = y_i y_j K(x_i, x_j)`. Returns the iteration count on failure.
fn solve(
    problem: &Problem<'_>,
    c: f64,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<Solution, usize> {
    solve_with_cache(problem, c, tol, max_iter, KernelCache::new(problem.len()))
}

fn solve_with_cache(
    problem: &Problem<'_>,
    c: f64,
    tol: f64,
    max_iter: usize,
    mut cache: KernelCache,
) -> std::result::Result<Solution, usize> {
    let n = problem.len();
    let y = &problem.y;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    // RBF: K(x, x) = 1
    let qd = 1.0;
    let mut iterations = 0;

    loop {
        // Working set: i maximizes -y_t G_t over I_up, j minimizes the
        // second-order objective decrease over I_low.
        let mut gmax = f64::NEG_INFINITY;
        let mut gmax_idx = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if alpha[t] < c && -grad[t] >= gmax {
                    gmax = -grad[t];
                    gmax_idx = Some(t);
                }
            } else if alpha[t] > 0.0 && grad[t] >= gmax {
                gmax = grad[t];
                gmax_idx = Some(t);
            }
        }
        let Some(i) = gmax_idx else { break };
        cache.ensure(problem, i);
        let ki = cache.row(i);

        let mut gmax2 = f64::NEG_INFINITY;
        let mut gmin_idx = None;
        let mut obj_min = f64::INFINITY;
        for t in 0..n {
            let grad_diff = if y[t] > 0.0 {
                if alpha[t] <= 0.0 {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                gmax + grad[t]
            } else {
                if alpha[t] >= c {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                gmax - grad[t]
            };
            if grad_diff > 0.0 {
                let quad = qd + qd - 2.0 * ki[t];
                let obj = -(grad_diff * grad_diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= obj_min {
                    obj_min = obj;
                    gmin_idx = Some(t);
                }
            }
        }
        let j = match gmin_idx {
            Some(j) if gmax + gmax2 >= tol => j,
            _ => break,
        };
        if iterations >= max_iter {
            return Err(iterations);
        }
        iterations += 1;

        let kij = ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = {
            let q = qd + qd - 2.0 * kij;
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        cache.ensure(problem, j);
        cache.ensure(problem, i);
        let (ki, kj) = (cache.row(i), cache.row(j));
        for t in 0..n {
            // Q_it = y_i y_t K_it
            grad[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(Solution {
        alpha,
        rho,
        iterations,
    })
}
