//! Greedy forward band selection.
//!
//! Five criteria share one driver: MIM (relevance ranking), MIFS
//! (beta-penalized redundancy), MRMR (mean redundancy), MIBF (threshold-gated
//! estimated ground truth) and IGBS (relevance plus normalized interaction
//! information with the estimated ground truth).
//!
//! Ties are broken towards the lowest band index. Two scores closer than
//! [`TIE_TOLERANCE`] bits count as tied, so results do not depend on
//! summation-order rounding.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{DiscreteSeries, GroundTruth, LabeledData, QuantizedCube};
use crate::error::{Error, Result};
use crate::infotheory::{interaction_information, mutual_information};

pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_THRESHOLD: f64 = -0.02;
pub const DEFAULT_LAMBDA: f64 = 1.0;

/// Scores within this many bits of each other are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Mim,
    Mibf,
    Mifs,
    Mrmr,
    Igbs,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Mim,
        Method::Mibf,
        Method::Mifs,
        Method::Mrmr,
        Method::Igbs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mim => "MIM",
            Method::Mibf => "MIBF",
            Method::Mifs => "MIFS",
            Method::Mrmr => "MRMR",
            Method::Igbs => "IGBS",
        }
    }

    fn tracks_redundancy(self) -> bool {
        matches!(self, Method::Mifs | Method::Mrmr)
    }

    fn tracks_estimate(self) -> bool {
        matches!(self, Method::Mibf | Method::Igbs)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionParams {
    /// MIFS redundancy weight.
    pub beta: f64,
    /// MIBF acceptance threshold, in bits.
    pub threshold: f64,
    /// IGBS weight on the interaction term.
    pub lambda: f64,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            threshold: DEFAULT_THRESHOLD,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and nonnegative, got {}",
                self.beta
            )));
        }
        if !self.threshold.is_finite() {
            return Err(Error::InvalidParameter("threshold must be finite".into()));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("lambda must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub params: SelectionParams,
    pub levels: usize,
    pub k: usize,
    /// Accepted bands in acceptance order.
    pub selected: Vec<usize>,
    /// Score of each accepted band at the step it was accepted.
    pub step_scores: Vec<f64>,
}

/// Working state of one greedy run.
#[derive(Debug, Clone)]
pub struct SelectionState<'a> {
    data: &'a LabeledData,
    selected: Vec<usize>,
    remaining: Vec<usize>,
    relevance: Vec<f64>,
    redundancy: Option<Vec<f64>>,
    estimated_gt: Option<DiscreteSeries>,
    track_estimate: bool,
}

impl<'a> SelectionState<'a> {
    /// Empty state over all bands. `relevance` must hold one score per band.
    pub fn new(data: &'a LabeledData, relevance: Vec<f64>, method: Method) -> Self {
        assert_eq!(relevance.len(), data.band_count(), "one relevance per band");
        Self {
            data,
            selected: Vec::new(),
            remaining: (0..data.band_count()).collect(),
            redundancy: method
                .tracks_redundancy()
                .then(|| vec![0.0; data.band_count()]),
            relevance,
            estimated_gt: None,
            track_estimate: method.tracks_estimate(),
        }
    }

    pub fn data(&self) -> &'a LabeledData {
        self.data
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn remaining(&self) -> &[usize] {
        &self.remaining
    }

    pub fn relevance(&self) -> &[f64] {
        &self.relevance
    }

    pub fn estimated_gt(&self) -> Option<&DiscreteSeries> {
        self.estimated_gt.as_ref()
    }

    /// Moves `band` from the remaining pool to the selected list and refreshes
    /// the cached redundancy sums and estimated ground truth.
    pub fn accept(&mut self, band: usize) -> Result<()> {
        let pos = self
            .remaining
            .iter()
            .position(|&b| b == band)
            .ok_or_else(|| Error::InvalidParameter(format!("band {band} is not a candidate")))?;
        self.remaining.remove(pos);
        self.selected.push(band);
        if let Some(redundancy) = self.redundancy.as_mut() {
            let data = self.data;
            let added = data.band(band);
            let updates: Vec<(usize, f64)> = self
                .remaining
                .par_iter()
                .map(|&b| (b, mi(data.band(b), added)))
                .collect();
            for (b, v) in updates {
                redundancy[b] += v;
            }
        }
        if self.track_estimate {
            self.estimated_gt = Some(estimated_gt(self.data, &self.selected)?);
        }
        Ok(())
    }

    /// `sum_{s in selected} I(candidate; s)`.
    pub fn redundancy_sum(&self, candidate: usize) -> f64 {
        match &self.redundancy {
            Some(cache) => cache[candidate],
            None => self
                .selected
                .iter()
                .map(|&s| mi(self.data.band(candidate), self.data.band(s)))
                .sum(),
        }
    }
}

fn mi(x: &DiscreteSeries, y: &DiscreteSeries) -> f64 {
    mutual_information(x, y).expect("labeled series share one length")
}

/// `I(band; GT)` for every band, over labeled pixels.
pub fn relevance_scores(qcube: &QuantizedCube, gt: &GroundTruth) -> Result<Vec<f64>> {
    let data = LabeledData::new(qcube, gt)?;
    Ok(relevance_of(&data))
}

pub fn relevance_of(data: &LabeledData) -> Vec<f64> {
    (0..data.band_count())
        .into_par_iter()
        .map(|b| mi(data.band(b), data.labels()))
        .collect()
}

/// Pixel-wise mean of the quantized `bands`, rounded half up.
pub fn build_estimated_gt(
    qcube: &QuantizedCube,
    gt: &GroundTruth,
    bands: &[usize],
) -> Result<DiscreteSeries> {
    if bands.is_empty() {
        return Err(Error::Empty("band set"));
    }
    let data = LabeledData::new(qcube, gt)?;
    estimated_gt(&data, bands)
}

pub fn estimated_gt(data: &LabeledData, bands: &[usize]) -> Result<DiscreteSeries> {
    if bands.is_empty() {
        return Err(Error::Empty("band set"));
    }
    if let Some(&b) = bands.iter().find(|&&b| b >= data.band_count()) {
        return Err(Error::InvalidParameter(format!("band {b} out of range")));
    }
    let mut sums = vec![0u64; data.len()];
    for &b in bands {
        for (acc, &v) in sums.iter_mut().zip(data.band(b).symbols()) {
            *acc += u64::from(v);
        }
    }
    let m = bands.len() as u64;
    // floor(sum / m + 1/2) in integers
    let symbols = sums
        .iter()
        .map(|&s| ((2 * s + m) / (2 * m)) as u32)
        .collect();
    DiscreteSeries::new(symbols, data.levels())
}

/// `I(c;GT) - beta * sum_{s} I(c; s)`.
pub fn score_mifs(candidate: usize, state: &SelectionState<'_>, beta: f64) -> f64 {
    debug_assert!(state.remaining.contains(&candidate));
    state.relevance[candidate] - beta * state.redundancy_sum(candidate)
}

/// `I(c;GT) - (1/|S|) * sum_{s} I(c; s)`; the penalty is zero while nothing
/// is selected.
pub fn score_mrmr(candidate: usize, state: &SelectionState<'_>) -> f64 {
    debug_assert!(state.remaining.contains(&candidate));
    let n = state.selected.len();
    if n == 0 {
        return state.relevance[candidate];
    }
    state.relevance[candidate] - state.redundancy_sum(candidate) / n as f64
}

/// `I(c;GT) + lambda * (1/|S|) * I(GT; GTest; c)` with the estimated ground
/// truth built from the selected bands.
pub fn score_igbs(candidate: usize, state: &SelectionState<'_>, lambda: f64) -> f64 {
    debug_assert!(state.remaining.contains(&candidate));
    let n = state.selected.len();
    if n == 0 {
        return state.relevance[candidate];
    }
    let rebuilt;
    let gtest = match &state.estimated_gt {
        Some(g) => g,
        None => {
            rebuilt = estimated_gt(state.data, &state.selected).expect("selected bands are valid");
            &rebuilt
        }
    };
    let gain = interaction_information(state.data.labels(), gtest, state.data.band(candidate))
        .expect("labeled series share one length");
    state.relevance[candidate] + lambda * gain / n as f64
}

/// First entry with the highest score; later entries must beat the running
/// best by more than [`TIE_TOLERANCE`].
fn pick_best(scored: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(band, score) in scored {
        match best {
            Some((_, s)) if score <= s + TIE_TOLERANCE => {}
            _ => best = Some((band, score)),
        }
    }
    best
}

/// Runs one selection method on a quantized cube.
pub fn greedy_select(
    qcube: &QuantizedCube,
    gt: &GroundTruth,
    method: Method,
    k: usize,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    let data = LabeledData::new(qcube, gt)?;
    select(&data, method, k, params)
}

/// Runs one selection method on pre-extracted labeled series.
pub fn select(
    data: &LabeledData,
    method: Method,
    k: usize,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    select_with_relevance(data, relevance_of(data), method, k, params)
}

/// Like [`select`], reusing relevance scores computed earlier.
pub fn select_with_relevance(
    data: &LabeledData,
    relevance: Vec<f64>,
    method: Method,
    k: usize,
    params: &SelectionParams,
) -> Result<SelectionResult> {
    params.validate()?;
    if k == 0 || k > data.band_count() {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={}, got {k}",
            data.band_count()
        )));
    }
    if relevance.len() != data.band_count() {
        return Err(Error::LengthMismatch {
            left: relevance.len(),
            right: data.band_count(),
        });
    }
    let (selected, step_scores) = match method {
        Method::Mibf => run_mibf(data, &relevance, k, params.threshold)?,
        _ => run_greedy(data, relevance, method, k, params)?,
    };
    Ok(SelectionResult {
        method,
        params: *params,
        levels: data.levels(),
        k,
        selected,
        step_scores,
    })
}

fn run_greedy(
    data: &LabeledData,
    relevance: Vec<f64>,
    method: Method,
    k: usize,
    params: &SelectionParams,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let mut state = SelectionState::new(data, relevance, method);
    let mut scores = Vec::with_capacity(k);
    while state.selected.len() < k && !state.remaining.is_empty() {
        let scored: Vec<(usize, f64)> = if state.selected.is_empty() {
            state
                .remaining
                .iter()
                .map(|&b| (b, state.relevance[b]))
                .collect()
        } else {
            let state = &state;
            state
                .remaining
                .par_iter()
                .map(|&b| {
                    let s = match method {
                        Method::Mim => state.relevance[b],
                        Method::Mifs => score_mifs(b, state, params.beta),
                        Method::Mrmr => score_mrmr(b, state),
                        Method::Igbs => score_igbs(b, state, params.lambda),
                        Method::Mibf => unreachable!("MIBF has its own driver"),
                    };
                    (b, s)
                })
                .collect()
        };
        let (band, score) = pick_best(&scored).expect("remaining is nonempty");
        state.accept(band)?;
        scores.push(score);
    }
    Ok((state.selected, scores))
}

fn run_mibf(
    data: &LabeledData,
    relevance: &[f64],
    k: usize,
    threshold: f64,
) -> Result<(Vec<usize>, Vec<f64>)> {
    // Candidates are visited once each, in descending relevance.
    let mut pool: Vec<(usize, f64)> = relevance.iter().copied().enumerate().collect();
    let mut order = Vec::with_capacity(pool.len());
    while let Some((band, _)) = pick_best(&pool) {
        order.push(band);
        pool.retain(|&(b, _)| b != band);
    }

    let first = order[0];
    let mut selected = vec![first];
    let mut scores = vec![relevance[first]];
    let mut current = mi(&estimated_gt(data, &selected)?, data.labels());
    for &cand in &order[1..] {
        if selected.len() == k {
            break;
        }
        selected.push(cand);
        let trial = mi(&estimated_gt(data, &selected)?, data.labels());
        let gain = trial - current;
        if gain > threshold {
            current = trial;
            scores.push(gain);
        } else {
            selected.pop();
        }
    }
    Ok((selected, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::series_entropy;

    fn series(v: &[u32], alphabet: usize) -> DiscreteSeries {
        DiscreteSeries::new(v.to_vec(), alphabet).unwrap()
    }

    fn data(bands: &[&[u32]], labels: &[u32], levels: usize) -> LabeledData {
        let classes = *labels.iter().max().unwrap() as usize + 1;
        LabeledData::from_series(
            levels,
            bands.iter().map(|b| series(b, levels)).collect(),
            series(labels, classes),
        )
        .unwrap()
    }

    #[test]
    fn relevance_of_label_copy_is_label_entropy() {
        let labels = [0, 1, 2, 2, 1, 0, 0, 0];
        let noise = [0, 1, 0, 1, 0, 1, 0, 1];
        let d = data(&[&labels, &noise], &labels, 4);
        let r = relevance_of(&d);
        assert!((r[0] - series_entropy(d.labels())).abs() < 1e-12);
    }

    #[test]
    fn relevance_of_independent_band_is_zero() {
        let labels = [0, 0, 1, 1];
        let band = [0, 1, 0, 1];
        let d = data(&[&band], &labels, 2);
        assert!(relevance_of(&d)[0].abs() < 1e-12);
    }

    #[test]
    fn estimated_gt_rounds_half_up() {
        let d = data(&[&[2, 3], &[5, 3]], &[0, 1], 16);
        let g = estimated_gt(&d, &[0, 1]).unwrap();
        assert_eq!(g.symbols(), &[4, 3]);
        assert_eq!(g.alphabet(), 16);
        assert_eq!(estimated_gt(&d, &[1]).unwrap().symbols(), &[5, 3]);
        assert_eq!(estimated_gt(&d, &[0, 0]).unwrap().symbols(), &[2, 3]);
        assert!(matches!(estimated_gt(&d, &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn mifs_scoring() {
        let labels = [0, 0, 1, 1, 0, 1, 0, 1];
        let a = [0, 1, 1, 1, 0, 1, 0, 0];
        let d = data(&[&a, &a, &labels], &labels, 2);
        let rel = relevance_of(&d);
        let mut st = SelectionState::new(&d, rel.clone(), Method::Mifs);
        assert_eq!(score_mifs(1, &st, 1.0), rel[1]);
        st.accept(0).unwrap();
        let h = series_entropy(d.band(1));
        assert!((score_mifs(1, &st, 1.0) - (rel[1] - h)).abs() < 1e-12);
        assert!(score_mifs(1, &st, 1.0) <= 0.0);
        assert_eq!(score_mifs(2, &st, 0.0), rel[2]);
    }

    #[test]
    fn mrmr_scoring() {
        let labels = [0, 0, 1, 1, 0, 0, 1, 1];
        let a = [0, 1, 0, 1, 0, 1, 0, 1];
        let b = [0, 0, 1, 1, 1, 1, 0, 0];
        let d = data(&[&a, &b, &a], &labels, 2);
        let rel = relevance_of(&d);
        let mut st = SelectionState::new(&d, rel.clone(), Method::Mrmr);
        st.accept(0).unwrap();
        // b is independent of a
        assert!((score_mrmr(1, &st) - rel[1]).abs() < 1e-12);
        // duplicate of the sole selected band
        let h = series_entropy(d.band(2));
        assert!((score_mrmr(2, &st) - (rel[2] - h)).abs() < 1e-12);
    }

    #[test]
    fn mrmr_penalty_is_a_mean() {
        // Two selected bands each sharing exactly r bits with the candidate.
        let x = [0, 0, 1, 1, 0, 0, 1, 1];
        let labels = [0, 1, 0, 1, 0, 1, 0, 1];
        let d = data(&[&x, &x, &x], &labels, 2);
        let rel = relevance_of(&d);
        let mut st = SelectionState::new(&d, rel, Method::Mrmr);
        st.accept(0).unwrap();
        let one = score_mrmr(2, &st);
        st.accept(1).unwrap();
        assert!((score_mrmr(2, &st) - one).abs() < 1e-12);
    }

    #[test]
    fn igbs_xor_candidate_gains_a_full_bit() {
        // GT = cand XOR GTest, balanced; cand alone carries nothing.
        let gtest_band = [0, 0, 1, 1];
        let cand = [0, 1, 0, 1];
        let labels = [0, 1, 1, 0];
        let d = data(&[&gtest_band, &cand], &labels, 2);
        let rel = relevance_of(&d);
        assert!(rel[1].abs() < 1e-12);
        for lambda in [1.0, 0.5] {
            let mut st = SelectionState::new(&d, rel.clone(), Method::Igbs);
            st.accept(0).unwrap();
            assert!((score_igbs(1, &st, lambda) - lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn igbs_copy_of_estimate_is_pure_redundancy() {
        let est = [0, 0, 1, 1, 1, 0];
        let labels = [0, 0, 1, 1, 0, 1];
        let d = data(&[&est, &est], &labels, 2);
        let rel = relevance_of(&d);
        let mut st = SelectionState::new(&d, rel.clone(), Method::Igbs);
        st.accept(0).unwrap();
        let expected = rel[1] - mi(d.labels(), d.band(0));
        assert!((score_igbs(1, &st, 1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn igbs_independent_candidate_gets_relevance() {
        // Candidate is independent of (GT, GTest) jointly on a product sample.
        let est = [0, 0, 1, 1, 0, 0, 1, 1];
        let labels = [0, 1, 0, 1, 0, 1, 0, 1];
        let cand = [0, 0, 0, 0, 1, 1, 1, 1];
        let d = data(&[&est, &cand], &labels, 2);
        let rel = relevance_of(&d);
        let mut st = SelectionState::new(&d, rel.clone(), Method::Igbs);
        st.accept(0).unwrap();
        assert!((score_igbs(1, &st, 1.0) - rel[1]).abs() < 1e-12);
    }

    #[test]
    fn k_one_picks_max_relevance_for_every_method() {
        let labels = [0, 0, 1, 1, 2, 2, 0, 1];
        let d = data(
            &[
                &[0, 1, 0, 1, 0, 1, 0, 1],
                &[0, 0, 1, 1, 2, 2, 0, 1],
                &[0, 0, 1, 1, 1, 1, 0, 1],
            ],
            &labels,
            4,
        );
        for m in Method::ALL {
            let r = select(&d, m, 1, &SelectionParams::default()).unwrap();
            assert_eq!(r.selected, vec![1], "{m}");
            assert_eq!(r.step_scores.len(), 1);
        }
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let labels = [0, 0, 1, 1];
        let b = [0, 0, 1, 1];
        let d = data(&[&[0, 1, 0, 1], &b, &b, &b], &labels, 2);
        let r = select(&d, Method::Mim, 3, &SelectionParams::default()).unwrap();
        assert_eq!(r.selected, vec![1, 2, 3]);
    }

    #[test]
    fn rejects_bad_k_and_params() {
        let d = data(&[&[0, 1], &[1, 0]], &[0, 1], 2);
        let p = SelectionParams::default();
        assert!(select(&d, Method::Mim, 0, &p).is_err());
        assert!(select(&d, Method::Mim, 3, &p).is_err());
        let bad = SelectionParams { beta: -1.0, ..p };
        assert!(select(&d, Method::Mifs, 1, &bad).is_err());
        let bad = SelectionParams {
            lambda: f64::NAN,
            ..p
        };
        assert!(select(&d, Method::Igbs, 1, &bad).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.name().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert!("mutual".parse::<Method>().is_err());
    }

    #[test]
    fn accept_rejects_non_candidates() {
        let d = data(&[&[0, 1], &[1, 0]], &[0, 1], 2);
        let mut st = SelectionState::new(&d, relevance_of(&d), Method::Mim);
        st.accept(1).unwrap();
        assert!(st.accept(1).is_err());
        assert!(st.accept(7).is_err());
        assert_eq!(st.selected(), &[1]);
        assert_eq!(st.remaining(), &[0]);
    }
}
