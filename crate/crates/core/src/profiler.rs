//! Adaptive parameter landscape profiling.
//!
//! For one individual at one iteration, every pair of a `(F, C)` grid is
//! replayed through trial generation under the individual's frozen factors
//! and scored with the one-step-lookahead greedy improvement (G1). Those
//! replays are charged to the counter's uncounted side and draw no
//! randomness, so the search is unaffected by profiling.

use alloc::string::String;
use alloc::vec::Vec;

use crate::bench::EvaluationCounter;
use crate::de::{FrozenFactors, ParameterPair, TrialContext};
use crate::error::{Error, Result};

/// Default grid resolution on each axis.
pub const DEFAULT_RESOLUTION: usize = 50;

/// Evenly spaced, endpoint-inclusive `(F, C)` grid over `[0, 1]^2`.
///
/// Pairs are laid out row-major with F as the row: index `a * k_c + b`
/// holds `(a / (k_f - 1), b / (k_c - 1))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGrid {
    pairs: Vec<ParameterPair>,
    k_f: usize,
    k_c: usize,
}

impl ParameterGrid {
    pub fn new(k_f: usize, k_c: usize) -> Result<Self> {
        if k_f < 2 || k_c < 2 {
            return Err(Error::Config(alloc::format!(
                "grid resolution must be at least 2x2, got {k_f}x{k_c}"
            )));
        }
        let pairs = (0..k_f)
            .flat_map(|a| {
                (0..k_c).map(move |b| {
                    ParameterPair::new(a as f64 / (k_f - 1) as f64, b as f64 / (k_c - 1) as f64)
                })
            })
            .collect();
        Ok(ParameterGrid { pairs, k_f, k_c })
    }

    pub fn pairs(&self) -> &[ParameterPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.k_f, self.k_c)
    }

    /// Index of the grid cell equal to `pair`, if any.
    pub fn position(&self, pair: ParameterPair) -> Option<usize> {
        self.pairs.iter().position(|p| *p == pair)
    }
}

impl Default for ParameterGrid {
    fn default() -> Self {
        ParameterGrid::new(DEFAULT_RESOLUTION, DEFAULT_RESOLUTION).expect("valid default")
    }
}

/// Greedy improvement of a parent value `fx` by a trial value `fu`.
pub fn g1_value(fx: f64, fu: f64) -> f64 {
    if fu < fx {
        libm::fabs(fx - fu)
    } else {
        0.0
    }
}

/// G1 of `theta` for individual `i`; the trial evaluation is uncounted.
pub fn g1(
    ctx: &TrialContext<'_>,
    i: usize,
    theta: ParameterPair,
    ff: &FrozenFactors,
    counter: &EvaluationCounter,
) -> f64 {
    let trial = ctx.generate_trial(i, theta, ff, counter, false);
    g1_value(ctx.population.get(i).fx, trial.fx)
}

/// Min-max normalization into `[0, 1]`.
///
/// A constant vector maps to all zeros; `flat` is set only when that
/// constant is zero.
pub fn normalize_g1(g1: &[f64]) -> (Vec<f64>, bool) {
    let (min, max) = g1
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if g1.is_empty() || max == min {
        return (alloc::vec![0.0; g1.len()], g1.is_empty() || max == 0.0);
    }
    let span = max - min;
    (g1.iter().map(|v| (v - min) / span).collect(), false)
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Identifies where and when a snapshot was taken.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnapshotMeta {
    pub run_id: u64,
    pub function: String,
    pub function_seed: u64,
    pub dimension: usize,
    pub iteration: u64,
    /// Counted evaluations when the snapshot was captured.
    pub fe: u64,
    pub individual_index: usize,
    /// 1 is the best individual.
    pub individual_rank: usize,
}

/// One individual's adaptive parameter landscape at one iteration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LandscapeSnapshot {
    pub meta: SnapshotMeta,
    pub pairs: Vec<ParameterPair>,
    pub g1: Vec<f64>,
    pub g1_norm: Vec<f64>,
    /// The argmax cell (the contour star).
    pub best_pair: ParameterPair,
    /// The pair the PAM actually used (the contour circle).
    pub actual_pair: ParameterPair,
    pub flat: bool,
}

impl LandscapeSnapshot {
    /// Assembles a snapshot from raw G1 values, deriving normalization and the best pair.
    pub fn from_g1(
        meta: SnapshotMeta,
        pairs: Vec<ParameterPair>,
        g1: Vec<f64>,
        actual_pair: ParameterPair,
    ) -> Self {
        assert_eq!(pairs.len(), g1.len(), "one G1 value per pair");
        let (g1_norm, flat) = normalize_g1(&g1);
        let best_pair = pairs[argmax(&g1)];
        LandscapeSnapshot {
            meta,
            pairs,
            g1,
            g1_norm,
            best_pair,
            actual_pair,
            flat,
        }
    }

    pub fn best_index(&self) -> usize {
        argmax(&self.g1)
    }
}

/// Scores every grid pair for individual `i` and packages the result.
///
/// `ff` must be the factors of the individual's actual trial this iteration.
pub fn snapshot_individual(
    ctx: &TrialContext<'_>,
    i: usize,
    grid: &ParameterGrid,
    ff: &FrozenFactors,
    actual_pair: ParameterPair,
    counter: &EvaluationCounter,
    meta: SnapshotMeta,
) -> LandscapeSnapshot {
    let g1: Vec<f64> = grid
        .pairs()
        .iter()
        .map(|&theta| g1(ctx, i, theta, ff, counter))
        .collect();
    LandscapeSnapshot::from_g1(meta, grid.pairs().to_vec(), g1, actual_pair)
}
