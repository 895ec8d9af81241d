//! Landscape measures over a snapshot's `(F, C, G1)` cloud.
//!
//! Distances are Euclidean on raw `(F, C)`; both axes already span `[0, 1]`.
//! A measure that cannot be computed yields an [`Undefined`] reason rather
//! than NaN.

use alloc::vec::Vec;
use core::fmt;

use crate::de::ParameterPair;
use crate::profiler::{argmax, LandscapeSnapshot};

/// Default fraction of cells that form the DISP top set.
pub const DEFAULT_DISP_FRACTION: f64 = 0.1;

/// Why a measure has no value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Undefined {
    /// Every G1 value is zero.
    Flat,
    /// G1 or the distances have no spread.
    ZeroVariance,
    /// Fewer points than the measure needs.
    TooFewPoints,
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Undefined::Flat => "flat landscape",
            Undefined::ZeroVariance => "zero variance",
            Undefined::TooFewPoints => "too few points",
        })
    }
}

pub type Measure = Result<f64, Undefined>;

/// Fraction of cells with strictly positive G1.
pub fn nzr(g1: &[f64]) -> f64 {
    if g1.is_empty() {
        return 0.0;
    }
    g1.iter().filter(|v| **v > 0.0).count() as f64 / g1.len() as f64
}

/// Correlation between distance to the best cell and negated G1.
///
/// A single funnel whose G1 decays away from the best pair scores near +1.
pub fn fdc(pairs: &[ParameterPair], g1: &[f64]) -> Measure {
    assert_eq!(pairs.len(), g1.len());
    if pairs.len() < 2 {
        return Err(Undefined::TooFewPoints);
    }
    let best = pairs[argmax(g1)];
    // Single pass over (distance, -g1) with running co-moments.
    let (mut mean_d, mut mean_h) = (0.0, 0.0);
    let (mut m2_d, mut m2_h, mut co) = (0.0, 0.0, 0.0);
    for (k, (p, &h)) in pairs.iter().zip(g1).enumerate() {
        let d = p.distance(&best);
        let h = -h;
        let n = (k + 1) as f64;
        let dd = d - mean_d;
        let dh = h - mean_h;
        mean_d += dd / n;
        mean_h += dh / n;
        m2_d += dd * (d - mean_d);
        m2_h += dh * (h - mean_h);
        co += dd * (h - mean_h);
    }
    // Also rejects NaN moments.
    if !(m2_d > 0.0 && m2_h > 0.0) {
        return Err(Undefined::ZeroVariance);
    }
    let r = co / libm::sqrt(m2_d * m2_h);
    if !r.is_finite() {
        return Err(Undefined::ZeroVariance);
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Cells sorted by G1 descending, ties by index.
pub fn top_cells(g1: &[f64], b: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g1.len()).collect();
    order.sort_by(|&a, &c| g1[c].total_cmp(&g1[a]).then(a.cmp(&c)));
    order.truncate(b);
    order
}

/// Mean pairwise distance among the top `floor(fraction * m)` cells.
pub fn disp(pairs: &[ParameterPair], g1: &[f64], fraction: f64) -> Measure {
    assert_eq!(pairs.len(), g1.len());
    let b = libm::floor(fraction * pairs.len() as f64) as usize;
    if b < 2 {
        return Err(Undefined::TooFewPoints);
    }
    let top = top_cells(g1, b);
    let mut total = 0.0;
    for (k, &a) in top.iter().enumerate() {
        for &c in &top[k + 1..] {
            total += pairs[a].distance(&pairs[c]);
        }
    }
    let count = (b * (b - 1) / 2) as f64;
    Ok(total / count)
}

/// The three measures of one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureRecord {
    pub run_id: u64,
    pub fe: u64,
    pub rank: usize,
    pub fdc: Measure,
    pub disp: Measure,
    pub nzr: f64,
}

/// Computes FDC, DISP and NZR on the raw G1 values of `snapshot`.
pub fn measure_snapshot(snapshot: &LandscapeSnapshot, disp_fraction: f64) -> MeasureRecord {
    let (fdc_v, disp_v) = if snapshot.flat {
        (Err(Undefined::Flat), Err(Undefined::Flat))
    } else {
        (
            fdc(&snapshot.pairs, &snapshot.g1),
            disp(&snapshot.pairs, &snapshot.g1, disp_fraction),
        )
    };
    MeasureRecord {
        run_id: snapshot.meta.run_id,
        fe: snapshot.meta.fe,
        rank: snapshot.meta.individual_rank,
        fdc: fdc_v,
        disp: disp_v,
        nzr: nzr(&snapshot.g1),
    }
}
