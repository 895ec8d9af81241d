//! Run selection, ranking, reporting checkpoints and trend aggregation.

use std::collections::BTreeMap;

use apland_core::de::{Individual, Population};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::formats::MeasureLine;

/// Summary of one independent run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub final_error: f64,
    /// Counted evaluations when the best-so-far error last strictly improved.
    pub fe_at_best: u64,
    pub fe_used: u64,
    pub uncounted: u64,
    pub snapshots: usize,
    pub report: Vec<ReportPoint>,
    #[serde(skip)]
    pub trace: Vec<(u64, f64)>,
}

/// A reporting checkpoint: the requested FE and the captured FE it snapped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPoint {
    pub target: u64,
    pub snapped: Option<u64>,
}

/// Index (into `records`) of the median run, ordering by final error and
/// then by the evaluations needed to reach it.
pub fn select_median_run(records: &[RunRecord]) -> Result<usize> {
    if records.is_empty() {
        return Err(HarnessError::Usage("no runs to select a median from".into()));
    }
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.final_error
            .total_cmp(&rb.final_error)
            .then(ra.fe_at_best.cmp(&rb.fe_at_best))
            .then(ra.run.cmp(&rb.run))
    });
    Ok(order[(records.len() - 1) / 2])
}

/// 1-based rank of every individual: rank 1 is the lowest objective value,
/// ties go to the lower index.
pub fn rank_individuals(pop: &Population) -> Vec<usize> {
    let mut ranks = vec![0; pop.len()];
    for (pos, idx) in pop.ranking().into_iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

/// Convenience wrapper over raw objective values.
pub fn rank_values(values: &[f64]) -> Vec<usize> {
    let pop = Population::from_members(
        values
            .iter()
            .map(|&fx| Individual { x: Vec::new(), fx })
            .collect(),
    );
    rank_individuals(&pop)
}

/// `{100, floor(0.5 fe_stop), floor(0.75 fe_stop), fe_stop}`, each snapped
/// to the nearest captured checkpoint (ties snap down).
pub fn report_points(initial: u64, fe_stop: u64, captured: &[u64]) -> Vec<ReportPoint> {
    let targets = [initial, fe_stop / 2, fe_stop * 3 / 4, fe_stop];
    targets
        .into_iter()
        .map(|target| ReportPoint {
            target,
            snapped: captured
                .iter()
                .copied()
                .min_by_key(|&c| (c.abs_diff(target), c)),
        })
        .collect()
}

/// One row of the aggregated trend table.
#[derive(Clone, Debug, PartialEq)]
pub struct TrendRow {
    pub fe: u64,
    pub rank: usize,
    pub fdc_mean: Option<f64>,
    pub disp_mean: Option<f64>,
    pub nzr_mean: f64,
    /// Records whose FDC was defined.
    pub n_defined: usize,
    pub n_records: usize,
}

/// Means of each measure per `(fe, rank)` over runs, skipping undefined values.
///
/// Input order does not matter: values are summed in `(run, fe, rank)` order.
pub fn aggregate_measures(records: &[MeasureLine]) -> Vec<TrendRow> {
    let mut sorted: Vec<&MeasureLine> = records.iter().collect();
    sorted.sort_by_key(|m| (m.fe, m.rank, m.run_id));
    let mut groups: BTreeMap<(u64, usize), Vec<&MeasureLine>> = BTreeMap::new();
    for m in sorted {
        groups.entry((m.fe, m.rank)).or_default().push(m);
    }
    groups
        .into_iter()
        .map(|((fe, rank), ms)| {
            let fdc: Vec<f64> = ms.iter().filter_map(|m| m.fdc).collect();
            let disp: Vec<f64> = ms.iter().filter_map(|m| m.disp).collect();
            let nzr: Vec<f64> = ms.iter().map(|m| m.nzr).collect();
            TrendRow {
                fe,
                rank,
                fdc_mean: mean(&fdc),
                disp_mean: mean(&disp),
                nzr_mean: mean(&nzr).unwrap_or(0.0),
                n_defined: fdc.len(),
                n_records: ms.len(),
            }
        })
        .collect()
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}
