//! Campaign execution: independent seeded runs, snapshot capture at the
//! scheduled checkpoints, measures, rendering and the output tree.
//!
//! ```text
//! <out>/<config-hash>/
//!   config.toml      verbatim copy of the input config
//!   resolved.toml    every key with its effective value
//!   runs.jsonl       one RunRecord per run
//!   median.json      the median run and its reporting checkpoints
//!   aggregate.csv    mean measures per (checkpoint, rank) over runs
//!   run-<k>/
//!     run.json  trace.jsonl  measures.jsonl  [population.jsonl]
//!     snapshots/<checkpoint>/<rank>.{csv,json}
//!     snapshots/<checkpoint>-rank<rank>.svg
//! ```

use std::path::{Path, PathBuf};

use apland_core::bench::BenchmarkFunction;
use apland_core::de::Individual;
use apland_core::engine::{Engine, IterationView};
use apland_core::measures::measure_snapshot;
use apland_core::profiler::{g1, LandscapeSnapshot, ParameterGrid, SnapshotMeta};
use apland_core::rng::run_seed;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{aggregate_measures, report_points, select_median_run, ReportPoint, RunRecord};
use crate::config::ResolvedConfig;
use crate::error::Result;
use crate::formats::{
    aggregate_csv, to_json_pretty, to_jsonl, write_file, write_snapshot, MeasureLine, SnapshotSidecar, TraceLine,
};
use crate::render::render_svg;

/// Everything one run produces, besides the snapshot files themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub record: RunRecord,
    pub trace: Vec<TraceLine>,
    pub measures: Vec<MeasureLine>,
    /// Checkpoints at which snapshots were captured.
    pub captured: Vec<u64>,
}

#[derive(Serialize)]
struct PopulationDump<'a> {
    t: u64,
    fe: u64,
    checkpoint: u64,
    members: &'a [Individual],
}

#[derive(Serialize)]
struct MedianSummary {
    median_run: usize,
    seed: u64,
    final_error: f64,
    fe_at_best: u64,
    report: Vec<ReportPoint>,
}

/// Result of a whole campaign.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub dir: PathBuf,
    pub runs: Vec<RunArtifacts>,
    /// Index into `runs` of the median run.
    pub median: usize,
}

/// Scores every grid pair for the individual holding `rank` (1 = best),
/// in parallel. The evaluations are uncounted.
pub fn profile_rank(
    view: &IterationView<'_>,
    grid: &ParameterGrid,
    rank: usize,
    meta: SnapshotMeta,
) -> LandscapeSnapshot {
    let i = view.individual_at_rank(rank);
    let ff = &view.factors[i];
    let values: Vec<f64> = grid
        .pairs()
        .par_iter()
        .map(|&theta| g1(&view.context, i, theta, ff, view.counter))
        .collect();
    LandscapeSnapshot::from_g1(meta, grid.pairs().to_vec(), values, view.pairs[i])
}

/// Executes run `run` of a campaign. When `dir` is given, the run's files
/// are written there as they are produced.
pub fn execute_run(cfg: &ResolvedConfig, run: usize, dir: Option<&Path>) -> Result<RunArtifacts> {
    let seed = run_seed(cfg.seed, run as u64);
    let function = BenchmarkFunction::new(cfg.function, cfg.dimension, cfg.function_seed)?;
    let grid = ParameterGrid::new(cfg.grid_f, cfg.grid_c)?;
    let mut engine = Engine::new(cfg.engine_config(), function, seed)?;
    let checkpoints = cfg.checkpoints();
    let snapshots_dir = dir.map(|d| d.join("snapshots"));

    let mut next = 0usize;
    let mut trace = Vec::new();
    let mut measures = Vec::new();
    let mut captured = Vec::new();
    let mut population_dump = Vec::new();
    let mut n_snapshots = 0usize;

    while engine.fits_budget(cfg.budget) {
        if cfg.stop_at_target && engine.best_error() == 0.0 {
            break;
        }
        let fe_start = engine.counter().counted();
        let mut checkpoint = None;
        if next < checkpoints.len() && fe_start >= checkpoints[next] {
            checkpoint = Some(checkpoints[next]);
            while next < checkpoints.len() && checkpoints[next] <= fe_start {
                next += 1;
            }
        }
        if let Some(cp) = checkpoint {
            captured.push(cp);
            if cfg.dump_population {
                let dump = PopulationDump {
                    t: engine.iteration(),
                    fe: fe_start,
                    checkpoint: cp,
                    members: engine.population().members(),
                };
                serde_json::to_writer(&mut population_dump, &dump).expect("serializable");
                population_dump.push(b'\n');
            }
        }

        let mut snaps = Vec::new();
        let report = if let (Some(cp), true) = (checkpoint, cfg.profile) {
            let function = engine.function();
            let (name, fseed, d) = (function.name().to_string(), function.seed(), function.dimension());
            engine.step_with(|view| {
                for &rank in &cfg.ranks {
                    let meta = SnapshotMeta {
                        run_id: run as u64,
                        function: name.clone(),
                        function_seed: fseed,
                        dimension: d,
                        iteration: view.iteration,
                        fe: view.fe,
                        individual_index: view.individual_at_rank(rank),
                        individual_rank: rank,
                    };
                    let snap = profile_rank(view, &grid, rank, meta);
                    let sidecar = SnapshotSidecar::new(&snap, cp, grid.resolution());
                    snaps.push((snap, sidecar));
                }
            })?
        } else {
            engine.step()?
        };

        for (snap, sidecar) in &snaps {
            let mut line = MeasureLine::from(&measure_snapshot(snap, cfg.disp_fraction));
            line.fe = sidecar.checkpoint;
            measures.push(line);
            n_snapshots += 1;
            if let Some(sd) = &snapshots_dir {
                write_snapshot(sd, snap, sidecar)?;
                if cfg.render {
                    if let Some(svg) = render_svg(snap, grid.resolution()) {
                        let name = format!("{}-rank{}.svg", sidecar.checkpoint, sidecar.rank);
                        write_file(&sd.join(name), svg.as_bytes())?;
                    }
                }
            }
        }
        trace.push(TraceLine {
            t: report.iteration,
            fe: report.fe,
            best_error: report.best_error,
        });
    }

    let record = RunRecord {
        run,
        seed,
        final_error: engine.best_error(),
        fe_at_best: engine.fe_at_best(),
        fe_used: engine.counter().counted(),
        uncounted: engine.counter().uncounted(),
        snapshots: n_snapshots,
        report: report_points(cfg.initial_checkpoint, engine.fe_at_best(), &captured),
        trace: trace.iter().map(|t| (t.fe, t.best_error)).collect(),
    };

    if let Some(dir) = dir {
        write_file(&dir.join("trace.jsonl"), &to_jsonl(&trace))?;
        write_file(&dir.join("measures.jsonl"), &to_jsonl(&measures))?;
        write_file(&dir.join("run.json"), &to_json_pretty(&record))?;
        if cfg.dump_population {
            write_file(&dir.join("population.jsonl"), &population_dump)?;
        }
    }
    Ok(RunArtifacts {
        record,
        trace,
        measures,
        captured,
    })
}

/// Directory a campaign writes to under `out_root`.
pub fn campaign_dir(cfg: &ResolvedConfig, out_root: &Path) -> PathBuf {
    out_root.join(cfg.hash())
}

/// Runs every run of the campaign (in parallel) and writes the output tree.
///
/// `verbatim` is the config text as the user wrote it.
pub fn run_experiment(cfg: &ResolvedConfig, verbatim: &str, out_root: &Path) -> Result<Campaign> {
    let dir = campaign_dir(cfg, out_root);
    write_file(&dir.join("config.toml"), verbatim.as_bytes())?;
    write_file(&dir.join("resolved.toml"), cfg.to_toml().as_bytes())?;

    let runs: Vec<RunArtifacts> = (0..cfg.runs)
        .into_par_iter()
        .map(|k| execute_run(cfg, k, Some(&dir.join(format!("run-{k}")))))
        .collect::<Result<_>>()?;

    let records: Vec<RunRecord> = runs.iter().map(|r| r.record.clone()).collect();
    write_file(&dir.join("runs.jsonl"), &to_jsonl(&records))?;
    let median = select_median_run(&records)?;
    let m = &records[median];
    let summary = MedianSummary {
        median_run: m.run,
        seed: m.seed,
        final_error: m.final_error,
        fe_at_best: m.fe_at_best,
        report: m.report.clone(),
    };
    write_file(&dir.join("median.json"), &to_json_pretty(&summary))?;
    if cfg.profile {
        let all: Vec<MeasureLine> = runs.iter().flat_map(|r| r.measures.iter().cloned()).collect();
        write_file(&dir.join("aggregate.csv"), &aggregate_csv(&aggregate_measures(&all)))?;
    }
    Ok(Campaign { dir, runs, median })
}
