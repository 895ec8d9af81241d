//! On-disk formats.
//!
//! - `trace.jsonl`: one [`TraceLine`] per iteration.
//! - `snapshots/<fe>/<rank>.csv`: columns `F,C,g1,g1_norm`, one row per grid cell.
//! - `snapshots/<fe>/<rank>.json`: the [`SnapshotSidecar`].
//! - `measures.jsonl`: one [`MeasureLine`] per snapshot; undefined measures
//!   are `null` with a `*_undefined` reason.
//! - aggregate CSV: `fe,rank,fdc_mean,disp_mean,nzr_mean,n_defined`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use apland_core::de::ParameterPair;
use apland_core::measures::{MeasureRecord, Undefined};
use apland_core::profiler::{LandscapeSnapshot, SnapshotMeta};
use serde::{Deserialize, Serialize};

use crate::analysis::TrendRow;
use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub t: u64,
    pub fe: u64,
    pub best_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureLine {
    pub run_id: u64,
    pub fe: u64,
    pub rank: usize,
    pub fdc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fdc_undefined: Option<Undefined>,
    pub disp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disp_undefined: Option<Undefined>,
    pub nzr: f64,
}

impl From<&MeasureRecord> for MeasureLine {
    fn from(r: &MeasureRecord) -> Self {
        MeasureLine {
            run_id: r.run_id,
            fe: r.fe,
            rank: r.rank,
            fdc: r.fdc.ok(),
            fdc_undefined: r.fdc.err(),
            disp: r.disp.ok(),
            disp_undefined: r.disp.err(),
            nzr: r.nzr,
        }
    }
}

/// Metadata stored next to each snapshot CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub run_id: u64,
    pub function: String,
    pub function_seed: u64,
    pub dimension: usize,
    pub t: u64,
    pub fe: u64,
    /// The scheduled checkpoint this capture serves.
    pub checkpoint: u64,
    pub i: usize,
    pub rank: usize,
    pub grid_f: usize,
    pub grid_c: usize,
    pub best_pair: ParameterPair,
    pub actual_pair: ParameterPair,
    pub flat: bool,
}

impl SnapshotSidecar {
    pub fn new(snap: &LandscapeSnapshot, checkpoint: u64, grid: (usize, usize)) -> Self {
        let m = &snap.meta;
        SnapshotSidecar {
            run_id: m.run_id,
            function: m.function.clone(),
            function_seed: m.function_seed,
            dimension: m.dimension,
            t: m.iteration,
            fe: m.fe,
            checkpoint,
            i: m.individual_index,
            rank: m.individual_rank,
            grid_f: grid.0,
            grid_c: grid.1,
            best_pair: snap.best_pair,
            actual_pair: snap.actual_pair,
            flat: snap.flat,
        }
    }

    fn meta(&self) -> SnapshotMeta {
        SnapshotMeta {
            run_id: self.run_id,
            function: self.function.clone(),
            function_seed: self.function_seed,
            dimension: self.dimension,
            iteration: self.t,
            fe: self.fe,
            individual_index: self.i,
            individual_rank: self.rank,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CellRow {
    #[serde(rename = "F")]
    f: f64,
    #[serde(rename = "C")]
    c: f64,
    g1: f64,
    g1_norm: f64,
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn to_jsonl<T: Serialize>(items: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).expect("serializable");
        out.push(b'\n');
    }
    out
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    read_file(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| HarnessError::parse(path, format!("line {}: {e}", k + 1)))
        })
        .collect()
}

pub fn to_json_pretty<T: Serialize>(item: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(item).expect("serializable");
    out.push(b'\n');
    out
}

/// Path of a snapshot's CSV under a run's `snapshots/` directory.
pub fn snapshot_csv_path(snapshots_dir: &Path, fe: u64, rank: usize) -> PathBuf {
    snapshots_dir.join(fe.to_string()).join(format!("{rank}.csv"))
}

/// Writes `<checkpoint>/<rank>.csv` and `<checkpoint>/<rank>.json`; returns the CSV path.
pub fn write_snapshot(snapshots_dir: &Path, snap: &LandscapeSnapshot, sidecar: &SnapshotSidecar) -> Result<PathBuf> {
    let csv_path = snapshot_csv_path(snapshots_dir, sidecar.checkpoint, sidecar.rank);
    let mut w = csv::Writer::from_writer(Vec::new());
    for ((p, g), n) in snap.pairs.iter().zip(&snap.g1).zip(&snap.g1_norm) {
        w.serialize(CellRow { f: p.f, c: p.c, g1: *g, g1_norm: *n })
            .map_err(|e| HarnessError::parse(&csv_path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::parse(&csv_path, e))?;
    write_file(&csv_path, &bytes)?;
    write_file(&csv_path.with_extension("json"), &to_json_pretty(sidecar))?;
    Ok(csv_path)
}

/// Reads a snapshot given either its CSV or its JSON sidecar path.
pub fn read_snapshot(path: &Path) -> Result<(LandscapeSnapshot, SnapshotSidecar)> {
    let csv_path = path.with_extension("csv");
    let json_path = path.with_extension("json");
    let sidecar: SnapshotSidecar =
        serde_json::from_str(&read_file(&json_path)?).map_err(|e| HarnessError::parse(&json_path, e))?;
    let mut reader = csv::Reader::from_path(&csv_path).map_err(|e| HarnessError::parse(&csv_path, e))?;
    let mut pairs = Vec::new();
    let mut g1 = Vec::new();
    let mut g1_norm = Vec::new();
    for row in reader.deserialize::<CellRow>() {
        let row = row.map_err(|e| HarnessError::parse(&csv_path, e))?;
        pairs.push(ParameterPair::new(row.f, row.c));
        g1.push(row.g1);
        g1_norm.push(row.g1_norm);
    }
    if pairs.len() != sidecar.grid_f * sidecar.grid_c || pairs.is_empty() {
        return Err(HarnessError::parse(
            &csv_path,
            format!("expected {} cells, found {}", sidecar.grid_f * sidecar.grid_c, pairs.len()),
        ));
    }
    let snap = LandscapeSnapshot {
        meta: sidecar.meta(),
        pairs,
        g1,
        g1_norm,
        best_pair: sidecar.best_pair,
        actual_pair: sidecar.actual_pair,
        flat: sidecar.flat,
    };
    Ok((snap, sidecar))
}

/// All snapshot sidecars under `dir`, in sorted path order. A snapshot file
/// (either half) names itself.
pub fn find_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.is_file() {
        return Ok(vec![dir.with_extension("json")]);
    }
    let mut out = Vec::new();
    collect_files(dir, &mut |p| {
        p.extension().is_some_and(|e| e == "json") && p.with_extension("csv").is_file()
    }, &mut out)?;
    out.sort();
    Ok(out)
}

/// Files named `name` anywhere under `dir`, in sorted path order.
pub fn find_named(dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    collect_files(dir, &mut |p| p.file_name().is_some_and(|n| n == name), &mut out)?;
    out.sort();
    Ok(out)
}

fn collect_files(dir: &Path, keep: &mut dyn FnMut(&Path) -> bool, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.is_file() {
        if keep(dir) {
            out.push(dir.to_path_buf());
        }
        return Ok(());
    }
    let entries = fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(&path, keep, out)?;
        } else if keep(&path) {
            out.push(path);
        }
    }
    Ok(())
}

pub fn aggregate_csv(rows: &[TrendRow]) -> Vec<u8> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut out = Vec::new();
    writeln!(out, "fe,rank,fdc_mean,disp_mean,nzr_mean,n_defined").unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.fe,
            r.rank,
            opt(r.fdc_mean),
            opt(r.disp_mean),
            r.nzr_mean,
            r.n_defined
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use apland_core::measures::measure_snapshot;
    use apland_core::profiler::ParameterGrid;

    fn snapshot(g1: Vec<f64>) -> LandscapeSnapshot {
        let grid = ParameterGrid::new(3, 4).unwrap();
        let meta = SnapshotMeta {
            run_id: 2,
            function: "sphere".into(),
            fe: 1000,
            individual_rank: 25,
            ..Default::default()
        };
        LandscapeSnapshot::from_g1(meta, grid.pairs().to_vec(), g1, ParameterPair::new(0.31, 0.77))
    }

    #[test]
    fn snapshot_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let snap = snapshot((0..12).map(|k| (k as f64 * 0.37).sin().max(0.0) / 3.0).collect());
        let sidecar = SnapshotSidecar::new(&snap, 1000, (3, 4));
        let path = write_snapshot(dir.path(), &snap, &sidecar).unwrap();
        assert_eq!(path, dir.path().join("1000/25.csv"));
        let (back, side) = read_snapshot(&path).unwrap();
        assert_eq!(back, snap);
        assert_eq!(side, sidecar);
        let text = read_file(&path).unwrap();
        assert!(text.starts_with("F,C,g1,g1_norm\n"));
        assert_eq!(find_snapshots(dir.path()).unwrap(), vec![dir.path().join("1000/25.json")]);
    }

    #[test]
    fn malformed_snapshot_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let snap = snapshot(vec![0.0; 12]);
        let path = write_snapshot(dir.path(), &snap, &SnapshotSidecar::new(&snap, 1000, (3, 4))).unwrap();
        fs::write(&path, "F,C,g1,g1_norm\n0,0,x,0\n").unwrap();
        let err = read_snapshot(&path).unwrap_err().to_string();
        assert!(err.contains("25.csv"), "{err}");
    }

    #[test]
    fn undefined_measures_serialize_as_null_with_reason() {
        let rec = measure_snapshot(&snapshot(vec![0.0; 12]), 0.1);
        let line = MeasureLine::from(&rec);
        let json = serde_json::to_string(&line).unwrap();
        assert_eq!(
            json,
            r#"{"run_id":2,"fe":1000,"rank":25,"fdc":null,"fdc_undefined":"flat","disp":null,"disp_undefined":"flat","nzr":0.0}"#
        );
        let back: MeasureLine = serde_json::from_str(&json).unwrap();
        assert_eq!(back, line);
    }

    #[test]
    fn aggregate_csv_layout() {
        let rows = [TrendRow {
            fe: 100,
            rank: 50,
            fdc_mean: None,
            disp_mean: Some(0.25),
            nzr_mean: 0.5,
            n_defined: 0,
            n_records: 2,
        }];
        assert_eq!(
            String::from_utf8(aggregate_csv(&rows)).unwrap(),
            "fe,rank,fdc_mean,disp_mean,nzr_mean,n_defined\n100,50,,0.25,0.5,0\n"
        );
    }
}
