use std::collections::BTreeSet;
use std::fs;

use apland::formats::{find_snapshots, read_jsonl, read_snapshot, MeasureLine, TraceLine};
use apland::{aggregate_measures, execute_run, run_experiment, ExperimentConfig, ResolvedConfig, RunRecord};

fn config(runs: usize) -> ResolvedConfig {
    ExperimentConfig {
        function: "rastrigin".into(),
        dimension: 4,
        population_size: 12,
        budget: Some(1500),
        runs,
        grid_f: 5,
        grid_c: 4,
        cadence: 300,
        initial_checkpoint: 36,
        seed: 3,
        ..Default::default()
    }
    .resolve()
    .unwrap()
}

#[test]
fn snapshots_exist_exactly_at_scheduled_points() {
    let cfg = config(2);
    let dir = tempfile::tempdir().unwrap();
    let campaign = run_experiment(&cfg, "", dir.path()).unwrap();
    for run in &campaign.runs {
        let run_dir = campaign.dir.join(format!("run-{}", run.record.run));
        let found: BTreeSet<(u64, usize)> = find_snapshots(&run_dir.join("snapshots"))
            .unwrap()
            .iter()
            .map(|p| {
                let (_, side) = read_snapshot(p).unwrap();
                assert_eq!(side.fe, side.checkpoint, "every checkpoint lands on an iteration start here");
                (side.checkpoint, side.rank)
            })
            .collect();
        let schedule = cfg.checkpoints();
        let expected: BTreeSet<(u64, usize)> = run
            .captured
            .iter()
            .flat_map(|&cp| cfg.ranks.iter().map(move |&r| (cp, r)))
            .collect();
        assert_eq!(found, expected);
        assert!(run.captured.iter().all(|cp| schedule.contains(cp)));
        // Every checkpoint an iteration started at was captured.
        let starts: BTreeSet<u64> = std::iter::once(cfg.population_size as u64)
            .chain(run.trace.iter().map(|t| t.fe))
            .filter(|fe| *fe + cfg.population_size as u64 <= run.record.fe_used)
            .collect();
        for cp in &schedule {
            assert_eq!(run.captured.contains(cp), starts.contains(cp), "checkpoint {cp}");
        }
    }
}

#[test]
fn run_records_are_consistent() {
    let cfg = config(3);
    let dir = tempfile::tempdir().unwrap();
    let campaign = run_experiment(&cfg, "", dir.path()).unwrap();
    let records: Vec<RunRecord> = read_jsonl(&campaign.dir.join("runs.jsonl")).unwrap();
    assert_eq!(records.iter().map(|r| r.run).collect::<Vec<_>>(), [0, 1, 2]);
    assert_eq!(records.iter().map(|r| r.seed).collect::<BTreeSet<_>>().len(), 3);
    for (k, rec) in records.iter().enumerate() {
        let trace: Vec<TraceLine> = read_jsonl(&campaign.dir.join(format!("run-{k}/trace.jsonl"))).unwrap();
        assert!(trace.windows(2).all(|w| w[1].best_error <= w[0].best_error));
        assert_eq!(trace.last().unwrap().best_error, rec.final_error);
        assert!(rec.fe_used <= cfg.budget);
        assert_eq!(rec.uncounted, rec.snapshots as u64 * 20);
        for p in &rec.report {
            assert!(campaign.runs[k].captured.contains(&p.snapped.unwrap()));
        }
        // fe_at_best lies within the iteration where the error last dropped.
        let last_drop = trace
            .iter()
            .enumerate()
            .rfind(|(j, t)| *j == 0 || t.best_error < trace[j - 1].best_error)
            .unwrap()
            .1;
        assert!(rec.fe_at_best <= last_drop.fe && rec.fe_at_best > last_drop.fe - cfg.population_size as u64);
    }
}

#[test]
fn aggregation_ignores_file_order() {
    let cfg = config(3);
    let dir = tempfile::tempdir().unwrap();
    let campaign = run_experiment(&cfg, "", dir.path()).unwrap();
    let mut lines: Vec<MeasureLine> = Vec::new();
    for k in [2, 0, 1] {
        lines.extend(read_jsonl::<MeasureLine>(&campaign.dir.join(format!("run-{k}/measures.jsonl"))).unwrap());
    }
    let mut reversed = lines.clone();
    reversed.reverse();
    assert_eq!(aggregate_measures(&lines), aggregate_measures(&reversed));
    let csv = fs::read_to_string(campaign.dir.join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + aggregate_measures(&lines).len());
}

#[test]
fn runs_match_between_campaign_and_single_execution() {
    let cfg = config(2);
    let dir = tempfile::tempdir().unwrap();
    let campaign = run_experiment(&cfg, "", dir.path()).unwrap();
    for k in 0..2 {
        assert_eq!(execute_run(&cfg, k, None).unwrap(), campaign.runs[k]);
    }
}
