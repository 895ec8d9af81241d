//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
//! runtime failures (I/O, malformed artifacts).

use std::path::{Path, PathBuf};

use apland_core::bench::catalog;
use apland_core::measures::measure_snapshot;
use clap::{Args, Parser, Subcommand};

use crate::analysis::{aggregate_measures, select_median_run, RunRecord};
use crate::config::{ExperimentConfig, ResolvedConfig};
use crate::error::{HarnessError, Result};
use crate::formats::{
    aggregate_csv, find_named, find_snapshots, read_jsonl, read_snapshot, to_jsonl, write_file, MeasureLine,
};
use crate::render::render_svg;
use crate::run::run_experiment;

#[derive(Debug, Parser)]
#[command(name = "apland", version, about = "Adaptive parameter landscape profiling for differential evolution")]
pub struct Cli {
    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Root directory for outputs.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a campaign and write its artifact tree.
    Run(RunArgs),
    /// Pick the median run of a campaign directory.
    Median {
        /// Campaign directory (containing runs.jsonl) or a runs.jsonl file.
        path: PathBuf,
    },
    /// Compute measures for every snapshot under a directory.
    Measure {
        /// Snapshot file or directory to scan.
        path: PathBuf,
        /// Write JSONL here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Average measures per (checkpoint, rank) into a trend CSV.
    Aggregate {
        /// measures.jsonl files or directories containing them.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render SVG heatmaps for snapshots.
    Render {
        /// Snapshot file or directory to scan.
        path: PathBuf,
        /// Directory for the SVGs; defaults to each snapshot's `snapshots/` directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// List the benchmark functions.
    Functions,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Disable profiling (search only).
    #[arg(long)]
    pub no_profile: bool,
    /// Write population dumps at each checkpoint.
    #[arg(long)]
    pub dump_population: bool,
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<(ResolvedConfig, String)> {
    let (mut cfg, text) = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => (ExperimentConfig::default(), String::new()),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let path = cli.config.clone().unwrap_or_else(|| PathBuf::from("<defaults>"));
    let resolved = cfg.resolve().map_err(|message| HarnessError::Config { path, message })?;
    Ok((resolved, text))
}

fn execute(cli: &Cli, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> Result<()> {
    let stdout = |out: &mut dyn std::io::Write, bytes: &[u8]| {
        out.write_all(bytes).map_err(|e| HarnessError::io("<stdout>", e))
    };
    match &cli.command {
        Command::Run(args) => {
            let (mut cfg, text) = load_config(cli)?;
            cfg.profile &= !args.no_profile;
            cfg.dump_population |= args.dump_population;
            let campaign = run_experiment(&cfg, &text, &cli.out_dir)?;
            let m = &campaign.runs[campaign.median].record;
            stdout(
                out,
                format!(
                    "{}\nmedian run {} (error {:e}, fe_at_best {})\n",
                    campaign.dir.display(),
                    m.run,
                    m.final_error,
                    m.fe_at_best
                )
                .as_bytes(),
            )
        }
        Command::Median { path } => {
            let file = if path.is_dir() { path.join("runs.jsonl") } else { path.clone() };
            let records: Vec<RunRecord> = read_jsonl(&file)?;
            let idx = select_median_run(&records)?;
            let mut line = serde_json::to_vec(&records[idx]).expect("serializable");
            line.push(b'\n');
            stdout(out, &line)
        }
        Command::Measure { path, output } => {
            let fraction = load_config(cli)?.0.disp_fraction;
            let mut lines = Vec::new();
            for p in find_snapshots(path)? {
                let (snap, side) = read_snapshot(&p)?;
                let mut line = MeasureLine::from(&measure_snapshot(&snap, fraction));
                line.fe = side.checkpoint;
                lines.push(line);
            }
            lines.sort_by_key(|l| (l.fe, l.rank, l.run_id));
            emit(out, output.as_deref(), &to_jsonl(&lines))
        }
        Command::Aggregate { paths, output } => {
            let mut lines = Vec::new();
            for p in paths {
                let files = if p.is_dir() { find_named(p, "measures.jsonl")? } else { vec![p.clone()] };
                for f in files {
                    lines.extend(read_jsonl::<MeasureLine>(&f)?);
                }
            }
            if lines.is_empty() {
                return Err(HarnessError::Usage("no measure records found".into()));
            }
            emit(out, output.as_deref(), &aggregate_csv(&aggregate_measures(&lines)))
        }
        Command::Render { path, output } => {
            let snapshots = find_snapshots(path)?;
            if snapshots.is_empty() {
                return Err(HarnessError::Usage(format!("no snapshots under {}", path.display())));
            }
            for p in snapshots {
                let (snap, side) = read_snapshot(&p)?;
                match render_svg(&snap, (side.grid_f, side.grid_c)) {
                    Some(svg) => {
                        let dir = match output {
                            Some(d) => d.clone(),
                            None => p.parent().and_then(Path::parent).unwrap_or(Path::new(".")).to_path_buf(),
                        };
                        let target = dir.join(format!("{}-rank{}.svg", side.checkpoint, side.rank));
                        write_file(&target, svg.as_bytes())?;
                        stdout(out, format!("{}\n", target.display()).as_bytes())?;
                    }
                    None => {
                        let _ = writeln!(err, "skipped flat snapshot {}", p.display());
                    }
                }
            }
            Ok(())
        }
        Command::Functions => {
            let mut text = String::new();
            for (kind, category) in catalog() {
                text.push_str(&format!("{:<20} {category}\n", kind.name()));
            }
            stdout(out, text.as_bytes())
        }
    }
}

fn emit(out: &mut dyn std::io::Write, path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_file(p, bytes),
        None => out.write_all(bytes).map_err(|e| HarnessError::io("<stdout>", e)),
    }
}
