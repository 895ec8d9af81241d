//! Experiment configuration.
//!
//! Config files are flat TOML key/value documents. Every key is optional;
//! omitted keys take the defaults below. Keys whose defaults depend on other
//! keys (`budget`, `ranks`, `archive_capacity`, `function_seed`) are
//! resolved after parsing.
//!
//! | key | default |
//! |-----|---------|
//! | `function` | `"sphere"` |
//! | `function_seed` | derived from `seed` |
//! | `dimension` | `10` |
//! | `population_size` | `100` |
//! | `budget` | `10000 * dimension` |
//! | `runs` | `15` |
//! | `pam` | `"pshade"` (`pjde`, `pjade`, `pshade`, `fixed:<F>:<C>`) |
//! | `tau_f`, `tau_c` | `0.1` |
//! | `learning_rate` | `0.1` |
//! | `memory_size` | `10` |
//! | `strategy` | `"current-to-pbest1"` (or `"rand1"`) |
//! | `p` | `0.05` |
//! | `archive_capacity` | `population_size` |
//! | `boundary` | `"midpoint"` (or `"clamp"`) |
//! | `grid_f`, `grid_c` | `50` |
//! | `ranks` | quartiles of the population, e.g. `[25, 50, 75, 100]` |
//! | `include_best` | `false` (adds rank 1) |
//! | `initial_checkpoint` | `100` |
//! | `cadence` | `1000` |
//! | `profile` | `true` |
//! | `render` | `true` |
//! | `disp_fraction` | `0.1` |
//! | `stop_at_target` | `true` |
//! | `dump_population` | `false` |
//! | `seed` | `0` |
//!
//! The search domain is always `[-5, 5]^dimension`. Seeds are non-negative
//! 63-bit integers (TOML integers are signed).

use std::path::Path;

use apland_core::bench::FunctionKind;
use apland_core::de::{BoundaryRepair, Strategy};
use apland_core::engine::EngineConfig;
use apland_core::pam::{PamKind, PamParams};
use apland_core::rng::mix64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub function: String,
    pub function_seed: Option<u64>,
    pub dimension: usize,
    pub population_size: usize,
    pub budget: Option<u64>,
    pub runs: usize,
    pub pam: String,
    pub tau_f: f64,
    pub tau_c: f64,
    pub learning_rate: f64,
    pub memory_size: usize,
    pub strategy: String,
    pub p: f64,
    pub archive_capacity: Option<usize>,
    pub boundary: String,
    pub grid_f: usize,
    pub grid_c: usize,
    pub ranks: Option<Vec<usize>>,
    pub include_best: bool,
    pub initial_checkpoint: u64,
    pub cadence: u64,
    pub profile: bool,
    pub render: bool,
    pub disp_fraction: f64,
    pub stop_at_target: bool,
    pub dump_population: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            function: "sphere".into(),
            function_seed: None,
            dimension: 10,
            population_size: 100,
            budget: None,
            runs: 15,
            pam: "pshade".into(),
            tau_f: 0.1,
            tau_c: 0.1,
            learning_rate: 0.1,
            memory_size: 10,
            strategy: "current-to-pbest1".into(),
            p: 0.05,
            archive_capacity: None,
            boundary: "midpoint".into(),
            grid_f: 50,
            grid_c: 50,
            ranks: None,
            include_best: false,
            initial_checkpoint: 100,
            cadence: 1000,
            profile: true,
            render: true,
            disp_fraction: 0.1,
            stop_at_target: true,
            dump_population: false,
            seed: 0,
        }
    }
}

/// A validated configuration with every derived default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub function: FunctionKind,
    pub function_seed: u64,
    pub dimension: usize,
    pub population_size: usize,
    pub budget: u64,
    pub runs: usize,
    pub pam: String,
    pub tau_f: f64,
    pub tau_c: f64,
    pub learning_rate: f64,
    pub memory_size: usize,
    pub strategy: String,
    pub p: f64,
    pub archive_capacity: usize,
    pub boundary: String,
    pub grid_f: usize,
    pub grid_c: usize,
    pub ranks: Vec<usize>,
    pub initial_checkpoint: u64,
    pub cadence: u64,
    pub profile: bool,
    pub render: bool,
    pub disp_fraction: f64,
    pub stop_at_target: bool,
    pub dump_population: bool,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads a config file; missing or malformed files are configuration errors.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok((Self::from_toml(&text, path)?, text))
    }

    pub fn resolve(&self) -> std::result::Result<ResolvedConfig, String> {
        let function: FunctionKind = self.function.parse().map_err(|e| format!("{e}"))?;
        if self.dimension < 2 {
            return Err(format!("dimension must be at least 2, got {}", self.dimension));
        }
        let n = self.population_size;
        if n < 4 {
            return Err(format!("population_size must be at least 4, got {n}"));
        }
        PamKind::parse(&self.pam).map_err(|e| format!("{e}"))?;
        parse_strategy(&self.strategy, self.p)?;
        parse_boundary(&self.boundary)?;
        let budget = self.budget.unwrap_or(10_000 * self.dimension as u64);
        if budget < n as u64 {
            return Err(format!("budget {budget} is smaller than the population ({n})"));
        }
        if self.runs == 0 {
            return Err("runs must be positive".into());
        }
        if self.grid_f < 2 || self.grid_c < 2 {
            return Err("grid resolutions must be at least 2".into());
        }
        if self.cadence == 0 {
            return Err("cadence must be at least 1".into());
        }
        if self.memory_size == 0 {
            return Err("memory_size must be positive".into());
        }
        if !(self.disp_fraction > 0.0 && self.disp_fraction <= 1.0) {
            return Err("disp_fraction must lie in (0, 1]".into());
        }
        let mut ranks = self
            .ranks
            .clone()
            .unwrap_or_else(|| (1..=4).map(|q| (q * n / 4).max(1)).collect());
        if self.include_best {
            ranks.push(1);
        }
        ranks.sort_unstable();
        ranks.dedup();
        if let Some(bad) = ranks.iter().find(|r| **r == 0 || **r > n) {
            return Err(format!("rank {bad} outside 1..={n}"));
        }
        Ok(ResolvedConfig {
            function,
            function_seed: self
                .function_seed
                .unwrap_or_else(|| mix64(self.seed ^ 0xF00D) >> 1),
            dimension: self.dimension,
            population_size: n,
            budget,
            runs: self.runs,
            pam: self.pam.clone(),
            tau_f: self.tau_f,
            tau_c: self.tau_c,
            learning_rate: self.learning_rate,
            memory_size: self.memory_size,
            strategy: self.strategy.clone(),
            p: self.p,
            archive_capacity: self.archive_capacity.unwrap_or(n),
            boundary: self.boundary.clone(),
            grid_f: self.grid_f,
            grid_c: self.grid_c,
            ranks,
            initial_checkpoint: self.initial_checkpoint,
            cadence: self.cadence,
            profile: self.profile,
            render: self.render,
            disp_fraction: self.disp_fraction,
            stop_at_target: self.stop_at_target,
            dump_population: self.dump_population,
            seed: self.seed,
        })
    }
}

pub fn parse_strategy(name: &str, p: f64) -> std::result::Result<Strategy, String> {
    match name {
        "rand1" | "rand/1" => Ok(Strategy::Rand1),
        "current-to-pbest1" | "current-to-pbest/1" => {
            Strategy::current_to_pbest(p).map_err(|e| format!("{e}"))
        }
        other => Err(format!("unknown strategy `{other}`")),
    }
}

pub fn parse_boundary(name: &str) -> std::result::Result<BoundaryRepair, String> {
    match name {
        "midpoint" => Ok(BoundaryRepair::Midpoint),
        "clamp" => Ok(BoundaryRepair::Clamp),
        other => Err(format!("unknown boundary handling `{other}`")),
    }
}

impl ResolvedConfig {
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            population_size: self.population_size,
            strategy: parse_strategy(&self.strategy, self.p).expect("validated"),
            repair: parse_boundary(&self.boundary).expect("validated"),
            archive_capacity: self.archive_capacity,
            pam: PamKind::parse(&self.pam).expect("validated"),
            pam_params: PamParams {
                tau_f: self.tau_f,
                tau_c: self.tau_c,
                learning_rate: self.learning_rate,
                memory_size: self.memory_size,
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("resolved config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the resolved TOML.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    /// Capture checkpoints: the initial point, then every `cadence` evaluations.
    pub fn checkpoints(&self) -> Vec<u64> {
        let mut points = vec![self.initial_checkpoint];
        let mut c = self.cadence;
        while c <= self.budget {
            points.push(c);
            c += self.cadence;
        }
        points.sort_unstable();
        points.dedup();
        points
    }
}
