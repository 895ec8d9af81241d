//! Differential evolution with parameter adaptation, and the machinery to
//! capture adaptive parameter landscapes while it runs.
//!
//! The crate is `no_std` and only needs `alloc`:
//!
//! - [`bench`]: analytic benchmark functions and evaluation counting.
//! - [`de`]: population, mutation, crossover, selection and archive, with
//!   trial generation driven by replayable [`de::FrozenFactors`].
//! - [`pam`]: P-jDE, P-JADE and P-SHADE.
//! - [`profiler`]: the `(F, C)` grid and G1 landscape snapshots.
//! - [`measures`]: FDC, DISP and NZR.
//! - [`engine`]: the iteration loop tying the above together.

#![no_std]

extern crate alloc;

pub mod bench;
pub mod de;
pub mod engine;
pub mod error;
pub mod measures;
pub mod pam;
pub mod profiler;
pub mod rng;

pub use bench::{BenchmarkFunction, EvaluationCounter, FunctionKind};
pub use de::{BoundaryRepair, FrozenFactors, ParameterPair, Strategy};
pub use engine::{Engine, EngineConfig, IterationView, StepReport};
pub use error::{Error, Result};
pub use pam::{Pam, PamKind, PamParams};
pub use profiler::{LandscapeSnapshot, ParameterGrid, SnapshotMeta};
