//! Analytic benchmark functions.
//!
//! Six bases cover the five categories of the noiseless black-box suite:
//! every instance is `f(x) = base(T(x - shift)) + optimum_value` where `T`
//! is an orthogonal rotation (identity for separable functions), composed
//! with a fixed scaling for the Rosenbrock variant. The search domain is
//! `[-5, 5]^d` and shifts are drawn from `[-4, 4]^d`, so the optimum always
//! lies strictly inside the domain.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;
use core::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{Purpose, Streams};

/// Lower bound of every search coordinate.
pub const DOMAIN_LOWER: f64 = -5.0;
/// Upper bound of every search coordinate.
pub const DOMAIN_UPPER: f64 = 5.0;
/// Shifts are drawn from `[-SHIFT_RANGE, SHIFT_RANGE]` per coordinate.
pub const SHIFT_RANGE: f64 = 4.0;
/// Errors below this threshold count as zero.
pub const ERROR_FLOOR: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Category {
    Separable,
    LowModerateConditioning,
    HighConditioningUnimodal,
    MultimodalAdequateStructure,
    MultimodalWeakStructure,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Separable => "separable",
            Category::LowModerateConditioning => "low-moderate-conditioning",
            Category::HighConditioningUnimodal => "high-conditioning-unimodal",
            Category::MultimodalAdequateStructure => "multimodal-adequate-structure",
            Category::MultimodalWeakStructure => "multimodal-weak-structure",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FunctionKind {
    Sphere,
    Ellipsoid,
    Rastrigin,
    RosenbrockRotated,
    RastriginRotated,
    Katsuura,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 6] = [
        FunctionKind::Sphere,
        FunctionKind::Ellipsoid,
        FunctionKind::Rastrigin,
        FunctionKind::RosenbrockRotated,
        FunctionKind::RastriginRotated,
        FunctionKind::Katsuura,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionKind::Sphere => "sphere",
            FunctionKind::Ellipsoid => "ellipsoid",
            FunctionKind::Rastrigin => "rastrigin",
            FunctionKind::RosenbrockRotated => "rosenbrock-rotated",
            FunctionKind::RastriginRotated => "rastrigin-rotated",
            FunctionKind::Katsuura => "katsuura",
        }
    }

    pub fn category(self) -> Category {
        match self {
            FunctionKind::Sphere | FunctionKind::Rastrigin => Category::Separable,
            FunctionKind::RosenbrockRotated => Category::LowModerateConditioning,
            FunctionKind::Ellipsoid => Category::HighConditioningUnimodal,
            FunctionKind::RastriginRotated => Category::MultimodalAdequateStructure,
            FunctionKind::Katsuura => Category::MultimodalWeakStructure,
        }
    }

    /// Whether instances of this kind carry a random rotation.
    pub fn is_rotated(self) -> bool {
        self.category() != Category::Separable
    }

    /// The unshifted, unrotated base function with its minimum 0 at the origin.
    pub fn base(self, z: &[f64]) -> f64 {
        match self {
            FunctionKind::Sphere => z.iter().map(|v| v * v).sum(),
            FunctionKind::Ellipsoid => ellipsoid(z),
            FunctionKind::Rastrigin | FunctionKind::RastriginRotated => rastrigin(z),
            FunctionKind::RosenbrockRotated => rosenbrock(z),
            FunctionKind::Katsuura => katsuura(z),
        }
    }
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown function `{s}`")))
    }
}

fn ellipsoid(z: &[f64]) -> f64 {
    let d = z.len();
    if d == 1 {
        return z[0] * z[0];
    }
    z.iter()
        .enumerate()
        .map(|(j, v)| libm::pow(1e6, j as f64 / (d - 1) as f64) * v * v)
        .sum()
}

fn rastrigin(z: &[f64]) -> f64 {
    z.iter()
        .map(|v| v * v - 10.0 * libm::cos(2.0 * PI * v) + 10.0)
        .sum()
}

// Shifted by one so that the minimum sits at z = 0.
fn rosenbrock(z: &[f64]) -> f64 {
    z.windows(2)
        .map(|w| {
            let (a, b) = (w[0] + 1.0, w[1] + 1.0);
            100.0 * (a * a - b) * (a * a - b) + (a - 1.0) * (a - 1.0)
        })
        .sum()
}

fn katsuura(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let exponent = 10.0 / libm::pow(d, 1.2);
    let scale = 10.0 / (d * d);
    let product: f64 = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let inner: f64 = (1..=32)
                .map(|j| {
                    let p = libm::ldexp(1.0, j);
                    let t = p * v;
                    libm::fabs(t - libm::round(t)) / p
                })
                .sum();
            libm::pow(1.0 + (i + 1) as f64 * inner, exponent)
        })
        .product();
    scale * product - scale
}

/// Counts objective evaluations, split between search and profiling.
#[derive(Debug, Default)]
pub struct EvaluationCounter {
    counted: AtomicU64,
    uncounted: AtomicU64,
}

impl EvaluationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Evaluations consumed by the search (budgeted).
    pub fn counted(&self) -> u64 {
        self.counted.load(Ordering::Relaxed)
    }

    /// Evaluations consumed by landscape profiling (not budgeted).
    pub fn uncounted(&self) -> u64 {
        self.uncounted.load(Ordering::Relaxed)
    }

    fn record(&self, counted: bool) {
        let slot = if counted { &self.counted } else { &self.uncounted };
        slot.fetch_add(1, Ordering::Relaxed);
    }
}

/// A shifted and (optionally) rotated benchmark instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkFunction {
    kind: FunctionKind,
    seed: u64,
    shift: Vec<f64>,
    rotation: Vec<f64>,
    optimum_value: f64,
    scale: f64,
}

impl BenchmarkFunction {
    /// Builds a seeded instance: random shift in `[-4, 4]^d` and, for
    /// non-separable kinds, a random orthogonal rotation.
    pub fn new(kind: FunctionKind, d: usize, seed: u64) -> Result<Self> {
        check_dimension(d)?;
        let mut rng = Streams::new(seed).stream(Purpose::Function);
        let shift = (0..d)
            .map(|_| rng.random_range(-SHIFT_RANGE..=SHIFT_RANGE))
            .collect();
        let rotation = if kind.is_rotated() {
            random_rotation(d, &mut rng)
        } else {
            identity(d)
        };
        let mut f = Self::with_transform(kind, shift, rotation)?;
        f.seed = seed;
        Ok(f)
    }

    /// Builds an instance from an explicit shift and row-major `d x d` rotation.
    pub fn with_transform(kind: FunctionKind, shift: Vec<f64>, rotation: Vec<f64>) -> Result<Self> {
        let d = shift.len();
        check_dimension(d)?;
        if rotation.len() != d * d {
            return Err(Error::Domain(alloc::format!(
                "rotation has {} entries, expected {}",
                rotation.len(),
                d * d
            )));
        }
        let scale = match kind {
            FunctionKind::RosenbrockRotated => libm::fmax(1.0, libm::sqrt(d as f64) / 8.0),
            _ => 1.0,
        };
        Ok(BenchmarkFunction {
            kind,
            seed: 0,
            shift,
            rotation,
            optimum_value: 0.0,
            scale,
        })
    }

    /// Parses `name` and builds a seeded instance.
    pub fn from_name(name: &str, d: usize, seed: u64) -> Result<Self> {
        Self::new(name.parse()?, d, seed)
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn category(&self) -> Category {
        self.kind.category()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (DOMAIN_LOWER, DOMAIN_UPPER)
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// Row-major rotation matrix.
    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn optimum_location(&self) -> &[f64] {
        &self.shift
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    /// Objective value without touching any counter.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension());
        let d = self.dimension();
        let diff: Vec<f64> = x.iter().zip(&self.shift).map(|(a, b)| a - b).collect();
        let z: Vec<f64> = if self.kind.is_rotated() {
            self.rotation
                .chunks_exact(d)
                .map(|row| self.scale * row.iter().zip(&diff).map(|(r, v)| r * v).sum::<f64>())
                .collect()
        } else {
            diff
        };
        self.kind.base(&z) + self.optimum_value
    }

    /// Objective value, recorded as a search (`counted`) or profiling evaluation.
    pub fn evaluate(&self, x: &[f64], counter: &EvaluationCounter, counted: bool) -> f64 {
        counter.record(counted);
        self.value(x)
    }

    /// Best-so-far error with values below [`ERROR_FLOOR`] treated as zero.
    pub fn error_value(&self, best_so_far: f64) -> f64 {
        error_value(best_so_far, self.optimum_value)
    }
}

/// `max(best - optimum, 0)`, floored to exactly zero below 1e-8.
pub fn error_value(best_so_far: f64, optimum_value: f64) -> f64 {
    let err = libm::fmax(best_so_far - optimum_value, 0.0);
    if err < ERROR_FLOOR {
        0.0
    } else {
        err
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Domain(alloc::format!("dimension must be at least 2, got {d}")));
    }
    Ok(())
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

/// Orthonormalizes the rows of a standard-normal matrix (modified Gram-Schmidt).
fn random_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut m: Vec<f64> = (0..d * d).map(|_| StandardNormal.sample(rng)).collect();
        let mut degenerate = false;
        for i in 0..d {
            for k in 0..i {
                let dot: f64 = (0..d).map(|j| m[i * d + j] * m[k * d + j]).sum();
                for j in 0..d {
                    m[i * d + j] -= dot * m[k * d + j];
                }
            }
            let norm = libm::sqrt((0..d).map(|j| m[i * d + j] * m[i * d + j]).sum::<f64>());
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            for j in 0..d {
                m[i * d + j] /= norm;
            }
        }
        if !degenerate {
            return m;
        }
    }
}

/// Catalog entry for listing.
pub fn catalog() -> Vec<(FunctionKind, alloc::string::String)> {
    FunctionKind::ALL
        .into_iter()
        .map(|k| (k, k.category().to_string()))
        .collect()
}
