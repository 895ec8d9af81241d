//! Parameter adaptation methods: P-jDE, P-JADE and P-SHADE.
//!
//! Each method hands out one [`ParameterPair`] per individual before trial
//! generation and learns from the iteration's [`SuccessRecords`] afterwards.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};
use rand_distr::{Cauchy, Distribution, Normal};

use crate::de::{ParameterPair, SuccessRecords, SuccessSets};
use crate::error::{Error, Result};

/// Scale of the Cauchy (for F) and normal (for C) sampling.
pub const SAMPLING_SCALE: f64 = 0.1;
/// Redraw attempts for a non-positive Cauchy draw before giving up.
pub const CAUCHY_MAX_REDRAWS: usize = 100;
/// Returned when every Cauchy redraw was non-positive.
pub const CAUCHY_FALLBACK: f64 = 1e-3;

/// Uniform draw from `[a, b]`.
pub fn randu<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a == b {
        return a;
    }
    rng.random_range(a..=b)
}

/// Normal draw clipped into `[0, 1]`.
pub fn sample_normal_clipped<R: Rng + ?Sized>(mu: f64, sigma: f64, rng: &mut R) -> f64 {
    let normal = Normal::new(mu, sigma).expect("sigma must be positive and finite");
    clip_unit(normal.sample(rng))
}

pub fn clip_unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Cauchy draw truncated to 1 above and redrawn while non-positive.
pub fn sample_cauchy_clamped<R: Rng + ?Sized>(mu: f64, gamma: f64, rng: &mut R) -> f64 {
    let cauchy = Cauchy::new(mu, gamma).expect("gamma must be positive and finite");
    cauchy_clamped_from(|| cauchy.sample(rng))
}

/// The truncation/redraw rule applied to a stream of raw Cauchy draws.
pub fn cauchy_clamped_from(mut draw: impl FnMut() -> f64) -> f64 {
    for _ in 0..CAUCHY_MAX_REDRAWS {
        let v = draw();
        if v > 0.0 {
            return v.min(1.0);
        }
    }
    CAUCHY_FALLBACK
}

/// `sum(s^2) / sum(s)`, evaluated as `sum(s * (s / sum(s)))`. Callers guard
/// against empty input.
pub fn lehmer_mean(s: &[f64]) -> f64 {
    let total: f64 = s.iter().sum();
    s.iter().map(|v| v * (v / total)).sum()
}

pub fn arithmetic_mean(s: &[f64]) -> f64 {
    s.iter().sum::<f64>() / s.len() as f64
}

/// P-jDE: one self-adapted pair per individual.
#[derive(Clone, Debug, PartialEq)]
pub struct PjdeState {
    pub stored_f: Vec<f64>,
    pub stored_c: Vec<f64>,
    pub tau_f: f64,
    pub tau_c: f64,
    pub trial_f: Vec<f64>,
    pub trial_c: Vec<f64>,
    sampled: Vec<bool>,
}

impl PjdeState {
    pub const INITIAL_F: f64 = 0.5;
    pub const INITIAL_C: f64 = 0.9;

    pub fn new(n: usize, tau_f: f64, tau_c: f64) -> Self {
        PjdeState {
            stored_f: vec![Self::INITIAL_F; n],
            stored_c: vec![Self::INITIAL_C; n],
            tau_f,
            tau_c,
            trial_f: vec![Self::INITIAL_F; n],
            trial_c: vec![Self::INITIAL_C; n],
            sampled: vec![false; n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) -> ParameterPair {
        let f = if rng.random::<f64>() < self.tau_f {
            randu(0.1, 1.0, rng)
        } else {
            self.stored_f[i]
        };
        let c = if rng.random::<f64>() < self.tau_c {
            randu(0.0, 1.0, rng)
        } else {
            self.stored_c[i]
        };
        self.trial_f[i] = f;
        self.trial_c[i] = c;
        self.sampled[i] = true;
        ParameterPair::new(f, c)
    }

    /// Keeps the trial values of successful individuals.
    pub fn update(&mut self, successful: &[bool]) -> Result<()> {
        if successful.len() != self.stored_f.len() {
            return Err(Error::State(alloc::format!(
                "{} success flags for {} individuals",
                successful.len(),
                self.stored_f.len()
            )));
        }
        if let Some(i) = self.sampled.iter().position(|s| !s) {
            return Err(Error::State(alloc::format!(
                "update before individual {i} was sampled"
            )));
        }
        for (i, &ok) in successful.iter().enumerate() {
            if ok {
                self.stored_f[i] = self.trial_f[i];
                self.stored_c[i] = self.trial_c[i];
            }
        }
        self.sampled.iter_mut().for_each(|s| *s = false);
        Ok(())
    }
}

/// P-JADE: two adaptive means.
#[derive(Clone, Debug, PartialEq)]
pub struct PjadeState {
    pub mu_f: f64,
    pub mu_c: f64,
    /// Learning rate.
    pub c: f64,
}

impl PjadeState {
    pub fn new(c: f64) -> Self {
        PjadeState { mu_f: 0.5, mu_c: 0.5, c }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ParameterPair {
        let f = sample_cauchy_clamped(self.mu_f, SAMPLING_SCALE, rng);
        let c = sample_normal_clipped(self.mu_c, SAMPLING_SCALE, rng);
        ParameterPair::new(f, c)
    }

    /// Lehmer mean for F, arithmetic mean for C; no-op on empty sets.
    pub fn update(&mut self, s: &SuccessSets) {
        if s.is_empty() {
            return;
        }
        self.mu_f = (1.0 - self.c) * self.mu_f + self.c * lehmer_mean(&s.f);
        self.mu_c = (1.0 - self.c) * self.mu_c + self.c * arithmetic_mean(&s.c);
    }
}

/// P-SHADE: circular success-history memories.
#[derive(Clone, Debug, PartialEq)]
pub struct PshadeState {
    pub memory_f: Vec<f64>,
    pub memory_c: Vec<f64>,
    /// Zero-based slot the next update writes to.
    pub k: usize,
    /// Memory slot used by the most recent sample.
    pub last_slot: Option<usize>,
}

impl PshadeState {
    pub fn new(h: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::Config("memory size must be positive".into()));
        }
        Ok(PshadeState {
            memory_f: vec![0.5; h],
            memory_c: vec![0.5; h],
            k: 0,
            last_slot: None,
        })
    }

    pub fn memory_size(&self) -> usize {
        self.memory_f.len()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ParameterPair {
        let r = rng.random_range(0..self.memory_size());
        self.last_slot = Some(r);
        let f = sample_cauchy_clamped(self.memory_f[r], SAMPLING_SCALE, rng);
        let c = sample_normal_clipped(self.memory_c[r], SAMPLING_SCALE, rng);
        ParameterPair::new(f, c)
    }

    /// Writes Lehmer means of both sets to slot `k` and advances `k`.
    pub fn update(&mut self, s: &SuccessSets) {
        if s.is_empty() {
            return;
        }
        self.memory_f[self.k] = lehmer_mean(&s.f);
        self.memory_c[self.k] = lehmer_mean(&s.c);
        self.k = (self.k + 1) % self.memory_size();
    }
}

/// Hyper-parameters of the adaptation methods.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PamParams {
    pub tau_f: f64,
    pub tau_c: f64,
    pub learning_rate: f64,
    pub memory_size: usize,
}

impl Default for PamParams {
    fn default() -> Self {
        PamParams {
            tau_f: 0.1,
            tau_c: 0.1,
            learning_rate: 0.1,
            memory_size: 10,
        }
    }
}

/// Which adaptation method drives a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PamKind {
    Pjde,
    Pjade,
    Pshade,
    Fixed(ParameterPair),
}

impl PamKind {
    /// Parses `pjde`, `pjade`, `pshade` or `fixed:<F>:<C>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pjde" => Ok(PamKind::Pjde),
            "pjade" => Ok(PamKind::Pjade),
            "pshade" => Ok(PamKind::Pshade),
            other => {
                let mut parts = other.split(':');
                let bad = || Error::Config(alloc::format!("unknown PAM `{other}`"));
                if parts.next() != Some("fixed") {
                    return Err(bad());
                }
                let f: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let c: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if parts.next().is_some() || f.is_nan() || f <= 0.0 || !(0.0..=1.0).contains(&c) {
                    return Err(bad());
                }
                Ok(PamKind::Fixed(ParameterPair::new(f, c)))
            }
        }
    }
}

impl core::fmt::Display for PamKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PamKind::Pjde => f.write_str("pjde"),
            PamKind::Pjade => f.write_str("pjade"),
            PamKind::Pshade => f.write_str("pshade"),
            PamKind::Fixed(p) => write!(f, "fixed:{}:{}", p.f, p.c),
        }
    }
}

/// A running adaptation method.
#[derive(Clone, Debug, PartialEq)]
pub enum Pam {
    Pjde(PjdeState),
    Pjade(PjadeState),
    Pshade(PshadeState),
    /// Classical DE: the same pair for everyone, always.
    Fixed(ParameterPair),
}

impl Pam {
    pub fn new(kind: PamKind, n: usize, params: &PamParams) -> Result<Self> {
        Ok(match kind {
            PamKind::Pjde => Pam::Pjde(PjdeState::new(n, params.tau_f, params.tau_c)),
            PamKind::Pjade => Pam::Pjade(PjadeState::new(params.learning_rate)),
            PamKind::Pshade => Pam::Pshade(PshadeState::new(params.memory_size)?),
            PamKind::Fixed(p) => Pam::Fixed(p),
        })
    }

    pub fn sample(&mut self, i: usize, rng: &mut dyn RngCore) -> ParameterPair {
        match self {
            Pam::Pjde(s) => s.sample(i, rng),
            Pam::Pjade(s) => s.sample(rng),
            Pam::Pshade(s) => s.sample(rng),
            Pam::Fixed(p) => *p,
        }
    }

    pub fn update(&mut self, records: &SuccessRecords) -> Result<()> {
        match self {
            Pam::Pjde(s) => s.update(&records.successful),
            Pam::Pjade(s) => {
                s.update(&records.success_sets());
                Ok(())
            }
            Pam::Pshade(s) => {
                s.update(&records.success_sets());
                Ok(())
            }
            Pam::Fixed(_) => Ok(()),
        }
    }
}
