//! The DE iteration loop with a PAM and an inspection hook.
//!
//! Each [`Engine::step`] samples every individual's parameter pair and frozen
//! factors first, then hands an [`IterationView`] to the caller's observer,
//! then generates and evaluates the actual trials and applies selection.
//! Observers only get shared references, so whatever they do (profiling,
//! logging) cannot reach the search state or its random streams.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use crate::bench::{BenchmarkFunction, EvaluationCounter};
use crate::de::{
    draw_frozen_factors_ranked, initialize_population, select_and_update, Archive,
    BoundaryRepair, FrozenFactors, ParameterPair, Population, Strategy, SuccessRecords,
    TrialContext,
};
use crate::error::Result;
use crate::pam::{Pam, PamKind, PamParams};
use crate::rng::{Purpose, Streams};

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub population_size: usize,
    pub strategy: Strategy,
    pub repair: BoundaryRepair,
    pub archive_capacity: usize,
    pub pam: PamKind,
    pub pam_params: PamParams,
}

impl EngineConfig {
    /// Population 100, current-to-pbest/1 with `p = 0.05`, archive of size `n`.
    pub fn new(pam: PamKind) -> Self {
        EngineConfig {
            population_size: 100,
            strategy: Strategy::CurrentToPBest1 { p: 0.05 },
            repair: BoundaryRepair::Midpoint,
            archive_capacity: 100,
            pam,
            pam_params: PamParams::default(),
        }
    }

    /// Sets the population size and keeps the archive the same size.
    pub fn with_population(mut self, n: usize) -> Self {
        self.population_size = n;
        self.archive_capacity = n;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }
}

/// Read-only state of one iteration after all randomness is drawn.
pub struct IterationView<'a> {
    pub iteration: u64,
    /// Counted evaluations before this iteration's trials.
    pub fe: u64,
    pub context: TrialContext<'a>,
    pub pairs: &'a [ParameterPair],
    pub factors: &'a [FrozenFactors],
    /// Individual indices from best to worst.
    pub ranking: &'a [usize],
    pub counter: &'a EvaluationCounter,
}

impl IterationView<'_> {
    /// Individual holding 1-based `rank`.
    pub fn individual_at_rank(&self, rank: usize) -> usize {
        self.ranking[rank - 1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub iteration: u64,
    /// Counted evaluations after the step.
    pub fe: u64,
    pub best_error: f64,
    pub records: SuccessRecords,
}

pub struct Engine {
    config: EngineConfig,
    function: BenchmarkFunction,
    counter: EvaluationCounter,
    population: Population,
    archive: Archive,
    pam: Pam,
    factor_rng: ChaCha8Rng,
    pam_rng: ChaCha8Rng,
    archive_rng: ChaCha8Rng,
    best_value: f64,
    best_error: f64,
    fe_at_best: u64,
}

impl Engine {
    /// Initializes and evaluates the population (`n` counted evaluations).
    pub fn new(config: EngineConfig, function: BenchmarkFunction, seed: u64) -> Result<Self> {
        let streams = Streams::new(seed);
        let counter = EvaluationCounter::new();
        let population = initialize_population(
            config.population_size,
            &function,
            &counter,
            &mut streams.stream(Purpose::Init),
        )?;
        let pam = Pam::new(config.pam, config.population_size, &config.pam_params)?;
        let mut engine = Engine {
            archive: Archive::new(config.archive_capacity),
            factor_rng: streams.stream(Purpose::Factors),
            pam_rng: streams.stream(Purpose::Pam),
            archive_rng: streams.stream(Purpose::Archive),
            config,
            function,
            counter,
            population,
            pam,
            best_value: f64::INFINITY,
            best_error: f64::INFINITY,
            fe_at_best: 0,
        };
        let values: Vec<f64> = engine.population.members().iter().map(|m| m.fx).collect();
        engine.track_best(&values, 0);
        Ok(engine)
    }

    fn track_best(&mut self, values: &[f64], fe_before: u64) {
        for (k, &v) in values.iter().enumerate() {
            if v < self.best_value {
                self.best_value = v;
            }
            let err = self.function.error_value(self.best_value);
            if err < self.best_error {
                self.best_error = err;
                self.fe_at_best = fe_before + k as u64 + 1;
            }
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn function(&self) -> &BenchmarkFunction {
        &self.function
    }

    pub fn counter(&self) -> &EvaluationCounter {
        &self.counter
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn pam(&self) -> &Pam {
        &self.pam
    }

    pub fn iteration(&self) -> u64 {
        self.population.iteration()
    }

    /// Floored best-so-far error.
    pub fn best_error(&self) -> f64 {
        self.best_error
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    /// Counted evaluation at which the best-so-far error last strictly improved.
    pub fn fe_at_best(&self) -> u64 {
        self.fe_at_best
    }

    /// Whether one more iteration fits within `budget` counted evaluations.
    pub fn fits_budget(&self, budget: u64) -> bool {
        self.counter.counted() + self.population.len() as u64 <= budget
    }

    pub fn step(&mut self) -> Result<StepReport> {
        self.step_with(|_| {})
    }

    /// Runs one iteration, calling `observe` once all of its randomness is fixed
    /// and before any actual trial is generated.
    pub fn step_with<O>(&mut self, mut observe: O) -> Result<StepReport>
    where
        O: FnMut(&IterationView<'_>),
    {
        let n = self.population.len();
        let fe_start = self.counter.counted();
        let iteration = self.population.iteration();
        let ranking = self.population.ranking();
        let strategy = self.config.strategy;

        let pairs: Vec<ParameterPair> = (0..n)
            .map(|i| self.pam.sample(i, &mut self.pam_rng))
            .collect();
        let factors: Vec<FrozenFactors> = (0..n)
            .map(|i| {
                draw_frozen_factors_ranked(
                    &self.population,
                    i,
                    strategy,
                    &self.archive,
                    &ranking,
                    &mut self.factor_rng,
                )
            })
            .collect();

        let context = TrialContext {
            population: &self.population,
            archive: &self.archive,
            strategy,
            repair: self.config.repair,
            function: &self.function,
        };
        observe(&IterationView {
            iteration,
            fe: fe_start,
            context,
            pairs: &pairs,
            factors: &factors,
            ranking: &ranking,
            counter: &self.counter,
        });

        let trials: Vec<_> = (0..n)
            .map(|i| context.generate_trial(i, pairs[i], &factors[i], &self.counter, true))
            .collect();
        let values: Vec<f64> = trials.iter().map(|t| t.fx).collect();
        let records = select_and_update(
            &mut self.population,
            &mut self.archive,
            trials,
            &pairs,
            &mut self.archive_rng,
        );
        self.track_best(&values, fe_start);
        self.pam.update(&records)?;

        Ok(StepReport {
            iteration,
            fe: self.counter.counted(),
            best_error: self.best_error,
            records,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::FunctionKind;

    fn engine(pam: PamKind, seed: u64) -> Engine {
        let f = BenchmarkFunction::new(FunctionKind::Sphere, 5, 1).unwrap();
        Engine::new(EngineConfig::new(pam).with_population(12), f, seed).unwrap()
    }

    #[test]
    fn counted_evaluations_per_step() {
        let mut e = engine(PamKind::Pshade, 3);
        assert_eq!(e.counter().counted(), 12);
        let r = e.step().unwrap();
        assert_eq!(r.fe, 24);
        assert_eq!(r.iteration, 1);
        assert_eq!(e.iteration(), 2);
    }

    #[test]
    fn best_fitness_never_increases() {
        let mut e = engine(PamKind::Pjade, 5);
        let mut last = e.population().best().fx;
        for _ in 0..50 {
            e.step().unwrap();
            let now = e.population().best().fx;
            assert!(now <= last);
            assert!(e.archive().len() <= 12);
            last = now;
        }
    }

    #[test]
    fn observer_sees_frozen_state() {
        let mut e = engine(PamKind::Pjde, 2);
        let mut seen = 0;
        e.step_with(|view| {
            seen = view.factors.len();
            assert_eq!(view.fe, 12);
            assert_eq!(view.pairs.len(), 12);
            assert_eq!(view.individual_at_rank(1), view.ranking[0]);
        })
        .unwrap();
        assert_eq!(seen, 12);
    }

    #[test]
    fn fe_at_best_tracks_last_improvement() {
        let mut e = engine(PamKind::Pshade, 9);
        let mut expected = e.fe_at_best();
        let mut best = e.best_error();
        for _ in 0..30 {
            let fe_start = e.counter().counted();
            let before: Vec<f64> = e.population().members().iter().map(|m| m.fx).collect();
            e.step().unwrap();
            if e.best_error() < best {
                best = e.best_error();
                assert!(e.fe_at_best() > fe_start && e.fe_at_best() <= fe_start + 12);
                expected = e.fe_at_best();
            }
            assert_eq!(e.fe_at_best(), expected);
            let _ = before;
        }
    }
}
