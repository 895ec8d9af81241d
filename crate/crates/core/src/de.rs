//! The basic differential evolution loop.
//!
//! Trial generation is split in two halves: [`draw_frozen_factors`] consumes
//! all the randomness an individual needs (parent indices, crossover draws,
//! `j_rand`, `pbest`, archive pick), and [`TrialContext::generate_trial`] is a
//! pure function of those factors and a parameter pair. Replaying the same
//! factors with a different pair is what the landscape profiler does.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bench::{BenchmarkFunction, EvaluationCounter};
use crate::error::{Error, Result};

/// A scale factor / crossover rate pair.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParameterPair {
    #[cfg_attr(feature = "serde", serde(rename = "F"))]
    pub f: f64,
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub c: f64,
}

impl ParameterPair {
    pub const fn new(f: f64, c: f64) -> Self {
        ParameterPair { f, c }
    }

    pub fn distance(&self, other: &ParameterPair) -> f64 {
        libm::hypot(self.f - other.f, self.c - other.c)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Individual {
    pub x: Vec<f64>,
    /// Cached objective value of `x`.
    pub fx: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Individual>,
    iteration: u64,
}

impl Population {
    /// Wraps already-evaluated individuals.
    pub fn from_members(members: Vec<Individual>) -> Self {
        Population { members, iteration: 1 }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn get(&self, i: usize) -> &Individual {
        &self.members[i]
    }

    /// Indices sorted from best (lowest objective) to worst; ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| {
            self.members[a]
                .fx
                .total_cmp(&self.members[b].fx)
                .then(a.cmp(&b))
        });
        order
    }

    pub fn best(&self) -> &Individual {
        self.members
            .iter()
            .reduce(|a, b| if b.fx < a.fx { b } else { a })
            .expect("population is never empty")
    }
}

/// Inferior parents kept for the current-to-pbest/1 donor.
#[derive(Clone, Debug, PartialEq)]
pub struct Archive {
    members: Vec<Individual>,
    capacity: usize,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        Archive {
            members: Vec::with_capacity(capacity),
            capacity,
        }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Inserts `ind`, evicting uniformly random members while over capacity.
    pub fn insert<R: Rng + ?Sized>(&mut self, ind: Individual, rng: &mut R) {
        if self.capacity == 0 {
            return;
        }
        self.members.push(ind);
        while self.members.len() > self.capacity {
            let victim = rng.random_range(0..self.members.len());
            self.members.swap_remove(victim);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Strategy {
    /// `v = x_r1 + F (x_r2 - x_r3)`
    Rand1,
    /// `v = x_i + F (x_pbest - x_i) + F (x_r1 - x~_r2)`, with `p` the greediness.
    CurrentToPBest1 { p: f64 },
}

impl Strategy {
    pub fn current_to_pbest(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(alloc::format!("p must lie in (0, 1], got {p}")));
        }
        Ok(Strategy::CurrentToPBest1 { p })
    }

    /// Size of the top set `pbest` is drawn from: `max(floor(n p), 2)`.
    pub fn top_size(&self, n: usize) -> Option<usize> {
        match *self {
            Strategy::Rand1 => None,
            Strategy::CurrentToPBest1 { p } => {
                let k = libm::floor(n as f64 * p) as usize;
                Some(k.max(2).min(n))
            }
        }
    }
}

/// How out-of-domain trial coordinates are brought back.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundaryRepair {
    /// `u_j = (x_j + bound) / 2` against the violated bound.
    #[default]
    Midpoint,
    Clamp,
}

/// Where the `x~_r2` donor of current-to-pbest/1 comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Donor {
    Population(usize),
    Archive(usize),
}

/// The random quantities one trial generation depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenFactors {
    /// Parent indices: `[r1, r2, r3]` for rand/1, `[r1]` for current-to-pbest/1.
    pub parents: Vec<usize>,
    /// Uniform draws `s_j` in `[0, 1)` compared against `C`.
    pub crossover_draws: Vec<f64>,
    /// Zero-based index always taken from the mutant.
    pub j_rand: usize,
    /// Position of `pbest` within the sorted top set, and the individual it resolves to.
    pub pbest: Option<(usize, usize)>,
    pub archive_pick: Option<Donor>,
}

/// Evaluates `n` uniform random individuals in the function's domain.
pub fn initialize_population<R: Rng + ?Sized>(
    n: usize,
    f: &BenchmarkFunction,
    counter: &EvaluationCounter,
    rng: &mut R,
) -> Result<Population> {
    if n < 4 {
        return Err(Error::Config(alloc::format!(
            "population size must be at least 4, got {n}"
        )));
    }
    let (lo, hi) = f.bounds();
    let members = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..f.dimension()).map(|_| rng.random_range(lo..=hi)).collect();
            let fx = f.evaluate(&x, counter, true);
            Individual { x, fx }
        })
        .collect();
    Ok(Population::from_members(members))
}

/// Draws the frozen factors for individual `i`.
pub fn draw_frozen_factors<R: Rng + ?Sized>(
    pop: &Population,
    i: usize,
    strategy: Strategy,
    archive: &Archive,
    rng: &mut R,
) -> FrozenFactors {
    let ranking = match strategy {
        Strategy::Rand1 => Vec::new(),
        Strategy::CurrentToPBest1 { .. } => pop.ranking(),
    };
    draw_frozen_factors_ranked(pop, i, strategy, archive, &ranking, rng)
}

/// As [`draw_frozen_factors`] with a precomputed best-first ranking.
pub(crate) fn draw_frozen_factors_ranked<R: Rng + ?Sized>(
    pop: &Population,
    i: usize,
    strategy: Strategy,
    archive: &Archive,
    ranking: &[usize],
    rng: &mut R,
) -> FrozenFactors {
    let n = pop.len();
    let d = pop.get(i).x.len();
    let (parents, pbest, archive_pick) = match strategy {
        Strategy::Rand1 => (distinct_excluding(n, 3, i, rng), None, None),
        Strategy::CurrentToPBest1 { .. } => {
            let top = strategy.top_size(n).unwrap_or(2);
            let slot = rng.random_range(0..top);
            let pbest = (slot, ranking[slot]);
            let r1 = distinct_excluding(n, 1, i, rng)[0];
            let pool = n + archive.len();
            let pick = loop {
                let k = rng.random_range(0..pool);
                if k != i && k != r1 {
                    break k;
                }
            };
            let donor = if pick < n {
                Donor::Population(pick)
            } else {
                Donor::Archive(pick - n)
            };
            (vec![r1], Some(pbest), Some(donor))
        }
    };
    let crossover_draws = (0..d).map(|_| rng.random::<f64>()).collect();
    let j_rand = rng.random_range(0..d);
    FrozenFactors {
        parents,
        crossover_draws,
        j_rand,
        pbest,
        archive_pick,
    }
}

fn distinct_excluding<R: Rng + ?Sized>(n: usize, count: usize, exclude: usize, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = rng.random_range(0..n);
        if r != exclude && !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// Binomial crossover: `u_j = v_j` if `s_j <= C` or `j == j_rand`, else `x_j`.
pub fn crossover_binomial(x: &[f64], v: &[f64], c: f64, ff: &FrozenFactors) -> Vec<f64> {
    debug_assert_eq!(x.len(), v.len());
    x.iter()
        .zip(v)
        .zip(&ff.crossover_draws)
        .enumerate()
        .map(|(j, ((&xj, &vj), &s))| if s <= c || j == ff.j_rand { vj } else { xj })
        .collect()
}

/// Brings `u` back into `[lo, hi]` using the parent `x` as reference.
pub fn repair(u: &mut [f64], x: &[f64], (lo, hi): (f64, f64), mode: BoundaryRepair) {
    for (uj, &xj) in u.iter_mut().zip(x) {
        if *uj < lo {
            *uj = match mode {
                BoundaryRepair::Midpoint => (xj + lo) / 2.0,
                BoundaryRepair::Clamp => lo,
            };
        } else if *uj > hi {
            *uj = match mode {
                BoundaryRepair::Midpoint => (xj + hi) / 2.0,
                BoundaryRepair::Clamp => hi,
            };
        }
    }
}

/// Everything trial generation reads, borrowed for one iteration.
#[derive(Clone, Copy, Debug)]
pub struct TrialContext<'a> {
    pub population: &'a Population,
    pub archive: &'a Archive,
    pub strategy: Strategy,
    pub repair: BoundaryRepair,
    pub function: &'a BenchmarkFunction,
}

impl<'a> TrialContext<'a> {
    fn donor(&self, donor: Donor) -> &'a [f64] {
        match donor {
            Donor::Population(k) => &self.population.get(k).x,
            Donor::Archive(k) => &self.archive.members()[k].x,
        }
    }

    /// Mutant vector for individual `i`; no boundary handling.
    pub fn mutate(&self, i: usize, theta: ParameterPair, ff: &FrozenFactors) -> Vec<f64> {
        let pop = self.population;
        let f = theta.f;
        match self.strategy {
            Strategy::Rand1 => {
                let (a, b, c) = (
                    &pop.get(ff.parents[0]).x,
                    &pop.get(ff.parents[1]).x,
                    &pop.get(ff.parents[2]).x,
                );
                a.iter()
                    .zip(b)
                    .zip(c)
                    .map(|((a, b), c)| a + f * (b - c))
                    .collect()
            }
            Strategy::CurrentToPBest1 { .. } => {
                let xi = &pop.get(i).x;
                let (_, pb) = ff.pbest.expect("current-to-pbest/1 factors carry pbest");
                let pbest = &pop.get(pb).x;
                let r1 = &pop.get(ff.parents[0]).x;
                let r2 = self.donor(ff.archive_pick.expect("current-to-pbest/1 factors carry a donor"));
                (0..xi.len())
                    .map(|j| xi[j] + f * (pbest[j] - xi[j]) + f * (r1[j] - r2[j]))
                    .collect()
            }
        }
    }

    /// Mutation, crossover and boundary repair, without evaluation.
    pub fn trial_vector(&self, i: usize, theta: ParameterPair, ff: &FrozenFactors) -> Vec<f64> {
        let x = &self.population.get(i).x;
        let v = self.mutate(i, theta, ff);
        let mut u = crossover_binomial(x, &v, theta.c, ff);
        repair(&mut u, x, self.function.bounds(), self.repair);
        u
    }

    pub fn generate_trial(
        &self,
        i: usize,
        theta: ParameterPair,
        ff: &FrozenFactors,
        counter: &EvaluationCounter,
        counted: bool,
    ) -> Individual {
        let u = self.trial_vector(i, theta, ff);
        let fu = self.function.evaluate(&u, counter, counted);
        Individual { x: u, fx: fu }
    }
}

/// Outcome of one pairwise selection step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuccessRecords {
    pub successful: Vec<bool>,
    pub pairs: Vec<ParameterPair>,
}

impl SuccessRecords {
    pub fn success_count(&self) -> usize {
        self.successful.iter().filter(|s| **s).count()
    }

    /// The `S_F` and `S_C` sets of successful values.
    pub fn success_sets(&self) -> SuccessSets {
        let mut sets = SuccessSets::default();
        for (ok, p) in self.successful.iter().zip(&self.pairs) {
            if *ok {
                sets.f.push(p.f);
                sets.c.push(p.c);
            }
        }
        sets
    }
}

/// Successful scale factors and crossover rates of one iteration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuccessSets {
    pub f: Vec<f64>,
    pub c: Vec<f64>,
}

impl SuccessSets {
    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }
}

/// Pairwise selection: a trial replaces its parent when `f(u) <= f(x)`, and
/// the replaced parent goes to the archive.
pub fn select_and_update<R: Rng + ?Sized>(
    pop: &mut Population,
    archive: &mut Archive,
    trials: Vec<Individual>,
    pairs: &[ParameterPair],
    rng: &mut R,
) -> SuccessRecords {
    assert_eq!(trials.len(), pop.len(), "one trial per individual");
    let mut successful = Vec::with_capacity(trials.len());
    for (slot, trial) in pop.members.iter_mut().zip(trials) {
        if trial.fx <= slot.fx {
            let parent = core::mem::replace(slot, trial);
            archive.insert(parent, rng);
            successful.push(true);
        } else {
            successful.push(false);
        }
    }
    pop.iteration += 1;
    SuccessRecords {
        successful,
        pairs: pairs.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::FunctionKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pop_of(xs: &[&[f64]]) -> Population {
        Population::from_members(
            xs.iter()
                .map(|x| Individual {
                    x: x.to_vec(),
                    fx: x.iter().map(|v| v * v).sum(),
                })
                .collect(),
        )
    }

    fn sphere(d: usize) -> BenchmarkFunction {
        let mut rot = vec![0.0; d * d];
        for i in 0..d {
            rot[i * d + i] = 1.0;
        }
        BenchmarkFunction::with_transform(FunctionKind::Sphere, vec![0.0; d], rot).unwrap()
    }

    fn ff(parents: Vec<usize>, s: Vec<f64>, j_rand: usize) -> FrozenFactors {
        FrozenFactors {
            parents,
            crossover_draws: s,
            j_rand,
            pbest: None,
            archive_pick: None,
        }
    }

    #[test]
    fn rand1_arithmetic() {
        let pop = pop_of(&[&[0.0, 0.0], &[1.0, 2.0], &[3.0, 1.0], &[2.0, 0.0]]);
        let archive = Archive::new(4);
        let f = sphere(2);
        let ctx = TrialContext {
            population: &pop,
            archive: &archive,
            strategy: Strategy::Rand1,
            repair: BoundaryRepair::Midpoint,
            function: &f,
        };
        let factors = ff(vec![1, 2, 3], vec![0.0, 0.0], 0);
        assert_eq!(ctx.mutate(0, ParameterPair::new(0.5, 1.0), &factors), vec![1.5, 2.5]);
        assert_eq!(ctx.mutate(0, ParameterPair::new(0.0, 1.0), &factors), vec![1.0, 2.0]);
    }

    #[test]
    fn current_to_pbest_with_zero_f_is_parent() {
        let pop = pop_of(&[&[0.3, -0.7], &[1.0, 2.0], &[3.0, 1.0], &[2.0, 0.0]]);
        let archive = Archive::new(4);
        let f = sphere(2);
        let ctx = TrialContext {
            population: &pop,
            archive: &archive,
            strategy: Strategy::CurrentToPBest1 { p: 0.5 },
            repair: BoundaryRepair::Midpoint,
            function: &f,
        };
        let mut factors = ff(vec![2], vec![0.0, 0.0], 0);
        factors.pbest = Some((0, 1));
        factors.archive_pick = Some(Donor::Population(3));
        assert_eq!(ctx.mutate(0, ParameterPair::new(0.0, 1.0), &factors), vec![0.3, -0.7]);
        // x + 0.5 (pbest - x) + 0.5 (r1 - r2)
        let v = ctx.mutate(0, ParameterPair::new(0.5, 1.0), &factors);
        assert_eq!(v, vec![0.3 + 0.5 * 0.7 + 0.5 * 1.0, -0.7 + 0.5 * 2.7 + 0.5 * 1.0]);
    }

    #[test]
    fn crossover_examples() {
        let x = [1.0, 2.0, 3.0];
        let v = [10.0, 20.0, 30.0];
        let factors = ff(vec![], vec![0.2, 0.9, 0.5], 1);
        assert_eq!(crossover_binomial(&x, &v, 0.5, &factors), vec![10.0, 20.0, 30.0]);
        assert_eq!(crossover_binomial(&x, &v, 0.0, &factors), vec![1.0, 20.0, 3.0]);
        assert_eq!(crossover_binomial(&x, &v, 1.0, &factors), v.to_vec());
    }

    #[test]
    fn repair_modes() {
        let x = [4.0, -4.0, 0.0];
        let mut u = [6.0, -7.0, 1.0];
        repair(&mut u, &x, (-5.0, 5.0), BoundaryRepair::Midpoint);
        assert_eq!(u, [4.5, -4.5, 1.0]);
        let mut u = [6.0, -7.0, 1.0];
        repair(&mut u, &x, (-5.0, 5.0), BoundaryRepair::Clamp);
        assert_eq!(u, [5.0, -5.0, 1.0]);
    }

    #[test]
    fn init_counts_and_rejects_small_populations() {
        let f = sphere(2);
        let c = EvaluationCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = initialize_population(4, &f, &c, &mut rng).unwrap();
        assert_eq!(pop.len(), 4);
        assert_eq!(c.counted(), 4);
        assert_eq!(pop.iteration(), 1);
        let again = initialize_population(4, &f, &c, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(pop, again);
        assert!(matches!(
            initialize_population(3, &f, &c, &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn factors_exclude_target() {
        let f = sphere(3);
        let c = EvaluationCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = initialize_population(10, &f, &c, &mut rng).unwrap();
        let archive = Archive::new(10);
        for _ in 0..200 {
            let ff = draw_frozen_factors(&pop, 3, Strategy::Rand1, &archive, &mut rng);
            assert_eq!(ff.parents.len(), 3);
            assert!(!ff.parents.contains(&3));
            assert!(ff.parents[0] != ff.parents[1] && ff.parents[1] != ff.parents[2]);
            assert!(ff.parents[0] != ff.parents[2]);
            assert!(ff.j_rand < 3);
            assert!(ff.crossover_draws.iter().all(|s| (0.0..=1.0).contains(s)));
        }
    }

    #[test]
    fn pbest_top_sizes() {
        assert_eq!(Strategy::CurrentToPBest1 { p: 0.05 }.top_size(100), Some(5));
        assert_eq!(Strategy::CurrentToPBest1 { p: 0.001 }.top_size(100), Some(2));
        assert_eq!(Strategy::Rand1.top_size(100), None);
        assert!(Strategy::current_to_pbest(0.0).is_err());
    }

    #[test]
    fn pbest_drawn_from_top() {
        let f = sphere(2);
        let c = EvaluationCounter::new();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pop = initialize_population(100, &f, &c, &mut rng).unwrap();
        let ranking = pop.ranking();
        let mut archive = Archive::new(100);
        archive.insert(pop.get(0).clone(), &mut rng);
        let strategy = Strategy::CurrentToPBest1 { p: 0.05 };
        for i in 0..100 {
            let ff = draw_frozen_factors(&pop, i, strategy, &archive, &mut rng);
            let (slot, idx) = ff.pbest.unwrap();
            assert!(slot < 5);
            assert_eq!(ranking[slot], idx);
            assert_ne!(ff.parents[0], i);
            match ff.archive_pick.unwrap() {
                Donor::Population(k) => assert!(k != i && k != ff.parents[0]),
                Donor::Archive(k) => assert!(k < archive.len()),
            }
        }
    }

    #[test]
    fn selection_ties_and_archive() {
        let mut pop = pop_of(&[&[1.0, 0.0], &[2.0, 0.0], &[3.0, 0.0], &[4.0, 0.0]]);
        let mut archive = Archive::new(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trials = vec![
            Individual { x: vec![-1.0, 0.0], fx: 1.0 },  // tie -> replaces
            Individual { x: vec![9.0, 0.0], fx: 5.0 },   // worse
            Individual { x: vec![0.0, 0.0], fx: 0.0 },   // better
            Individual { x: vec![4.0, 1.0], fx: 17.0 },  // worse
        ];
        let pairs = [ParameterPair::new(0.5, 0.5); 4];
        let rec = select_and_update(&mut pop, &mut archive, trials, &pairs, &mut rng);
        assert_eq!(rec.successful, vec![true, false, true, false]);
        assert_eq!(pop.get(0).x, vec![-1.0, 0.0]);
        assert_eq!(pop.get(1).x, vec![2.0, 0.0]);
        assert_eq!(archive.len(), 2);
        assert_eq!(pop.iteration(), 2);
        assert_eq!(rec.success_sets().f.len(), 2);
    }

    #[test]
    fn archive_evicts_at_capacity() {
        let mut archive = Archive::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for k in 0..3 {
            archive.insert(Individual { x: vec![k as f64], fx: 0.0 }, &mut rng);
        }
        assert_eq!(archive.len(), 3);
        archive.insert(Individual { x: vec![9.0], fx: 0.0 }, &mut rng);
        assert_eq!(archive.len(), 3);
    }

    #[test]
    fn ranking_ties_by_index() {
        let mut pop = pop_of(&[&[0.0], &[0.0], &[0.0]]);
        assert_eq!(pop.ranking(), vec![0, 1, 2]);
        pop.members[0].fx = 3.0;
        pop.members[1].fx = 1.0;
        pop.members[2].fx = 2.0;
        assert_eq!(pop.ranking(), vec![1, 2, 0]);
    }
}
