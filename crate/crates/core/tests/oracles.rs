//! Independent re-derivations checked against the library code paths.

use apland_core::bench::{BenchmarkFunction, FunctionKind};
use apland_core::de::{Archive, Donor, FrozenFactors, Population, Strategy};
use apland_core::engine::{Engine, EngineConfig, IterationView};
use apland_core::measures::{disp, fdc, nzr};
use apland_core::pam::PamKind;
use apland_core::profiler::{snapshot_individual, ParameterGrid, SnapshotMeta};
use apland_core::ParameterPair;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Trial vector written straight from the textbook equations: mutation,
/// binomial crossover, midpoint repair against [-5, 5].
fn oracle_trial(
    pop: &Population,
    archive: &Archive,
    i: usize,
    theta: ParameterPair,
    ff: &FrozenFactors,
    strategy: Strategy,
) -> Vec<f64> {
    let x = &pop.members()[i].x;
    let d = x.len();
    let mut u = vec![0.0; d];
    for j in 0..d {
        let v = match strategy {
            Strategy::Rand1 => {
                let m = pop.members();
                m[ff.parents[0]].x[j] + theta.f * (m[ff.parents[1]].x[j] - m[ff.parents[2]].x[j])
            }
            Strategy::CurrentToPBest1 { .. } => {
                let m = pop.members();
                let pbest = &m[ff.pbest.unwrap().1].x;
                let r1 = &m[ff.parents[0]].x;
                let r2 = match ff.archive_pick.unwrap() {
                    Donor::Population(k) => &m[k].x,
                    Donor::Archive(k) => &archive.members()[k].x,
                };
                x[j] + theta.f * (pbest[j] - x[j]) + theta.f * (r1[j] - r2[j])
            }
        };
        let take = ff.crossover_draws[j] <= theta.c || j == ff.j_rand;
        let mut uj = if take { v } else { x[j] };
        if uj < -5.0 {
            uj = (x[j] - 5.0) / 2.0;
        } else if uj > 5.0 {
            uj = (x[j] + 5.0) / 2.0;
        }
        u[j] = uj;
    }
    u
}

fn oracle_g1(f: &BenchmarkFunction, fx: f64, u: &[f64]) -> f64 {
    let fu = f.value(u);
    if fu < fx {
        (fx - fu).abs()
    } else {
        0.0
    }
}

fn check_snapshot_against_oracle(strategy: Strategy, iteration: u64, i: usize) -> (f64, f64) {
    let f = BenchmarkFunction::new(FunctionKind::Sphere, 2, 42).unwrap();
    let config = EngineConfig::new(PamKind::Pshade)
        .with_population(4)
        .with_strategy(strategy);
    let mut engine = Engine::new(config, f.clone(), 42).unwrap();
    let grid = ParameterGrid::new(50, 50).unwrap();
    let mut result = None;
    while engine.iteration() <= iteration {
        engine
            .step_with(|view: &IterationView<'_>| {
                if view.iteration != iteration {
                    return;
                }
                let ctx = &view.context;
                let snap = snapshot_individual(
                    ctx,
                    i,
                    &grid,
                    &view.factors[i],
                    view.pairs[i],
                    view.counter,
                    SnapshotMeta::default(),
                );
                let fx = ctx.population.members()[i].fx;
                let expected: Vec<f64> = grid
                    .pairs()
                    .iter()
                    .map(|&theta| {
                        let u = oracle_trial(ctx.population, ctx.archive, i, theta, &view.factors[i], strategy);
                        oracle_g1(&f, fx, &u)
                    })
                    .collect();
                assert_eq!(snap.g1, expected);
                result = Some((nzr(&snap.g1), nzr(&expected)));
            })
            .unwrap();
    }
    result.expect("iteration reached")
}

#[test]
fn snapshot_nzr_matches_brute_force_oracle() {
    let (got, oracle) = check_snapshot_against_oracle(Strategy::Rand1, 2, 1);
    assert_eq!(got, oracle);
    let (got, oracle) = check_snapshot_against_oracle(Strategy::CurrentToPBest1 { p: 0.05 }, 2, 1);
    assert_eq!(got, oracle);
}

/// Textbook two-pass Pearson correlation.
fn pearson_two_pass(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va.sqrt() * vb.sqrt())
}

#[test]
fn fdc_matches_two_pass_pearson() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let pairs: Vec<ParameterPair> = (0..100)
            .map(|_| ParameterPair::new(rng.random(), rng.random()))
            .collect();
        let g1: Vec<f64> = (0..100).map(|_| rng.random::<f64>() * 10.0).collect();
        let best = (0..100)
            .fold(0, |b, k| if g1[k] > g1[b] { k } else { b });
        let dist: Vec<f64> = pairs
            .iter()
            .map(|p| ((p.f - pairs[best].f).powi(2) + (p.c - pairs[best].c).powi(2)).sqrt())
            .collect();
        let neg: Vec<f64> = g1.iter().map(|v| -v).collect();
        let expected = pearson_two_pass(&dist, &neg);
        let got = fdc(&pairs, &g1).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn disp_matches_exhaustive_pairwise_oracle() {
    let grid = ParameterGrid::new(50, 50).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5 {
        // Coarse values force plenty of ties.
        let g1: Vec<f64> = (0..2500).map(|_| (rng.random::<f64>() * 40.0).floor()).collect();
        let mut idx: Vec<usize> = (0..2500).collect();
        idx.sort_by(|&a, &b| g1[b].partial_cmp(&g1[a]).unwrap().then(a.cmp(&b)));
        let top = &idx[..250];
        let mut sum = 0.0;
        let mut count = 0usize;
        for a in top {
            for b in top {
                if a < b {
                    let (p, q) = (grid.pairs()[*a], grid.pairs()[*b]);
                    sum += ((p.f - q.f).powi(2) + (p.c - q.c).powi(2)).sqrt();
                    count += 1;
                }
            }
        }
        assert_eq!(count, 250 * 249 / 2);
        let expected = sum / count as f64;
        let got = disp(grid.pairs(), &g1, 0.1).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

/// Classical DE (rand/1, fixed F and C) written without the library's
/// population, factor or engine code, consuming the same seeded streams.
fn classical_de(seed: u64, n: usize, iterations: usize, theta: ParameterPair) -> Vec<Vec<f64>> {
    let f = BenchmarkFunction::new(FunctionKind::Rastrigin, 4, 6).unwrap();
    let d = 4;
    let streams = apland_core::rng::Streams::new(seed);
    let mut init = streams.stream(apland_core::rng::Purpose::Init);
    let mut factors = streams.stream(apland_core::rng::Purpose::Factors);
    let mut xs: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| init.random_range(-5.0..=5.0)).collect())
        .collect();
    let mut fx: Vec<f64> = xs.iter().map(|x| f.value(x)).collect();
    for _ in 0..iterations {
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let mut r = Vec::new();
            while r.len() < 3 {
                let k = factors.random_range(0..n);
                if k != i && !r.contains(&k) {
                    r.push(k);
                }
            }
            let s: Vec<f64> = (0..d).map(|_| factors.random::<f64>()).collect();
            let j_rand = factors.random_range(0..d);
            let u: Vec<f64> = (0..d)
                .map(|j| {
                    let v = xs[r[0]][j] + theta.f * (xs[r[1]][j] - xs[r[2]][j]);
                    let mut uj = if s[j] <= theta.c || j == j_rand { v } else { xs[i][j] };
                    if uj < -5.0 {
                        uj = (xs[i][j] - 5.0) / 2.0;
                    } else if uj > 5.0 {
                        uj = (xs[i][j] + 5.0) / 2.0;
                    }
                    uj
                })
                .collect();
            trials.push(u);
        }
        for (i, u) in trials.into_iter().enumerate() {
            let fu = f.value(&u);
            if fu <= fx[i] {
                xs[i] = u;
                fx[i] = fu;
            }
        }
    }
    xs
}

#[test]
fn fixed_pair_engine_is_classical_de() {
    let theta = ParameterPair::new(0.5, 0.9);
    let f = BenchmarkFunction::new(FunctionKind::Rastrigin, 4, 6).unwrap();
    let config = EngineConfig::new(PamKind::Fixed(theta))
        .with_population(10)
        .with_strategy(Strategy::Rand1);
    let mut engine = Engine::new(config, f, 31).unwrap();
    for _ in 0..40 {
        engine.step().unwrap();
    }
    let got: Vec<Vec<f64>> = engine.population().members().iter().map(|m| m.x.clone()).collect();
    assert_eq!(got, classical_de(31, 10, 40, theta));
}

#[test]
fn profiling_counts_only_uncounted_evaluations() {
    let f = BenchmarkFunction::new(FunctionKind::Sphere, 3, 1).unwrap();
    let mut engine =
        Engine::new(EngineConfig::new(PamKind::Pjade).with_population(8), f, 5).unwrap();
    let grid = ParameterGrid::new(7, 9).unwrap();
    engine
        .step_with(|view| {
            let before = (view.counter.counted(), view.counter.uncounted());
            snapshot_individual(
                &view.context,
                2,
                &grid,
                &view.factors[2],
                view.pairs[2],
                view.counter,
                SnapshotMeta::default(),
            );
            assert_eq!(view.counter.counted(), before.0);
            assert_eq!(view.counter.uncounted(), before.1 + 63);
        })
        .unwrap();
}
