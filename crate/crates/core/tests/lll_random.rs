use std::sync::Arc;

use derand_core::lll::{
    check_wtl_many, deterministic_mt, enumerate_witness_trees, solve_randomized, BadEvent, ClauseEvent, CountEvent,
    Event, LllInstance, MtConfig, TreeShape,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Windows of a shuffled variable order; neighbouring windows overlap, so
/// every event shares variables with at most two others.
fn windows(rng: &mut ChaCha8Rng, n: usize, width: usize, stride: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    (0..n / stride).map(|e| (0..width).map(|t| order[(e * stride + t) % n]).collect()).collect()
}

fn random_instance(seed: u64) -> LllInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if seed.is_multiple_of(2) {
        let events = windows(&mut rng, 24, 6, 4)
            .into_iter()
            .map(|vars| {
                let pattern: Vec<u32> = (0..6).map(|_| rng.random_range(0..2)).collect();
                Event::new(vars, Arc::new(ClauseEvent::new(vec![pattern])), None)
            })
            .collect();
        LllInstance::new(24, 1, events).unwrap()
    } else {
        let events = windows(&mut rng, 30, 8, 6)
            .into_iter()
            .map(|vars| {
                let targets: Vec<u32> = (0..8).map(|_| rng.random_range(0..4)).collect();
                Event::new(vars, Arc::new(CountEvent::threshold(&targets, 5)), None)
            })
            .collect();
        LllInstance::new(30, 2, events).unwrap()
    }
}

#[test]
fn deterministic_suite() {
    let cfg = MtConfig { epsilon: 0.5, ..MtConfig::default() };
    for seed in 0..20 {
        let inst = random_instance(seed);
        assert!(inst.d() <= 3, "seed {seed}");
        let out = deterministic_mt(&inst, &cfg).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(inst.first_violated(&out.assignment).is_none());
        assert!((out.run.log.len() as u64) < out.cm);
        assert!(out.potential.below_one());
    }
}

#[test]
fn exact_probabilities() {
    let p = CountEvent::threshold(&[0; 8], 5).probability(&[Default::default(); 8], 2).unwrap();
    let mut hits = 0u64;
    for x in 0u32..1 << 16 {
        hits += ((0..8).filter(|t| x >> (2 * t) & 3 == 0).count() >= 5) as u64;
    }
    assert_eq!(p, derand_core::Dyadic::new(hits, 16));
}

#[test]
fn randomized_three_uniform() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 30;
        let events: Vec<Event> = (0..20)
            .map(|_| {
                let mut vars: Vec<usize> = (0..n).collect();
                vars.shuffle(&mut rng);
                vars.truncate(3);
                Event::new(vars, Arc::new(ClauseEvent::monochromatic(3, 1)), None)
            })
            .collect();
        let inst = LllInstance::new(n, 1, events).unwrap();
        let (run, _) = solve_randomized(&inst, 4, 1 << 20, &mut rng).unwrap();
        assert!(inst.first_violated(&run.assignment).is_none(), "seed {seed}");
    }
}

#[test]
fn witness_tree_frequencies() {
    let events = (0..3)
        .map(|e| Event::new(vec![2 * e, 2 * e + 1, (2 * e + 2) % 6], Arc::new(ClauseEvent::monochromatic(3, 1)), None))
        .collect();
    let inst = LllInstance::new(6, 1, events).unwrap();
    let shapes: Vec<TreeShape> = enumerate_witness_trees(&inst, 3).unwrap().iter().map(|t| t.shape()).collect();
    assert!(shapes.len() > 3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in check_wtl_many(&inst, &shapes, 20_000, &mut rng).unwrap() {
        assert!(r.proper && !r.violated, "{r:?}");
    }
}
