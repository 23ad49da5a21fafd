use derand_core::juntas::{
    optimize_biased, optimize_graded, optimize_juntas, ExplicitTables, JuntaConfig, JuntaSystem, PartitionConfig, Robp,
    RobpBank, RobpNode,
};
use derand_core::Dyadic;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(rng: &mut ChaCha8Rng, n: usize, b: u32) -> (JuntaSystem, ExplicitTables) {
    let m = rng.random_range(1..=5);
    let mut supports = Vec::new();
    let mut tables = Vec::new();
    for _ in 0..m {
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(rng);
        let w = rng.random_range(1..=n.min(8 / b as usize));
        vars.truncate(w);
        let table = (0..1usize << (w * b as usize))
            .map(|_| Dyadic::new(rng.random_range(-8i64..=8), rng.random_range(0..3)))
            .collect();
        supports.push(vars);
        tables.push(table);
    }
    let sys = JuntaSystem::new(n, b, supports).unwrap();
    let t = ExplicitTables::new(&sys, tables).unwrap();
    (sys, t)
}

/// `E[S]` by enumerating all of `M_b^n`, independent of any oracle.
fn brute_mean(sys: &JuntaSystem, t: &ExplicitTables) -> Dyadic {
    let b = sys.b();
    let total_bits = sys.n() as u32 * b;
    let mut sum = Dyadic::zero();
    for point in 0u64..1 << total_bits {
        let x: Vec<u32> = (0..sys.n()).map(|i| ((point >> (b as usize * i)) & ((1 << b) - 1)) as u32).collect();
        sum += &brute_value(sys, t, &x);
    }
    sum.div_pow2(total_bits)
}

fn brute_value(sys: &JuntaSystem, t: &ExplicitTables, x: &[u32]) -> Dyadic {
    sys.supports().iter().enumerate().map(|(j, y)| t.eval(j, &y.iter().map(|&v| x[v]).collect::<Vec<_>>())).sum()
}

#[test]
fn bits_beat_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..150 {
        let n = rng.random_range(1..=10);
        let (sys, t) = random_system(&mut rng, n, 1);
        let cfg = JuntaConfig { t_cap: (round % 3 == 0).then_some(2), ..JuntaConfig::default() };
        let out = optimize_juntas(&sys, &t, &cfg).unwrap();
        assert_eq!(out.expectation, brute_mean(&sys, &t));
        assert_eq!(out.value, brute_value(&sys, &t, &out.x));
        assert!(out.value >= out.expectation);
    }
}

#[test]
fn conditional_partition_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = JuntaConfig {
        t_cap: Some(1),
        partition: PartitionConfig { conditional_only: true, ..PartitionConfig::default() },
        ..JuntaConfig::default()
    };
    for _ in 0..60 {
        let (sys, t) = random_system(&mut rng, 8, 1);
        let out = optimize_juntas(&sys, &t, &cfg).unwrap();
        assert!(brute_value(&sys, &t, &out.x) >= brute_mean(&sys, &t));
    }
}

#[test]
fn graded_values_beat_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..80 {
        let b = rng.random_range(2..=3);
        let n = rng.random_range(1..=12 / b as usize);
        let (sys, t) = random_system(&mut rng, n, b);
        let out = optimize_graded(&sys, &t, &JuntaConfig::default()).unwrap();
        assert!(out.x.iter().all(|&v| v < 1 << b));
        assert_eq!(out.expectation, brute_mean(&sys, &t));
        assert!(brute_value(&sys, &t, &out.x) >= out.expectation);
    }
}

#[test]
fn biased_coins_beat_the_biased_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..80 {
        let n = rng.random_range(1..=8);
        let (sys, t) = random_system(&mut rng, n, 1);
        let p: Vec<Dyadic> = (0..n).map(|_| Dyadic::new(rng.random_range(0..=8i64), 3)).collect();
        let out = optimize_biased(&sys, &t, &p, &JuntaConfig::default()).unwrap();
        let mut mean = Dyadic::zero();
        for point in 0u32..1 << n {
            let x: Vec<u32> = (0..n).map(|i| point >> i & 1).collect();
            let w = x.iter().zip(&p).fold(
                Dyadic::one(),
                |w, (&xi, pi)| {
                    if xi == 1 {
                        &w * pi
                    } else {
                        &w * &(&Dyadic::one() - pi)
                    }
                },
            );
            mean += &(&w * &brute_value(&sys, &t, &x));
        }
        assert_eq!(out.expectation, mean);
        assert!(brute_value(&sys, &t, &out.x) >= mean);
    }
}

#[test]
fn parity_chain_programs() {
    // Program j is the parity of a window; the optimizer should satisfy all.
    let n = 9;
    let supports: Vec<Vec<usize>> = (0..7).map(|j| vec![j, j + 1, j + 2]).collect();
    let programs = supports
        .iter()
        .map(|_| {
            let nodes = vec![
                RobpNode { var: 0, lo: 1, hi: 2 },
                RobpNode { var: 1, lo: 3, hi: 4 },
                RobpNode { var: 1, lo: 4, hi: 3 },
                RobpNode { var: 2, lo: 5, hi: 6 },
                RobpNode { var: 2, lo: 6, hi: 5 },
            ];
            Robp::new(3, nodes, vec![Dyadic::zero(), Dyadic::one()], 0).unwrap()
        })
        .collect();
    let bank = RobpBank { programs };
    let sys = JuntaSystem::new(n, 1, supports).unwrap();
    let half = vec![Dyadic::half(); n];
    let out = optimize_biased(&sys, &bank, &half, &JuntaConfig::default()).unwrap();
    assert_eq!(out.expectation, Dyadic::new(7, 1));
    assert_eq!(out.value, Dyadic::from_int(7));
}
