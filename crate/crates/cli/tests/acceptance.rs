//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use derand::verify::{verify_defective, verify_domatic, DefectiveOutput, DomaticOutput};
use derand_core::apps::{
    defective_color, domatic_partition, rainbow_color, rainbow_peo, ColorSchedule, DefectiveConfig, DomaticConfig,
    DomaticHooks, Graph, Hypergraph, RainbowConfig,
};
use derand_core::codes::{
    build_fooling_code_with, build_unbiased_code_with, verify_code, FoolingConfig, NeighborhoodFamily, UnbiasedConfig,
    VerifyMode,
};
use derand_core::fourier::{heavy_codeword, maximize_character_sum_with, CharSumConfig, CharacterSum};
use derand_core::gf2core::BitVec;
use derand_core::juntas::{
    graded_level, optimize_biased, optimize_graded, optimize_juntas, optimize_truthtables, partition_variables_with,
    ExplicitTables, JuntaConfig, JuntaSystem, PartialValue, PartitionConfig, PlainFromContinuous, Robp, RobpBank,
    RobpNode,
};
use derand_core::lll::{
    check_wtl_many, deterministic_mt, enumerate_witness_trees, ClauseEvent, CountEvent, Event, LllInstance, MtConfig,
    TreeShape,
};
use derand_core::Dyadic;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_subset(r: &mut ChaCha8Rng, n: usize, size: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(r);
    all.truncate(size);
    all.sort_unstable();
    all
}

fn random_family(r: &mut ChaCha8Rng, max_n: usize, max_m: usize, max_w: usize) -> NeighborhoodFamily {
    let n = r.random_range(1..=max_n);
    let m = r.random_range(1..=max_m);
    let sets = (0..m).map(|_| {
        let w = r.random_range(1..=max_w.min(n));
        random_subset(r, n, w)
    });
    NeighborhoodFamily::new(n, sets.collect()).unwrap()
}

fn ceil_log2(x: usize) -> usize {
    (usize::BITS - x.max(1).saturating_sub(1).leading_zeros()) as usize
}

/// Seed counts of every pattern on `e`, by running through all `2^L` seeds.
fn fools_exactly(code: &derand_core::codes::Code, e: &[usize]) -> bool {
    let l = code.length();
    let mut counts = vec![0u64; 1 << e.len()];
    for y in 0u64..1 << l {
        let seed = BitVec::from_u64(y, l);
        let pattern =
            e.iter().enumerate().fold(0usize, |acc, (t, &i)| acc | (code.vector(i).dot(&seed).unwrap() as usize) << t);
        counts[pattern] += 1;
    }
    let expected = 1u64 << (l - e.len().min(l));
    e.len() <= l && counts.iter().all(|&c| c == expected)
}

fn fooling_exactness() -> Check {
    let mut r = rng(1);
    let mut max_len = 0;
    for t in 0..100 {
        let f = random_family(&mut r, 16, 16, 6);
        let (code, _) =
            build_fooling_code_with(&f, &FoolingConfig::default()).map_err(|e| format!("family {t}: {e}"))?;
        verify_code(&code, &f, VerifyMode::Fooling).map_err(|e| format!("family {t}: {e}"))?;
        if code.length() <= 20 {
            let bad = f.sets().iter().position(|e| !fools_exactly(&code, e));
            ensure(bad.is_none(), || format!("family {t}: set {bad:?} has a skewed pattern count"))?;
        }
        max_len = max_len.max(code.length());
    }
    Ok(format!("100 families, longest seed {max_len}"))
}

fn unbiased_guarantee() -> Check {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for t in 0..200 {
        let f = random_family(&mut r, 24, 64, 8);
        let (code, rep) =
            build_unbiased_code_with(&f, &UnbiasedConfig::default()).map_err(|e| format!("family {t}: {e}"))?;
        for (k, e) in f.sets().iter().enumerate() {
            let x = code.code_xor(e).unwrap();
            ensure(e.is_empty() || !x.is_zero(), || format!("family {t}: set {k} has A(e) = 0"))?;
        }
        let cap = 4 * (ceil_log2(f.len()) + f.width());
        ensure(code.length() <= cap && rep.length == code.length(), || {
            format!("family {t}: L = {} over cap {cap}", code.length())
        })?;
        worst = worst.max(code.length() as f64 / cap as f64);
    }
    Ok(format!("200 families, L / cap at most {worst:.2}"))
}

fn random_dyadic(r: &mut ChaCha8Rng) -> Dyadic {
    Dyadic::new(r.random_range(-64i64..=64), r.random_range(0..4))
}

fn character_sum_bound() -> Check {
    let mut r = rng(3);
    for t in 0..500 {
        let n = r.random_range(1..=12);
        let mut cs = CharacterSum::new(n);
        for _ in 0..r.random_range(1..=10) {
            let w = r.random_range(0..=n.min(5));
            cs.add_term(&random_subset(&mut r, n, w), random_dyadic(&mut r)).unwrap();
        }
        let out =
            maximize_character_sum_with(&cs, &CharSumConfig::default()).map_err(|e| format!("instance {t}: {e}"))?;
        let best = (0u64..1 << n).map(|x| cs.evaluate(&BitVec::from_u64(x, n)).unwrap()).max().unwrap();
        let value = cs.evaluate(&out.x).unwrap();
        ensure(value == out.value, || format!("instance {t}: reported value differs"))?;
        ensure(value >= cs.constant() && value <= best, || {
            format!("instance {t}: {value} outside [{}, {best}]", cs.constant())
        })?;
    }
    Ok("500 instances within [gamma_0, max]".into())
}

fn heavy_codewords() -> Check {
    let mut r = rng(4);
    for t in 0..500 {
        let n = r.random_range(1..=20);
        let l = r.random_range(1..=20);
        let rows: Vec<BitVec> = (0..l)
            .map(|_| {
                let bits: Vec<bool> = (0..n).map(|_| r.random_bool(0.4)).collect();
                BitVec::from_bools(&bits)
            })
            .collect();
        let x = heavy_codeword(&rows, n).map_err(|e| format!("generator {t}: {e}"))?;
        let nonzero = rows.iter().filter(|y| y.iter().any(|b| b)).count();
        let weight = rows.iter().filter(|y| y.iter().zip(x.iter()).filter(|&(a, b)| a && b).count() % 2 == 1).count();
        ensure(2 * weight >= nonzero, || format!("generator {t}: weight {weight} of {nonzero}"))?;
    }
    Ok("500 generators".into())
}

/// Table value at `x`, entry `sum_t x_{y_t} 2^{b t}`.
fn table_at(table: &[Dyadic], y: &[usize], x: &[u32], b: u32) -> Dyadic {
    table[y.iter().enumerate().fold(0usize, |acc, (t, &i)| acc | (x[i] as usize) << (b as usize * t))].clone()
}

fn random_tables(r: &mut ChaCha8Rng, n: usize, b: u32) -> (JuntaSystem, Vec<Vec<Dyadic>>) {
    let m = r.random_range(1..=6);
    let supports: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let w = r.random_range(1..=n.min(3));
            let mut s = random_subset(r, n, w);
            s.shuffle(r);
            s
        })
        .collect();
    let tables =
        supports.iter().map(|y| (0..1 << (b as usize * y.len())).map(|_| random_dyadic(r)).collect()).collect();
    (JuntaSystem::new(n, b, supports).unwrap(), tables)
}

/// Width-two layered program reading its support in order.
fn random_program(r: &mut ChaCha8Rng, vars: usize) -> Robp {
    let mut nodes = Vec::new();
    for t in 0..vars {
        for _ in 0..2 {
            let next = |r: &mut ChaCha8Rng| {
                if t + 1 < vars {
                    2 * (t + 1) + r.random_range(0..2)
                } else {
                    2 * vars + r.random_range(0..3)
                }
            };
            nodes.push(RobpNode { var: t, lo: next(r), hi: next(r) });
        }
    }
    let sinks = (0..3).map(|_| random_dyadic(r)).collect();
    Robp::new(vars, nodes, sinks, 0).unwrap()
}

fn all_points(n: usize, b: u32) -> impl Iterator<Item = Vec<u32>> {
    (0u64..1 << (n * b as usize))
        .map(move |c| (0..n).map(|i| ((c >> (b as usize * i)) & ((1 << b) - 1)) as u32).collect())
}

fn junta_optimizers() -> Check {
    let mut r = rng(5);
    let cfg = JuntaConfig::default();
    let mut counts = [0usize; 4];
    for t in 0..300 {
        let kind = t % 4;
        let b = if kind == 1 { r.random_range(2..=4) } else { 1 };
        let n = r.random_range(1..=16 / b as usize);
        match kind {
            0 | 1 => {
                let (sys, tables) = random_tables(&mut r, n, b);
                let peo = ExplicitTables::new(&sys, tables.clone()).unwrap();
                let s = |x: &[u32]| -> Dyadic {
                    sys.supports().iter().zip(&tables).map(|(y, tb)| table_at(tb, y, x, b)).sum()
                };
                let mean = all_points(n, b).map(|x| s(&x)).sum::<Dyadic>().div_pow2(n as u32 * b);
                let x = if kind == 0 && t % 8 == 0 {
                    optimize_truthtables(&sys, &peo)
                        .map_err(|e| format!("system {t}: {e}"))?
                        .iter()
                        .map(u32::from)
                        .collect()
                } else {
                    optimize_graded(&sys, &peo, &cfg).map_err(|e| format!("system {t}: {e}"))?.x
                };
                ensure(s(&x) >= mean, || format!("system {t}: S(x) = {} below {mean}", s(&x)))?;
            }
            2 => {
                let supports: Vec<Vec<usize>> = (0..r.random_range(1..=4))
                    .map(|_| {
                        let w = r.random_range(1..=n.min(4));
                        random_subset(&mut r, n, w)
                    })
                    .collect();
                let programs: Vec<Robp> = supports.iter().map(|y| random_program(&mut r, y.len())).collect();
                let sys = JuntaSystem::new(n, 1, supports.clone()).unwrap();
                let s = |x: &[u32]| -> Dyadic {
                    supports
                        .iter()
                        .zip(&programs)
                        .map(|(y, p)| p.eval(&BitVec::from_bools(&y.iter().map(|&i| x[i] == 1).collect::<Vec<_>>())))
                        .sum()
                };
                let mean = all_points(n, 1).map(|x| s(&x)).sum::<Dyadic>().div_pow2(n as u32);
                let peo = PlainFromContinuous(RobpBank { programs: programs.clone() });
                let x = optimize_juntas(&sys, &peo, &cfg).map_err(|e| format!("system {t}: {e}"))?.x;
                ensure(s(&x) >= mean, || format!("system {t}: S(x) below {mean}"))?;
            }
            _ => {
                let (sys, tables) = random_tables(&mut r, n, 1);
                let peo = ExplicitTables::new(&sys, tables.clone()).unwrap();
                let p: Vec<Dyadic> = (0..n).map(|_| Dyadic::new(r.random_range(0..=8i64), 3)).collect();
                let s = |x: &[u32]| -> Dyadic {
                    sys.supports().iter().zip(&tables).map(|(y, tb)| table_at(tb, y, x, 1)).sum()
                };
                let mean: Dyadic = all_points(n, 1)
                    .map(|x| {
                        let w = x.iter().zip(&p).fold(Dyadic::one(), |acc, (&xi, pi)| {
                            let q = if xi == 1 { pi.clone() } else { &Dyadic::one() - pi };
                            &acc * &q
                        });
                        &w * &s(&x)
                    })
                    .sum();
                let x = optimize_biased(&sys, &peo, &p, &cfg).map_err(|e| format!("system {t}: {e}"))?.x;
                ensure(s(&x) >= mean, || format!("system {t}: S(x) = {} below biased mean {mean}", s(&x)))?;
            }
        }
        counts[kind] += 1;
    }
    Ok(format!("{} bit tables, {} graded tables, {} programs, {} biased", counts[0], counts[1], counts[2], counts[3]))
}

fn partition_cap() -> Check {
    let mut r = rng(6);
    let mut rounds = 0;
    for t in 0..200 {
        let f = random_family(&mut r, 64, 24, 20);
        let t_cap = r.random_range(1..=4);
        let cfg = PartitionConfig { conditional_only: t % 3 == 0, ..PartitionConfig::default() };
        let (p, rep) = partition_variables_with(&f, t_cap, &cfg).map_err(|e| format!("family {t}: {e}"))?;
        let mut label = vec![usize::MAX; f.n()];
        for (k, part) in p.parts.iter().enumerate() {
            for &i in part {
                ensure(label[i] == usize::MAX, || format!("family {t}: variable {i} in two parts"))?;
                label[i] = k;
            }
        }
        ensure(label.iter().all(|&l| l != usize::MAX), || format!("family {t}: uncovered variable"))?;
        for e in f.sets() {
            let mut load = vec![0; p.parts.len()];
            for &i in e {
                load[label[i]] += 1;
            }
            ensure(load.iter().all(|&l| l <= t_cap), || format!("family {t}: load above {t_cap}"))?;
        }
        let q = &rep.potential;
        ensure(q.windows(2).all(|w| w[1] < w[0]), || format!("family {t}: potential {q:?} not decreasing"))?;
        ensure(q.last().is_none_or(|&z| z == 0), || format!("family {t}: final potential {q:?}"))?;
        rounds += q.len().saturating_sub(1);
    }
    Ok(format!("200 partitions, {rounds} rounds"))
}

fn rainbow_count(h: &Hypergraph, colors: &[u32]) -> usize {
    h.edges().iter().filter(|e| e.iter().map(|&v| colors[v]).collect::<BTreeSet<_>>().len() == e.len()).count()
}

fn bound(m: usize, d: usize) -> usize {
    let num: u128 = m as u128 * (1..=d as u128).product::<u128>();
    num.div_ceil((d as u128).pow(d as u32)) as usize
}

/// `P[colors distinct]` over the completions of each value.
fn brute_rainbow(query: &[PartialValue], d: usize, b: u32) -> Dyadic {
    let choices: Vec<Vec<u32>> = query.iter().map(|q| q.completions(b).collect()).collect();
    let total: u64 = choices.iter().map(|c| c.len() as u64).product();
    let mut hits = 0u64;
    for mut c in 0..total {
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for ch in &choices {
            let x = ch[(c % ch.len() as u64) as usize];
            c /= ch.len() as u64;
            ok &= seen.insert((x as u64 * d as u64) >> b);
        }
        hits += ok as u64;
    }
    let unknown: u32 = query.iter().map(|q| q.unknown_count(b)).sum();
    Dyadic::new(hits, unknown)
}

fn rainbow_bound_check() -> Check {
    let mut r = rng(7);
    for t in 0..100 {
        let d = [2, 3, 4][t % 3];
        let n = r.random_range(d..=24);
        let m = r.random_range(1..=32);
        let edges = (0..m).map(|_| random_subset(&mut r, n, d)).collect();
        let h = Hypergraph::new(n, d, edges).unwrap();
        let out = rainbow_color(&h, &RainbowConfig::default()).map_err(|e| format!("hypergraph {t}: {e}"))?;
        let count = rainbow_count(&h, &out.colors);
        ensure(out.colors.iter().all(|&c| (c as usize) < d), || format!("hypergraph {t}: color out of range"))?;
        ensure(count >= bound(m, d) && count == out.rainbow, || {
            format!("hypergraph {t}: {count} below {}", bound(m, d))
        })?;
    }
    let mut queries = 0;
    while queries < 1000 {
        let d = r.random_range(2..=4);
        let b = r.random_range(ceil_log2(d).max(1) as u32..=4);
        let level = r.random_range(0..b);
        let q: Vec<PartialValue> = (0..d)
            .map(|_| {
                let mut v = PartialValue::UNKNOWN;
                for lv in 0..level {
                    v.set(lv, b, r.random_bool(0.5));
                }
                if r.random_bool(0.5) {
                    v.set(level, b, r.random_bool(0.5));
                }
                v
            })
            .collect();
        if graded_level(&q, b).is_none() {
            continue;
        }
        let got = rainbow_peo(&q, d, b).map_err(|e| format!("query {queries}: {e}"))?;
        let want = brute_rainbow(&q, d, b);
        ensure(got == want, || format!("d = {d}, b = {b}, query {q:?}: {got} != {want}"))?;
        queries += 1;
    }
    Ok("100 hypergraphs, 1000 graded queries".into())
}

fn triangle_ring(k: usize, b: u32) -> LllInstance {
    let n = 2 * k;
    let events = (0..k)
        .map(|e| Event::new(vec![2 * e, 2 * e + 1, (2 * e + 2) % n], Arc::new(ClauseEvent::monochromatic(3, b)), None))
        .collect();
    LllInstance::new(n, b, events).unwrap()
}

fn witness_tree_lemma() -> Check {
    let threshold = {
        let events = (0..3)
            .map(|e| Event::new(vec![e, (e + 1) % 3, 3], Arc::new(CountEvent::threshold(&[0, 0, 0], 2)), None))
            .collect();
        LllInstance::new(4, 2, events).unwrap()
    };
    let instances = [triangle_ring(3, 1), triangle_ring(4, 1), threshold];
    let mut r = rng(8);
    let mut trees = 0;
    let mut worst = f64::NEG_INFINITY;
    for (k, inst) in instances.iter().enumerate() {
        let shapes: Vec<TreeShape> = enumerate_witness_trees(inst, 3).unwrap().iter().map(|t| t.shape()).collect();
        for rep in check_wtl_many(inst, &shapes, 100_000, &mut r).map_err(|e| format!("instance {k}: {e}"))? {
            ensure(rep.proper, || format!("instance {k}: improper tree"))?;
            let limit = rep.weight + 4.0 * rep.sigma;
            ensure(rep.frequency <= limit, || format!("instance {k}: frequency {} above {limit}", rep.frequency))?;
            worst = worst.max((rep.frequency - rep.weight) / rep.sigma.max(f64::MIN_POSITIVE));
            trees += 1;
        }
    }
    Ok(format!("{trees} trees, largest excess {worst:.2} sigma"))
}

fn windows(r: &mut ChaCha8Rng, n: usize, width: usize, stride: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(r);
    (0..n / stride).map(|e| (0..width).map(|t| order[(e * stride + t) % n]).collect()).collect()
}

fn lll_suite_instance(seed: u64) -> LllInstance {
    let mut r = rng(100 + seed);
    if seed.is_multiple_of(2) {
        let events = windows(&mut r, 24, 6, 4)
            .into_iter()
            .map(|vars| {
                let pattern: Vec<u32> = (0..6).map(|_| r.random_range(0..2)).collect();
                Event::new(vars, Arc::new(ClauseEvent::new(vec![pattern])), None)
            })
            .collect();
        LllInstance::new(24, 1, events).unwrap()
    } else {
        let events = windows(&mut r, 30, 8, 6)
            .into_iter()
            .map(|vars| {
                let targets: Vec<u32> = (0..8).map(|_| r.random_range(0..4)).collect();
                Event::new(vars, Arc::new(CountEvent::threshold(&targets, 5)), None)
            })
            .collect();
        LllInstance::new(30, 2, events).unwrap()
    }
}

fn deterministic_lll() -> Check {
    let eps = 0.5;
    let cfg = MtConfig { epsilon: eps, ..MtConfig::default() };
    let mut total = 0;
    for seed in 0..20 {
        let inst = lll_suite_instance(seed);
        let p = inst.events().iter().map(|e| e.exact().to_f64()).fold(0.0, f64::max);
        let lhs = std::f64::consts::E * p * (inst.d() as f64).powf(1.0 + eps);
        ensure(lhs <= 1.0, || format!("instance {seed}: e p d^(1+eps) = {lhs}"))?;
        let out = deterministic_mt(&inst, &cfg).map_err(|e| format!("instance {seed}: {e}"))?;
        for e in inst.events() {
            let vals: Vec<u32> = e.vars.iter().map(|&i| out.assignment[i]).collect();
            ensure(!e.oracle.holds(&vals, inst.b()), || format!("instance {seed}: an event holds"))?;
        }
        ensure(out.potential.scaled() < out.cm as u128, || format!("instance {seed}: S(R) >= 1"))?;
        ensure(out.run.log.len() as u64 <= out.cm, || {
            format!("instance {seed}: {} resamplings over C m = {}", out.run.log.len(), out.cm)
        })?;
        total += out.run.log.len();
    }
    Ok(format!("20 instances, {total} resamplings in total"))
}

fn random_graph(r: &mut ChaCha8Rng, n: usize, cap: usize, tries: usize) -> Graph {
    let mut deg = vec![0; n];
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for _ in 0..tries {
        let (u, v) = (r.random_range(0..n), r.random_range(0..n));
        let key = (u.min(v), u.max(v));
        if u != v && deg[u] < cap && deg[v] < cap && seen.insert(key) {
            deg[u] += 1;
            deg[v] += 1;
            edges.push(key);
        }
    }
    Graph::new(n, &edges).unwrap()
}

fn defective_coloring() -> Check {
    let mut r = rng(10);
    let mut runs = 0;
    let mut large = 0;
    let mut worst_colors = 0.0f64;
    for t in 0..30 {
        let n = r.random_range(8..=128);
        let cap = r.random_range(2..=16);
        let g = random_graph(&mut r, n, cap, n * cap);
        for k in [1, 2, 4] {
            let out =
                defective_color(&g, k, &DefectiveConfig::default()).map_err(|e| format!("graph {t}, k = {k}: {e}"))?;
            let stated = (out.c_defect * k as f64).floor() as usize;
            let v = verify_defective(
                &g,
                &DefectiveOutput { colors: out.colors.clone(), num_colors: out.num_colors, defect_bound: stated },
            );
            ensure(v.passed && stated <= k, || format!("graph {t}, k = {k}: {:?}", v.checks))?;
            if let Some(s) = &out.schedule {
                ensure(!s.asymptotic || s.invariants().iter().all(|&b| b), || {
                    format!("graph {t}: schedule invariants")
                })?;
            }
            large += out.large_split.is_some() as usize;
            worst_colors = worst_colors.max(out.c_colors);
            runs += 1;
        }
    }
    let mut schedules = 0;
    for delta in [1usize << 20, 1 << 30, 1 << 40, 1 << 50] {
        for k in [4usize, 16, 64] {
            let s = ColorSchedule::new(delta, k, 4.0).map_err(|e| format!("schedule {delta}/{k}: {e}"))?;
            let inv = s.invariants();
            for (st, ok) in s.stages.iter().zip(&inv) {
                let ordered = k as f64 <= st.b && st.b <= st.delta && st.delta <= 4.0 * st.b;
                ensure(!s.asymptotic || (*ok && ordered), || format!("schedule {delta}/{k}: stage {st:?}"))?;
            }
            schedules += s.asymptotic as usize;
        }
    }
    ensure(schedules > 0, || "no schedule reached the asymptotic range".into())?;
    Ok(format!(
        "{runs} colorings ({large} large-degree), c_colors up to {worst_colors:.2}; {schedules} schedules checked"
    ))
}

fn circulant(n: usize, offsets: &[usize]) -> Graph {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|v| offsets.iter().map(move |&o| (v, (v + o) % n))).collect();
    Graph::new(n, &edges).unwrap()
}

fn covers(g: &Graph, colors: &[u32], size: usize) -> bool {
    (0..g.n()).all(|u| {
        let seen: BTreeSet<u32> = g.neighbors(u).iter().chain(std::iter::once(&u)).map(|&w| colors[w]).collect();
        seen.len() == size && seen.iter().all(|&c| (c as usize) < size)
    })
}

fn domatic_coverage() -> Check {
    let mut cases: Vec<(Graph, DomaticHooks)> = Vec::new();
    for (n, half) in [(10, 2), (30, 4), (64, 8), (128, 16)] {
        cases.push((circulant(n, &(1..=half).collect::<Vec<_>>()), DomaticHooks::default()));
    }
    let g = circulant(24, &(1..=6).collect::<Vec<_>>());
    let forced = |c1, c2, t0, t1| DomaticHooks { c1: Some(c1), c2: Some(c2), t0: Some(t0), t1: Some(t1), mu: None };
    cases.push((g.clone(), forced(1, 2, 0.0, 13.0)));
    cases.push((g.clone(), forced(1, 3, 0.0, 13.0)));
    cases.push((g.clone(), forced(1, 8, 0.0, 13.0)));
    cases.push((g, forced(2, 2, 5.0, 7.0)));
    cases.push((circulant(40, &[1, 3, 7, 11, 13]), forced(1, 2, 0.0, 11.0)));
    let (mut split, mut fallback) = (0, 0);
    for (k, (g, hooks)) in cases.into_iter().enumerate() {
        let out = domatic_partition(&g, 0.5, &DomaticConfig { hooks, ..DomaticConfig::default() })
            .map_err(|e| format!("case {k}: {e}"))?;
        let v =
            verify_domatic(&g, &DomaticOutput { colors: out.colors.clone(), size: out.size, note: out.note.clone() });
        ensure(v.passed && covers(&g, &out.colors, out.size), || format!("case {k}: coverage fails"))?;
        match &out.note {
            Some(_) => {
                ensure(out.size == 1 && out.colors.iter().all(|&c| c == 0), || {
                    format!("case {k}: fallback is not trivial")
                })?;
                fallback += 1;
            }
            None => {
                ensure(out.size == out.c1 * out.c2, || format!("case {k}: size {} != c1 c2", out.size))?;
                split += 1;
            }
        }
    }
    ensure(split > 0 && fallback > 0, || format!("{split} split, {fallback} fallback"))?;
    Ok(format!("{split} partitions with several classes, {fallback} noted fallbacks"))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let family = write(d, "family.txt", "12 5\n1 2 3\n3 4 5 6\n7 8\n9 10 11 12\n1 12\n");
    let single = write(d, "single.txt", "1 1\n1\n");
    let code = write(d, "code.txt", "6 5\n2a\n15\n3f\n01\n30\n");
    let table = write(d, "table.txt", "1 0 -1/2 3/4 0 0 1 2\n");
    let system = write(
        d,
        "system.json",
        r#"{"n": 4, "b": 2, "functions": [
            {"vars": [1, 2], "kind": "table", "payload": [0,1,2,3,1,0,3,2,2,3,0,1,3,2,1,0]},
            {"vars": [3], "kind": "table", "payload": ["1/2", 0, -1, 2]},
            {"vars": [4, 1], "kind": "table", "payload": [1,0,0,0,0,1,0,0,0,0,1,0,0,0,0,1]}
        ]}"#,
    );
    let programs = write(
        d,
        "programs.json",
        r#"{"n": 3, "b": 1, "functions": [
            {"vars": [1, 2], "kind": "table", "payload": [0, 1, 1, 0]},
            {"vars": [2, 3], "kind": "robp", "payload": {"nodes": [
                {"id": 1, "var": 2, "lo": 2, "hi": 3}, {"id": 2, "var": 3, "lo": 4, "hi": 5}, {"id": 3, "var": 3, "lo": 5, "hi": 4}],
              "sinks": [{"id": 4, "value": 0}, {"id": 5, "value": "3/2"}]}}
        ]}"#,
    );
    let hyper = write(d, "hyper.txt", "9 6 3\n1 2 3\n4 5 6\n7 8 9\n1 4 7\n2 5 8\n3 6 9\n");
    let edge = write(d, "edge.txt", "2 1 2\n1 2\n");
    let lll = write(
        d,
        "lll.json",
        r#"{"n": 8, "b": 1, "events": [
            {"vars": [1, 2, 3, 4], "kind": "clause", "payload": [[0, 0, 0, 0]]},
            {"vars": [3, 4, 5, 6], "kind": "clause", "payload": [[0, 0, 0, 0]]},
            {"vars": [5, 6, 7, 8], "kind": "threshold", "payload": {"targets": [1, 1, 1, 1], "t": 4}},
            {"vars": [7, 8, 1, 2], "kind": "clause", "payload": [[0, 1, 0, 1]]}
        ]}"#,
    );
    let one_event = write(
        d,
        "one.json",
        r#"{"n": 2, "b": 1, "events": [{"vars": [1, 2], "kind": "table", "payload": [1, 0, 0, 0]}]}"#,
    );
    let mut graph_text = String::from("24 72\n");
    for v in 0..24 {
        for o in 1..=3 {
            graph_text.push_str(&format!("{} {}\n", v + 1, (v + o) % 24 + 1));
        }
    }
    let graph = write(d, "graph.txt", &graph_text);
    let mut circ = String::from("24 144\n");
    for v in 0..24 {
        for o in 1..=6 {
            circ.push_str(&format!("{} {}\n", v + 1, (v + o) % 24 + 1));
        }
    }
    let regular = write(d, "regular.txt", &circ);

    let suite: Vec<Vec<String>> = [
        vec!["fool-code", &family],
        vec!["unbiased-code", &family],
        vec!["unbiased-code", &single],
        vec!["heavy-codeword", &code],
        vec!["heavy-codeword", &code, "--chunk", "2"],
        vec!["wht", &table],
        vec!["partition", &family, "--t-cap", "1"],
        vec!["partition", &family, "--t-cap", "1", "--conditional"],
        vec!["optimize", &system],
        vec!["optimize", &programs],
        vec!["rainbow", &hyper],
        vec!["rainbow", &edge],
        vec!["lll-solve", &lll, "--epsilon", "0.5"],
        vec!["lll-solve", &one_event, "--epsilon", "1.0"],
        vec!["lll-solve", &lll, "--randomized", "--seed", "7", "--epsilon", "0.5"],
        vec!["defective-color", &graph, "--k", "1"],
        vec!["defective-color", &graph, "--k", "2"],
        vec!["domatic", &regular],
        vec!["domatic", &regular, "--c1", "1", "--c2", "2", "--t0", "0", "--t1", "13"],
    ]
    .iter()
    .map(|v| v.iter().map(|s| s.to_string()).collect())
    .collect();

    for (k, args) in suite.iter().enumerate() {
        let mut reports = Vec::new();
        for threads in ["1", "2", "8"] {
            let mut argv = vec!["derand".to_string()];
            argv.extend(args.iter().cloned());
            argv.extend(["--threads".to_string(), threads.to_string()]);
            let out = derand::run(&argv);
            ensure(out.code == 0, || format!("{args:?} with {threads} threads: exit {} {}", out.code, out.stderr))?;
            reports.push(out.stdout);
        }
        ensure(reports.windows(2).all(|w| w[0] == w[1]), || format!("{args:?}: reports differ across thread counts"))?;
        let report: Value = serde_json::from_str(&reports[0]).map_err(|e| e.to_string())?;
        ensure(report["verification"]["passed"] == Value::Bool(true), || format!("{args:?}: verification failed"))?;
        let path = write(d, &format!("report{k}.json"), &reports[0]);
        let again = derand::run(["derand", "verify", &path]);
        ensure(again.code == 0, || format!("{args:?}: re-verification exit {} {}", again.code, again.stderr))?;
    }

    let edge_report: Value = serde_json::from_str(&derand::run(["derand", "rainbow", &edge]).stdout).unwrap();
    ensure(edge_report["output"]["rainbow"] == 1, || "single edge is not rainbow".into())?;
    let unbiased: Value = serde_json::from_str(&derand::run(["derand", "unbiased-code", &single]).stdout).unwrap();
    ensure(unbiased["output"]["rows"][0] != "0", || "A(1) = 0".into())?;
    let bad = write(d, "bad.txt", "3 1\n1 4\n");
    ensure(derand::run(["derand", "rainbow", &bad]).code == 1, || "malformed input does not exit 1".into())?;
    let dense = write(
        d,
        "dense.json",
        r#"{"n": 1, "b": 1, "events": [{"vars": [1], "kind": "table", "payload": [1, 0]}, {"vars": [1], "kind": "table", "payload": [0, 1]}]}"#,
    );
    ensure(derand::run(["derand", "lll-solve", &dense]).code == 2, || "failing LLL condition does not exit 2".into())?;
    Ok(format!("{} commands byte-identical on 1, 2 and 8 threads", suite.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("fooling exactness", fooling_exactness),
        ("unbiased-code guarantee", unbiased_guarantee),
        ("character-sum bound", character_sum_bound),
        ("heavy codeword", heavy_codewords),
        ("junta optimizers", junta_optimizers),
        ("partition cap", partition_cap),
        ("rainbow bound", rainbow_bound_check),
        ("witness tree lemma", witness_tree_lemma),
        ("deterministic LLL", deterministic_lll),
        ("defective coloring", defective_coloring),
        ("domatic verifier", domatic_coverage),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} ({secs:.1}s)", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} ({secs:.1}s)", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
