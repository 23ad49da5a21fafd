//! Output artifacts and their verifiers. Every check is recomputed from the
//! parsed input and the artifact alone.

use derand_core::apps::{Graph, Hypergraph};
use derand_core::codes::{fools_by_rank, verify_code_with_budget, Code, NeighborhoodFamily, VerifyFailure, VerifyMode};
use derand_core::fourier::generator_rows;
use derand_core::gf2core::BitVec;
use derand_core::juntas::{
    uniform_expectation, ExplicitTables, JuntaSystem, PartialValue, Peo, PlainFromContinuous, RobpBank,
};
use derand_core::lll::LllInstance;
use derand_core::Dyadic;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::formats::{JuntaFunction, ParsedJuntas};
use crate::report::Verification;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeOutput {
    pub length: usize,
    pub n: usize,
    /// `A(i)` in hex, one per index.
    pub rows: Vec<String>,
    pub length_cap: usize,
}

impl CodeOutput {
    pub fn from_code(c: &Code, length_cap: usize) -> Self {
        Self { length: c.length(), n: c.n(), rows: c.vectors().iter().map(BitVec::to_hex).collect(), length_cap }
    }

    pub fn code(&self) -> Result<Code, String> {
        let vs = self.rows.iter().map(|r| BitVec::from_hex(r, self.length)).collect::<Result<Vec<_>, _>>();
        Code::new(self.length, vs.map_err(|e| e.to_string())?).map_err(|e| e.to_string())
    }
}

pub fn verify_code_output(
    family: &NeighborhoodFamily,
    out: &CodeOutput,
    mode: VerifyMode,
    budget: u64,
) -> Verification {
    let mut v = Verification::new();
    let code = match out.code() {
        Ok(c) => c,
        Err(e) => {
            v.check("artifact", false, e);
            return v;
        }
    };
    v.check("dimension", code.n() == family.n(), format!("{} vectors for {} indices", code.n(), family.n()));
    if code.n() != family.n() {
        return v;
    }
    match verify_code_with_budget(&code, family, mode, budget) {
        Ok(cert) => v.check(
            match mode {
                VerifyMode::Unbiased => "nonzero xor",
                VerifyMode::Fooling => "uniform marginals",
            },
            true,
            format!("{} seeds enumerated", cert.checked_seed_count),
        ),
        Err(VerifyFailure::Budget { .. }) if mode == VerifyMode::Fooling => {
            let bad = family.sets().iter().position(|e| !fools_by_rank(&code, e));
            v.check(
                "uniform marginals",
                bad.is_none(),
                match bad {
                    None => "full rank on every set".to_string(),
                    Some(k) => format!("set #{k} is rank deficient"),
                },
            );
        }
        Err(e) => v.check("code", false, e.to_string()),
    }
    v.check("length cap", out.length <= out.length_cap, format!("L = {} against cap {}", out.length, out.length_cap));
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavyOutput {
    /// `x_1 .. x_n` as a 0/1 string.
    pub x: String,
    pub weight: usize,
}

pub fn bits_to_string(x: &BitVec) -> String {
    x.iter().map(|b| if b { '1' } else { '0' }).collect()
}

pub fn verify_heavy(code: &Code, out: &HeavyOutput) -> Verification {
    let mut v = Verification::new();
    let rows = generator_rows(code);
    let x = match BitVec::from_bit_str(&out.x) {
        Ok(x) if x.len() == code.n() => x,
        _ => {
            v.check("artifact", false, "x is not a bit string of length n");
            return v;
        }
    };
    let nonzero = rows.iter().filter(|r| !r.is_zero()).count();
    let weight = rows.iter().filter(|r| r.dot(&x).unwrap_or(false)).count();
    v.check("weight", weight >= nonzero.div_ceil(2), format!("{weight} of {nonzero} nonzero rows"));
    v.check("reported weight", weight == out.weight, format!("reported {}", out.weight));
    v.summary = json!({ "weight": weight, "nonzero_rows": nonzero });
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhtOutput {
    pub spectrum: Vec<String>,
}

/// Coefficients by the defining sum for small tables, by inversion otherwise.
pub fn verify_wht(table: &[Dyadic], out: &WhtOutput) -> Verification {
    let mut v = Verification::new();
    let spec = match out.spectrum.iter().map(|s| s.parse::<Dyadic>()).collect::<Result<Vec<_>, _>>() {
        Ok(s) if s.len() == table.len() => s,
        _ => {
            v.check("artifact", false, "spectrum has the wrong length or bad values");
            return v;
        }
    };
    let w = table.len().trailing_zeros();
    if w <= 10 {
        let bad = (0..table.len()).find(|&s| {
            let sum: Dyadic =
                table.iter().enumerate().map(|(x, g)| if (x & s).count_ones() % 2 == 0 { g.clone() } else { -g }).sum();
            sum.div_pow2(w) != spec[s]
        });
        v.check(
            "coefficients",
            bad.is_none(),
            match bad {
                None => format!("all {} coefficients by direct summation", table.len()),
                Some(s) => format!("coefficient {s} differs"),
            },
        );
    } else {
        let back: Vec<Dyadic> = (0..table.len())
            .map(|x| {
                spec.iter().enumerate().map(|(s, c)| if (x & s).count_ones() % 2 == 0 { c.clone() } else { -c }).sum()
            })
            .collect();
        v.check("inversion", back == table, "sum of characters reproduces the table");
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionOutput {
    pub t_cap: usize,
    /// 1-based part of each variable.
    pub labels: Vec<usize>,
    pub parts: usize,
    /// Potential before the first round and after each round.
    pub potential: Vec<String>,
}

pub fn verify_partition(family: &NeighborhoodFamily, out: &PartitionOutput) -> Verification {
    let mut v = Verification::new();
    if out.labels.len() != family.n() || out.labels.iter().any(|&l| l == 0 || l > out.parts) {
        v.check("artifact", false, "labels do not cover 1..=parts for every variable");
        return v;
    }
    let mut worst = 0;
    for f in family.sets() {
        let mut loads = std::collections::BTreeMap::new();
        for &i in f {
            *loads.entry(out.labels[i]).or_insert(0usize) += 1;
        }
        worst = worst.max(loads.values().copied().max().unwrap_or(0));
    }
    v.check("load", worst <= out.t_cap, format!("largest |f ∩ T_k| = {worst}, cap {}", out.t_cap));
    let q: Vec<u128> = out.potential.iter().filter_map(|s| s.parse().ok()).collect();
    let monotone = q.len() == out.potential.len() && q.windows(2).all(|w| w[1] <= w[0]);
    v.check("potential", monotone && q.last().is_none_or(|&x| x == 0), format!("{q:?}"));
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizeOutput {
    pub x: Vec<u32>,
    pub value: String,
    pub expectation: String,
}

fn junta_value(j: &ParsedJuntas, x: &[u32]) -> Dyadic {
    let b = j.system.b() as usize;
    j.functions
        .iter()
        .zip(j.system.supports())
        .map(|(f, y)| match f {
            JuntaFunction::Table(t) => {
                t[y.iter().enumerate().fold(0usize, |acc, (k, &i)| acc | (x[i] as usize) << (b * k))].clone()
            }
            JuntaFunction::Robp(p) => {
                let bits: Vec<bool> = y.iter().map(|&i| x[i] == 1).collect();
                p.eval(&BitVec::from_bools(&bits))
            }
        })
        .sum()
}

/// Tables through [`ExplicitTables`] and programs through [`RobpBank`],
/// each on its own sub-system.
pub struct MixedPeo {
    route: Vec<(bool, usize)>,
    tables: Option<ExplicitTables>,
    programs: PlainFromContinuous<RobpBank>,
}

impl MixedPeo {
    pub fn new(j: &ParsedJuntas) -> derand_core::Result<Self> {
        let mut route = Vec::new();
        let (mut supports, mut tables, mut programs) = (Vec::new(), Vec::new(), Vec::new());
        for (f, y) in j.functions.iter().zip(j.system.supports()) {
            match f {
                JuntaFunction::Table(t) => {
                    route.push((true, tables.len()));
                    supports.push(y.clone());
                    tables.push(t.clone());
                }
                JuntaFunction::Robp(p) => {
                    route.push((false, programs.len()));
                    programs.push(p.clone());
                }
            }
        }
        let tables = if tables.is_empty() {
            None
        } else {
            Some(ExplicitTables::new(&JuntaSystem::new(j.system.n(), j.system.b(), supports)?, tables)?)
        };
        Ok(Self { route, tables, programs: PlainFromContinuous(RobpBank { programs }) })
    }
}

impl Peo for MixedPeo {
    fn expectation(&self, j: usize, query: &[PartialValue]) -> derand_core::Result<Dyadic> {
        match self.route[j] {
            (true, k) => self.tables.as_ref().expect("routed to a table").expectation(k, query),
            (false, k) => self.programs.expectation(k, query),
        }
    }
}

/// `E[S]` over all of `M_b^n` when that fits, else from the oracle.
fn junta_mean(j: &ParsedJuntas, peo: &dyn Peo, sys: &JuntaSystem) -> Result<(Dyadic, &'static str), String> {
    let bits = sys.n() * sys.b() as usize;
    if bits <= 20 {
        let b = sys.b();
        let mut total = Dyadic::zero();
        let mut x = vec![0u32; sys.n()];
        for c in 0u64..1 << bits {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = ((c >> (b as usize * i)) & ((1 << b) - 1)) as u32;
            }
            total += &junta_value(j, &x);
        }
        Ok((total.div_pow2(bits as u32), "enumeration"))
    } else {
        uniform_expectation(peo, sys).map(|e| (e, "oracle")).map_err(|e| e.to_string())
    }
}

pub fn verify_optimize(j: &ParsedJuntas, peo: &dyn Peo, out: &OptimizeOutput) -> Verification {
    let mut v = Verification::new();
    let max = (1u64 << j.system.b()) as u32;
    if out.x.len() != j.system.n() || out.x.iter().any(|&x| x >= max) {
        v.check("artifact", false, "x has the wrong length or values outside M_b");
        return v;
    }
    let value = junta_value(j, &out.x);
    v.check("value", value.to_string() == out.value, format!("S(x) = {value}"));
    match junta_mean(j, peo, &j.system) {
        Ok((mean, how)) => v.check("beats the mean", value >= mean, format!("E[S] = {mean} by {how}")),
        Err(e) => v.check("beats the mean", false, e),
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RainbowOutput {
    pub colors: Vec<u32>,
    pub rainbow: usize,
    pub bound: usize,
}

pub fn verify_rainbow(h: &Hypergraph, out: &RainbowOutput) -> Verification {
    let mut v = Verification::new();
    if out.colors.len() != h.n() || out.colors.iter().any(|&c| c as usize >= h.d()) {
        v.check("artifact", false, "colors must be in 0..d for every vertex");
        return v;
    }
    let rainbow = h
        .edges()
        .iter()
        .filter(|e| {
            let mut seen = vec![false; h.d()];
            e.iter().all(|&u| !std::mem::replace(&mut seen[out.colors[u] as usize], true))
        })
        .count();
    let bound = expected_bound(h.m(), h.d());
    v.check("rainbow bound", rainbow >= bound, format!("{rainbow} rainbow edges, bound {bound}"));
    v.check(
        "reported count",
        rainbow == out.rainbow && bound == out.bound,
        format!("reported {} / {}", out.rainbow, out.bound),
    );
    v.summary = json!({ "rainbow_count": rainbow, "edges": h.m() });
    v
}

/// `ceil(m d! / d^d)`, falling back to the library when `u128` overflows.
fn expected_bound(m: usize, d: usize) -> usize {
    let exact = (1..=d as u128)
        .try_fold((m as u128, 1u128), |(num, den), i| Some((num.checked_mul(i)?, den.checked_mul(d as u128)?)));
    match exact {
        Some((num, den)) => num.div_ceil(den) as usize,
        None => derand_core::apps::rainbow_bound(m, d).unwrap_or(usize::MAX),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllOutput {
    pub assignment: Vec<u32>,
    pub resamplings: usize,
    /// Resampling bound `C m`; absent for randomized runs.
    pub bound: Option<u64>,
}

pub fn verify_lll(inst: &LllInstance, out: &LllOutput) -> Verification {
    let mut v = Verification::new();
    let max = 1u64 << inst.b();
    if out.assignment.len() != inst.n() || out.assignment.iter().any(|&x| x as u64 >= max) {
        v.check("artifact", false, "assignment has the wrong length or values outside M_b");
        return v;
    }
    let holding: Vec<usize> = (0..inst.m())
        .filter(|&k| {
            let e = inst.event(k);
            let vals: Vec<u32> = e.vars.iter().map(|&i| out.assignment[i]).collect();
            e.oracle.holds(&vals, inst.b())
        })
        .collect();
    v.check(
        "events avoided",
        holding.is_empty(),
        match holding.first() {
            None => format!("all {} events false", inst.m()),
            Some(k) => format!("event {} holds", k + 1),
        },
    );
    if let Some(cm) = out.bound {
        v.check(
            "resamplings",
            (out.resamplings as u64) < cm.max(1) || inst.m() == 0,
            format!("{} against C m = {cm}", out.resamplings),
        );
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectiveOutput {
    pub colors: Vec<u32>,
    pub num_colors: usize,
    pub defect_bound: usize,
}

pub fn verify_defective(g: &Graph, out: &DefectiveOutput) -> Verification {
    let mut v = Verification::new();
    if out.colors.len() != g.n() {
        v.check("artifact", false, "one color per vertex");
        return v;
    }
    let defect = (0..g.n())
        .map(|u| g.neighbors(u).iter().filter(|&&w| out.colors[w] == out.colors[u]).count())
        .max()
        .unwrap_or(0);
    let distinct = out.colors.iter().collect::<std::collections::BTreeSet<_>>().len();
    v.check("defect", defect <= out.defect_bound, format!("max defect {defect}, bound {}", out.defect_bound));
    v.check("colors", distinct == out.num_colors, format!("{distinct} distinct colors, reported {}", out.num_colors));
    v.summary = json!({ "max_defect": defect, "colors": distinct });
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomaticOutput {
    pub colors: Vec<u32>,
    pub size: usize,
    #[serde(default)]
    pub note: Option<String>,
}

pub fn verify_domatic(g: &Graph, out: &DomaticOutput) -> Verification {
    let mut v = Verification::new();
    if out.colors.len() != g.n() || out.size == 0 {
        v.check("artifact", false, "one class per vertex and at least one class");
        return v;
    }
    // Row per vertex: which classes its closed neighbourhood meets.
    let matrix: Vec<String> = (0..g.n())
        .map(|u| {
            let mut row = vec![b'0'; out.size];
            for &w in g.neighbors(u).iter().chain(std::iter::once(&u)) {
                if let Some(c) = row.get_mut(out.colors[w] as usize) {
                    *c = b'1';
                }
            }
            String::from_utf8(row).unwrap()
        })
        .collect();
    let missing = matrix.iter().position(|r| r.contains('0'));
    let in_range = out.colors.iter().all(|&c| (c as usize) < out.size);
    v.check("classes", in_range, format!("classes 0..{}", out.size));
    v.check(
        "coverage",
        missing.is_none(),
        match missing {
            None => format!("every closed neighbourhood meets all {} classes", out.size),
            Some(u) => format!("vertex {} misses a class", u + 1),
        },
    );
    v.summary = json!({ "coverage": matrix });
    v
}
