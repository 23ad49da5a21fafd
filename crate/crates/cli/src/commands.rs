use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use derand_core::apps::{
    defective_color, domatic_partition, rainbow_color, DefectiveConfig, DomaticConfig, DomaticHooks, RainbowConfig,
    SplitConfig,
};
use derand_core::codes::{
    build_fooling_code_with, build_unbiased_code_with, CodeReport, FoolingConfig, UnbiasedConfig, VerifyMode,
    DEFAULT_SEED_BUDGET,
};
use derand_core::fourier::{generator_rows, maximize_character_sum_with, wht, CharSumConfig, CharacterSum};
use derand_core::juntas::{
    default_t_cap, optimize_graded, partition_variables_with, JuntaConfig, PartitionConfig, SplitMethod,
};
use derand_core::lll::{deterministic_mt, solve_randomized, MtConfig, DEFAULT_TREE_BUDGET};
use derand_core::{Dyadic, Error};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use serde_json::{json, Value};

use crate::formats::{self, FormatError};
use crate::report::{digest, InputInfo, RunReport, Verification};
use crate::verify::{self as check, *};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Format(String),
    /// The solver declined or could not finish the instance.
    Refused(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) | Self::Format(_) => 1,
            Self::Refused(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io(m) => write!(f, "io error: {m}"),
            Self::Format(m) => write!(f, "format error: {m}"),
            Self::Refused(m) => write!(f, "refused: {m}"),
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        Self::Format(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Refused(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "derand", version, about = "Deterministic derandomization toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for randomized paths.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Cap on enumerated seeds, witness trees or sampled points.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Include wall time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CodeArgs {
    pub family: PathBuf,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub s: Option<u8>,
    #[arg(long)]
    pub length_cap: Option<usize>,
    /// Also write the code file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Code whose seed space has uniform marginals on every set.
    FoolCode(CodeArgs),
    /// Code with a nonzero xor on every nonempty set.
    UnbiasedCode(CodeArgs),
    /// Point on which at least half of the nonzero generator rows are odd.
    HeavyCodeword {
        code: PathBuf,
        #[arg(long)]
        chunk: Option<usize>,
    },
    /// Walsh-Hadamard spectrum of a table.
    Wht { table: PathBuf },
    /// Variable partition with bounded loads.
    Partition {
        family: PathBuf,
        #[arg(long)]
        t_cap: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Split by conditional expectations only.
        #[arg(long)]
        conditional: bool,
    },
    /// Assignment beating the mean of a sum of juntas.
    Optimize {
        system: PathBuf,
        #[arg(long)]
        t_cap: Option<usize>,
    },
    /// Coloring with many rainbow hyperedges.
    Rainbow {
        hypergraph: PathBuf,
        #[arg(long)]
        b: Option<u32>,
    },
    /// Assignment avoiding every bad event.
    LllSolve {
        instance: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Smallest size cut to try.
        #[arg(long)]
        k: Option<usize>,
        /// Resampling bound constant.
        #[arg(long)]
        c: Option<u64>,
        /// Constant in the reference size cut.
        #[arg(long, default_value_t = 1.0)]
        c_k: f64,
        /// Run even when the LLL condition fails.
        #[arg(long)]
        force: bool,
        /// Plain Moser-Tardos on a seeded table.
        #[arg(long)]
        randomized: bool,
    },
    /// Coloring with at most k same-colored neighbours per vertex.
    DefectiveColor {
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Initial degree-splitting constant.
        #[arg(long, default_value_t = 4.0)]
        split_k: f64,
        #[arg(long)]
        no_escalate: bool,
        /// Load cap for the junta optimizer.
        #[arg(long)]
        t_cap: Option<usize>,
    },
    /// Partition of a regular graph into dominating sets.
    Domatic {
        graph: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        #[arg(long, default_value_t = 10.0)]
        phi: f64,
        #[arg(long)]
        c1: Option<usize>,
        #[arg(long)]
        c2: Option<usize>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
    },
    /// Re-check a report against its input.
    Verify {
        report: PathBuf,
        /// Input file, if it moved since the run.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<(String, InputInfo), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let info = InputInfo::new(&path.display().to_string(), &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Format(format!("{}: not UTF-8", path.display())))?;
    Ok((text, info))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("outputs serialize")
}

fn report(command: &str, input: InputInfo, parameters: Value, output: Value, verification: Verification) -> RunReport {
    RunReport { command: command.to_string(), input, parameters, output, verification, wall_time_ms: None }
}

fn code_params(r: &CodeReport) -> Value {
    json!({
        "k": r.shape.map(|s| s.k),
        "s": r.shape.map(|s| s.s),
        "degree_cap": r.shape.map(|s| s.d),
        "round_epsilon": r.shape.map(|s| s.epsilon),
        "coordinates": r.coordinates,
        "max_rounds": r.max_rounds,
        "rounds": r.rounds,
        "length": r.length,
        "length_cap": r.length_cap,
        "potential": r.potential,
    })
}

fn code_command(name: &str, a: &CodeArgs, g: &Global, mode: VerifyMode) -> Result<RunReport, CliError> {
    let (text, info) = read(&a.family)?;
    let family = formats::parse_family(&text)?;
    let (code, rep) = match mode {
        VerifyMode::Fooling => {
            build_fooling_code_with(&family, &FoolingConfig { k: a.k, s: a.s, length_cap: a.length_cap })?
        }
        VerifyMode::Unbiased => {
            build_unbiased_code_with(&family, &UnbiasedConfig { k: a.k, s: a.s, length_cap: a.length_cap })?
        }
    };
    if let Some(out) = &a.out {
        fs::write(out, formats::write_code(&code)).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    }
    let budget = g.budget.unwrap_or(DEFAULT_SEED_BUDGET);
    let output = CodeOutput::from_code(&code, rep.length_cap);
    let v = verify_code_output(&family, &output, mode, budget);
    let mut params = code_params(&rep);
    params["seed_budget"] = json!(budget);
    Ok(report(name, info, params, to_value(&output), v))
}

fn heavy(path: &Path, chunk: Option<usize>) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let code = formats::parse_code(&text)?;
    let mut cs = CharacterSum::new(code.n());
    for row in generator_rows(&code) {
        let support: Vec<usize> = row.iter_ones().collect();
        cs.add_term(&support, Dyadic::from_int(-1))?;
    }
    let out = maximize_character_sum_with(&cs, &CharSumConfig { chunk, ..CharSumConfig::default() })?;
    let rows = generator_rows(&code);
    let weight = rows.iter().filter(|r| r.dot(&out.x).unwrap_or(false)).count();
    let output = HeavyOutput { x: bits_to_string(&out.x), weight };
    let v = verify_heavy(&code, &output);
    let params = json!({
        "chunk": out.chunk,
        "seed_length": out.code_length,
        "baseline": out.baseline.to_string(),
        "value": out.value.to_string(),
    });
    Ok(report("heavy-codeword", info, params, to_value(&output), v))
}

fn wht_command(path: &Path) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let table = formats::parse_table(&text)?;
    let spectrum = wht(&table)?;
    let output = WhtOutput { spectrum: spectrum.coeffs().iter().map(Dyadic::to_string).collect() };
    let v = verify_wht(&table, &output);
    Ok(report("wht", info, json!({ "arity": spectrum.arity() }), to_value(&output), v))
}

fn partition(
    path: &Path,
    t_cap: Option<usize>,
    epsilon: f64,
    conditional: bool,
    g: &Global,
) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let family = formats::parse_family(&text)?;
    let t_cap = t_cap.unwrap_or_else(|| default_t_cap(family.len(), family.n()));
    let mut cfg = PartitionConfig { epsilon, conditional_only: conditional, ..PartitionConfig::default() };
    if let Some(b) = g.budget {
        cfg.sample_budget = b;
    }
    let (part, rep) = partition_variables_with(&family, t_cap, &cfg)?;
    let mut labels = vec![0; family.n()];
    for (k, p) in part.parts.iter().enumerate() {
        for &i in p {
            labels[i] = k + 1;
        }
    }
    let output = PartitionOutput {
        t_cap,
        labels,
        parts: part.parts.len(),
        potential: rep.potential.iter().map(u128::to_string).collect(),
    };
    let v = verify_partition(&family, &output);
    let methods: Vec<Value> = rep
        .methods
        .iter()
        .map(|m| match m {
            SplitMethod::Sampled { samples } => json!({ "sampled": samples }),
            SplitMethod::Conditional => json!("conditional"),
        })
        .collect();
    let params = json!({
        "t_cap": t_cap,
        "epsilon": epsilon,
        "sample_budget": cfg.sample_budget,
        "conditional_only": conditional,
        "methods": methods,
    });
    Ok(report("partition", info, params, to_value(&output), v))
}

fn optimize(path: &Path, t_cap: Option<usize>) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let parsed = formats::parse_juntas(&text)?;
    let peo = MixedPeo::new(&parsed)?;
    let cfg = JuntaConfig { t_cap, ..JuntaConfig::default() };
    let out = optimize_graded(&parsed.system, &peo, &cfg)?;
    let output =
        OptimizeOutput { x: out.x.clone(), value: out.value.to_string(), expectation: out.expectation.to_string() };
    let v = verify_optimize(&parsed, &peo, &output);
    let params = json!({ "t_cap": out.t_cap, "parts": out.parts, "b": parsed.system.b() });
    Ok(report("optimize", info, params, to_value(&output), v))
}

fn rainbow(path: &Path, b: Option<u32>) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let h = formats::parse_hypergraph(&text)?;
    let out = rainbow_color(&h, &RainbowConfig { b, ..RainbowConfig::default() })?;
    let output = RainbowOutput { colors: out.colors.clone(), rainbow: out.rainbow, bound: out.bound };
    let v = verify_rainbow(&h, &output);
    let params = json!({
        "b": out.b,
        "method": format!("{:?}", out.method),
        "expectation": out.expectation.to_string(),
        "d": h.d(),
        "m": h.m(),
    });
    Ok(report("rainbow", info, params, to_value(&output), v))
}

#[allow(clippy::too_many_arguments)]
fn lll(
    path: &Path,
    epsilon: f64,
    k: Option<usize>,
    c: Option<u64>,
    c_k: f64,
    force: bool,
    randomized: bool,
    g: &Global,
) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let inst = formats::parse_lll(&text)?;
    if randomized {
        if !force {
            inst.check_condition(epsilon)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
        let max_entries = g.budget.map_or(1 << 24, |b| b as usize);
        let (run, table) = solve_randomized(&inst, 4, max_entries, &mut rng)?;
        let output = LllOutput { assignment: run.assignment.clone(), resamplings: run.log.len(), bound: None };
        let v = verify_lll(&inst, &output);
        let params = json!({
            "mode": "randomized",
            "seed": g.seed,
            "epsilon": epsilon,
            "lll_lhs": inst.lll_lhs(epsilon),
            "d": inst.d(),
            "table_columns": table.columns(),
            "max_entries": max_entries,
        });
        return Ok(report("lll-solve", info, params, to_value(&output), v));
    }
    let cfg = MtConfig {
        epsilon,
        k,
        c_k,
        c,
        force,
        tree_budget: g.budget.map_or(DEFAULT_TREE_BUDGET, |b| b as usize),
        junta: JuntaConfig::default(),
    };
    let out = deterministic_mt(&inst, &cfg)?;
    let output = LllOutput { assignment: out.assignment.clone(), resamplings: out.run.log.len(), bound: Some(out.cm) };
    let mut v = verify_lll(&inst, &output);
    v.check(
        "potential",
        out.potential.below_one(),
        format!("C m S(R) = {} against C m = {}", out.potential.scaled(), out.cm),
    );
    let params = json!({
        "mode": "deterministic",
        "epsilon": epsilon,
        "d": inst.d(),
        "p_max": inst.p_max().to_string(),
        "lll_lhs": out.lll_lhs,
        "k": out.k,
        "k_reference": out.k_reference,
        "c_k": c_k,
        "c": out.c,
        "cm": out.cm,
        "tree_budget": cfg.tree_budget,
        "small_trees": out.small_trees,
        "tail_trees": out.tail_trees,
        "small_weight": out.small_weight.to_string(),
        "tail_weight": out.tail_weight.to_string(),
        "scaled_expectation": out.scaled_expectation.to_string(),
        "scaled_potential": out.potential.scaled().to_string(),
    });
    Ok(report("lll-solve", info, params, to_value(&output), v))
}

fn defective(
    path: &Path,
    k: usize,
    split_k: f64,
    no_escalate: bool,
    t_cap: Option<usize>,
) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let g = formats::parse_graph(&text)?;
    let split = SplitConfig { k: split_k, escalate: !no_escalate, ..SplitConfig::default() };
    let mut cfg = DefectiveConfig { split, ..DefectiveConfig::default() };
    if t_cap.is_some() {
        cfg.junta.t_cap = t_cap;
    }
    let out = defective_color(&g, k, &cfg)?;
    let bound = (out.c_defect * k as f64).floor() as usize;
    let output = DefectiveOutput { colors: out.colors.clone(), num_colors: out.num_colors, defect_bound: bound };
    let mut v = verify_defective(&g, &output);
    let schedule = out.schedule.as_ref().map(|s| {
        let invariants = s.invariants();
        // Clamped stages run below the range where the invariants apply.
        if s.asymptotic {
            v.check("schedule", invariants.iter().all(|&b| b), format!("{invariants:?}"));
        }
        json!({
            "k_const": s.k_const,
            "r": s.r,
            "final_delta": s.final_delta,
            "final_t": s.final_t,
            "asymptotic": s.asymptotic,
            "invariants": invariants,
            "stages": s.stages.iter().map(|st| json!({
                "delta": st.delta, "b": st.b, "j": st.j, "j_target": st.j_target, "t": st.t,
            })).collect::<Vec<_>>(),
        })
    });
    let params = json!({
        "k": k,
        "delta": g.max_degree(),
        "split_k": split_k,
        "escalate": !no_escalate,
        "t_cap": cfg.junta.t_cap,
        "c_defect": out.c_defect,
        "c_colors": out.c_colors,
        "large_split": out.large_split.map(|(j, cap)| json!({ "j": j, "cap": cap })),
        "schedule": schedule,
        "stages": out.stages.iter().map(|s| json!({ "j": s.j, "k": s.k, "cap": s.cap, "measured": s.measured })).collect::<Vec<_>>(),
        "finish_colors": out.finish_colors,
        "notes": out.notes,
    });
    Ok(report("defective-color", info, params, to_value(&output), v))
}

fn domatic(path: &Path, eta: f64, phi: f64, hooks: DomaticHooks) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let g = formats::parse_graph(&text)?;
    let out = domatic_partition(&g, eta, &DomaticConfig { phi, hooks, ..DomaticConfig::default() })?;
    let output = DomaticOutput { colors: out.colors.clone(), size: out.size, note: out.note.clone() };
    let v = verify_domatic(&g, &output);
    let params = json!({
        "eta": eta,
        "phi": phi,
        "degree": g.regular_degree(),
        "c1": out.c1,
        "c2": out.c2,
        "t0": out.t0,
        "t1": out.t1,
    });
    Ok(report("domatic", info, params, to_value(&output), v))
}

fn parse_output<T: serde::de::DeserializeOwned>(v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Format(format!("report output: {e}")))
}

fn verify_report(path: &Path, input: Option<&Path>, g: &Global) -> Result<RunReport, CliError> {
    let (text, info) = read(path)?;
    let original: RunReport = serde_json::from_str(&text).map_err(|e| CliError::Format(format!("report: {e}")))?;
    let input_path = input.map_or_else(|| PathBuf::from(&original.input.path), Path::to_path_buf);
    let (body, _) = read(&input_path)?;
    let mut v = Verification::new();
    let sha = digest(body.as_bytes());
    v.check("input digest", sha == original.input.sha256, format!("sha256 {sha}"));
    let out = &original.output;
    let budget = g.budget.unwrap_or(DEFAULT_SEED_BUDGET);
    let inner = match original.command.as_str() {
        "fool-code" => {
            verify_code_output(&formats::parse_family(&body)?, &parse_output(out)?, VerifyMode::Fooling, budget)
        }
        "unbiased-code" => {
            verify_code_output(&formats::parse_family(&body)?, &parse_output(out)?, VerifyMode::Unbiased, budget)
        }
        "heavy-codeword" => verify_heavy(&formats::parse_code(&body)?, &parse_output(out)?),
        "wht" => verify_wht(&formats::parse_table(&body)?, &parse_output(out)?),
        "partition" => verify_partition(&formats::parse_family(&body)?, &parse_output(out)?),
        "optimize" => {
            let parsed = formats::parse_juntas(&body)?;
            let peo = MixedPeo::new(&parsed)?;
            check::verify_optimize(&parsed, &peo, &parse_output(out)?)
        }
        "rainbow" => verify_rainbow(&formats::parse_hypergraph(&body)?, &parse_output(out)?),
        "lll-solve" => verify_lll(&formats::parse_lll(&body)?, &parse_output(out)?),
        "defective-color" => verify_defective(&formats::parse_graph(&body)?, &parse_output(out)?),
        "domatic" => verify_domatic(&formats::parse_graph(&body)?, &parse_output(out)?),
        other => return Err(CliError::Format(format!("cannot verify command {other:?}"))),
    };
    for c in &inner.checks {
        v.check(&c.name, c.passed, c.detail.clone());
    }
    v.summary = inner.summary;
    let params = json!({ "command": original.command, "input": input_path.display().to_string() });
    let output = json!({ "reported_passed": original.verification.passed });
    Ok(report("verify", info, params, output, v))
}

pub fn dispatch(cli: &Cli) -> Result<RunReport, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::FoolCode(a) => code_command("fool-code", a, g, VerifyMode::Fooling),
        Command::UnbiasedCode(a) => code_command("unbiased-code", a, g, VerifyMode::Unbiased),
        Command::HeavyCodeword { code, chunk } => heavy(code, *chunk),
        Command::Wht { table } => wht_command(table),
        Command::Partition { family, t_cap, epsilon, conditional } => {
            partition(family, *t_cap, *epsilon, *conditional, g)
        }
        Command::Optimize { system, t_cap } => optimize(system, *t_cap),
        Command::Rainbow { hypergraph, b } => rainbow(hypergraph, *b),
        Command::LllSolve { instance, epsilon, k, c, c_k, force, randomized } => {
            lll(instance, *epsilon, *k, *c, *c_k, *force, *randomized, g)
        }
        Command::DefectiveColor { graph, k, split_k, no_escalate, t_cap } => {
            defective(graph, *k, *split_k, *no_escalate, *t_cap)
        }
        Command::Domatic { graph, eta, phi, c1, c2, mu, t0, t1 } => {
            domatic(graph, *eta, *phi, DomaticHooks { c1: *c1, c2: *c2, mu: *mu, t0: *t0, t1: *t1 })
        }
        Command::Verify { report, input } => verify_report(report, input.as_deref(), g),
    }
}
