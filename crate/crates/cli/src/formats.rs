//! Text and JSON input formats. Vertex and variable indices in files are
//! 1-based.

use std::fmt;
use std::sync::Arc;

use derand_core::apps::{Graph, Hypergraph};
use derand_core::codes::{Code, NeighborhoodFamily};
use derand_core::gf2core::BitVec;
use derand_core::juntas::{JuntaSystem, Robp, RobpNode};
use derand_core::lll::{BadEvent, ClauseEvent, CountEvent, Event, LllInstance, RobpEvent, TableEvent};
use derand_core::Dyadic;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatError {
    pub line: Option<usize>,
    pub message: String,
}

impl FormatError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn general(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for FormatError {}

type Parsed<T> = Result<T, FormatError>;

/// Lines with their 1-based numbers, minus `#` comments.
fn lines(text: &str) -> Vec<(usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim())).collect()
}

fn numbers(line: usize, s: &str) -> Parsed<Vec<usize>> {
    s.split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| FormatError::at(line, format!("expected an integer, found {t:?}"))))
        .collect()
}

fn one_based(line: usize, v: usize, n: usize) -> Parsed<usize> {
    if v == 0 || v > n {
        return Err(FormatError::at(line, format!("index {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

type Body<'a> = Vec<(usize, &'a str)>;

/// Header numbers, then the body lines. Blank lines count as records, since
/// a family may hold empty sets.
fn header_and_body<'a>(text: &'a str, fields: usize, what: &str) -> Parsed<(usize, Vec<usize>, Body<'a>)> {
    let all = lines(text);
    let start = all
        .iter()
        .position(|(_, l)| !l.is_empty())
        .ok_or_else(|| FormatError::general(format!("empty {what} file")))?;
    let (hl, h) = all[start];
    let header = numbers(hl, h)?;
    if header.len() != fields {
        return Err(FormatError::at(hl, format!("{what} header needs {fields} numbers")));
    }
    Ok((hl, header, all[start + 1..].to_vec()))
}

/// Trailing blank lines past the declared count are dropped.
fn expect_lines(hl: usize, body: &mut Body<'_>, count: usize) -> Parsed<()> {
    while body.len() > count && body.last().is_some_and(|(_, l)| l.is_empty()) {
        body.pop();
    }
    if body.len() < count {
        return Err(FormatError::at(
            body.last().map_or(hl, |b| b.0),
            format!("expected {count} records, found {}", body.len()),
        ));
    }
    if body.len() > count {
        return Err(FormatError::at(body[count].0, format!("more than the {count} declared records")));
    }
    Ok(())
}

/// Header `n m`, then `m` lines of indices.
pub fn parse_family(text: &str) -> Parsed<NeighborhoodFamily> {
    let (hl, h, mut body) = header_and_body(text, 2, "family")?;
    let (n, m) = (h[0], h[1]);
    expect_lines(hl, &mut body, m)?;
    let mut sets = Vec::with_capacity(m);
    for &(l, s) in &body {
        let set = numbers(l, s)?.into_iter().map(|v| one_based(l, v, n)).collect::<Parsed<Vec<_>>>()?;
        sets.push(set);
    }
    NeighborhoodFamily::new(n, sets).map_err(|e| FormatError::general(e.to_string()))
}

pub fn write_family(f: &NeighborhoodFamily) -> String {
    let mut out = format!("{} {}\n", f.n(), f.len());
    for s in f.sets() {
        let line: Vec<String> = s.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Header `L n`, then `n` hex rows.
pub fn parse_code(text: &str) -> Parsed<Code> {
    let (hl, h, mut body) = header_and_body(text, 2, "code")?;
    let (length, n) = (h[0], h[1]);
    expect_lines(hl, &mut body, n)?;
    let vectors = body
        .iter()
        .map(|&(l, s)| BitVec::from_hex(s, length).map_err(|e| FormatError::at(l, e.to_string())))
        .collect::<Parsed<Vec<_>>>()?;
    Code::new(length, vectors).map_err(|e| FormatError::general(e.to_string()))
}

pub fn write_code(c: &Code) -> String {
    let mut out = format!("{} {}\n", c.length(), c.n());
    for v in c.vectors() {
        out.push_str(&v.to_hex());
        out.push('\n');
    }
    out
}

/// Header `n m d`, then `m` lines of `d` vertices.
pub fn parse_hypergraph(text: &str) -> Parsed<Hypergraph> {
    let (hl, h, mut body) = header_and_body(text, 3, "hypergraph")?;
    let (n, m, d) = (h[0], h[1], h[2]);
    expect_lines(hl, &mut body, m)?;
    let mut edges = Vec::with_capacity(m);
    for &(l, s) in &body {
        let e = numbers(l, s)?.into_iter().map(|v| one_based(l, v, n)).collect::<Parsed<Vec<_>>>()?;
        if e.len() != d {
            return Err(FormatError::at(l, format!("edge has {} vertices, expected {d}", e.len())));
        }
        edges.push(e);
    }
    Hypergraph::new(n, d, edges).map_err(|e| FormatError::general(e.to_string()))
}

/// Header `n m`, then `m` lines `u v`.
pub fn parse_graph(text: &str) -> Parsed<Graph> {
    let (hl, h, mut body) = header_and_body(text, 2, "graph")?;
    let (n, m) = (h[0], h[1]);
    expect_lines(hl, &mut body, m)?;
    let mut edges = Vec::with_capacity(m);
    for &(l, s) in &body {
        let e = numbers(l, s)?;
        if e.len() != 2 {
            return Err(FormatError::at(l, "an edge line holds two vertices"));
        }
        edges.push((one_based(l, e[0], n)?, one_based(l, e[1], n)?));
    }
    Graph::new(n, &edges).map_err(|e| FormatError::general(e.to_string()))
}

/// Whitespace-separated dyadic values; the count must be a power of two.
pub fn parse_table(text: &str) -> Parsed<Vec<Dyadic>> {
    let mut out = Vec::new();
    for (l, s) in lines(text) {
        for t in s.split_whitespace() {
            out.push(t.parse::<Dyadic>().map_err(|e| FormatError::at(l, e.to_string()))?);
        }
    }
    if !out.len().is_power_of_two() {
        return Err(FormatError::general(format!("{} entries is not a power of two", out.len())));
    }
    Ok(out)
}

pub fn dyadic_value(v: &Value) -> Parsed<Dyadic> {
    match v {
        Value::String(s) => s.parse().map_err(|e: derand_core::Error| FormatError::general(e.to_string())),
        Value::Number(n) if n.is_i64() => Ok(Dyadic::from_int(n.as_i64().unwrap())),
        Value::Number(n) => n.to_string().parse().map_err(|e: derand_core::Error| FormatError::general(e.to_string())),
        other => Err(FormatError::general(format!("expected a dyadic value, found {other}"))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobpSpec {
    pub nodes: Vec<RobpNodeSpec>,
    pub sinks: Vec<SinkSpec>,
    /// Id of the start node; the first node by default.
    #[serde(default)]
    pub start: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobpNodeSpec {
    pub id: usize,
    /// 1-based global variable, one of the function's `vars`.
    pub var: usize,
    pub lo: usize,
    pub hi: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SinkSpec {
    pub id: usize,
    pub value: Value,
}

fn parse_robp(spec: &Value, vars: &[usize]) -> Parsed<Robp> {
    let spec: RobpSpec =
        serde_json::from_value(spec.clone()).map_err(|e| FormatError::general(format!("robp payload: {e}")))?;
    let mut ids: Vec<usize> = spec.nodes.iter().map(|n| n.id).chain(spec.sinks.iter().map(|s| s.id)).collect();
    let index = |id: usize| -> Parsed<usize> {
        spec.nodes
            .iter()
            .position(|n| n.id == id)
            .or_else(|| spec.sinks.iter().position(|s| s.id == id).map(|p| p + spec.nodes.len()))
            .ok_or_else(|| FormatError::general(format!("robp references unknown id {id}")))
    };
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(FormatError::general("robp ids repeat"));
    }
    let mut nodes = Vec::with_capacity(spec.nodes.len());
    for n in &spec.nodes {
        let var = vars.iter().position(|&v| v == n.var).ok_or_else(|| {
            FormatError::general(format!("robp node {} reads variable {} outside the support", n.id, n.var))
        })?;
        nodes.push(RobpNode { var, lo: index(n.lo)?, hi: index(n.hi)? });
    }
    let sinks = spec.sinks.iter().map(|s| dyadic_value(&s.value)).collect::<Parsed<Vec<_>>>()?;
    let start = match spec.start {
        Some(id) => index(id)?,
        None => 0,
    };
    Robp::new(vars.len(), nodes, sinks, start).map_err(|e| FormatError::general(e.to_string()))
}

fn convert_vars(vars: &[usize], n: usize) -> Parsed<Vec<usize>> {
    vars.iter()
        .map(|&v| {
            if v == 0 || v > n {
                Err(FormatError::general(format!("variable {v} outside 1..={n}")))
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventSpec {
    pub vars: Vec<usize>,
    pub kind: String,
    pub payload: Value,
    #[serde(default)]
    pub p_bound: Option<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LllFile {
    pub n: usize,
    pub b: u32,
    pub events: Vec<EventSpec>,
}

#[derive(Deserialize)]
struct ThresholdSpec {
    targets: Vec<u32>,
    t: usize,
}

fn event_oracle(spec: &EventSpec) -> Parsed<Arc<dyn BadEvent>> {
    let payload = &spec.payload;
    let fail = |e: serde_json::Error| FormatError::general(format!("{} payload: {e}", spec.kind));
    Ok(match spec.kind.as_str() {
        "table" => {
            let raw: Vec<Value> = serde_json::from_value(payload.clone()).map_err(fail)?;
            let table = raw
                .iter()
                .map(|v| match v {
                    Value::Bool(b) => Ok(*b),
                    Value::Number(n) if n.as_u64() == Some(0) || n.as_u64() == Some(1) => Ok(n.as_u64() == Some(1)),
                    other => Err(FormatError::general(format!("table entry {other} is not 0/1"))),
                })
                .collect::<Parsed<Vec<bool>>>()?;
            Arc::new(TableEvent { table })
        }
        "clause" => Arc::new(ClauseEvent::new(serde_json::from_value(payload.clone()).map_err(fail)?)),
        "threshold" => {
            let t: ThresholdSpec = serde_json::from_value(payload.clone()).map_err(fail)?;
            Arc::new(CountEvent::threshold(&t.targets, t.t))
        }
        "robp" => Arc::new(RobpEvent { program: parse_robp(payload, &spec.vars)? }),
        other => return Err(FormatError::general(format!("unknown event kind {other:?}"))),
    })
}

pub fn parse_lll(text: &str) -> Parsed<LllInstance> {
    let file: LllFile = serde_json::from_str(text).map_err(|e| FormatError::at(e.line(), e.to_string()))?;
    let mut events = Vec::with_capacity(file.events.len());
    for (k, spec) in file.events.iter().enumerate() {
        let vars =
            convert_vars(&spec.vars, file.n).map_err(|e| FormatError::general(format!("event {}: {e}", k + 1)))?;
        let oracle = event_oracle(spec).map_err(|e| FormatError::general(format!("event {}: {e}", k + 1)))?;
        let bound = spec.p_bound.as_ref().map(dyadic_value).transpose()?;
        events.push(Event::new(vars, oracle, bound));
    }
    LllInstance::new(file.n, file.b, events).map_err(|e| FormatError::general(e.to_string()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub vars: Vec<usize>,
    pub kind: String,
    pub payload: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JuntaFile {
    pub n: usize,
    pub b: u32,
    pub functions: Vec<FunctionSpec>,
}

#[derive(Clone, Debug)]
pub enum JuntaFunction {
    /// Entry `sum_t v_t 2^{b t}`.
    Table(Vec<Dyadic>),
    Robp(Robp),
}

#[derive(Clone, Debug)]
pub struct ParsedJuntas {
    pub system: JuntaSystem,
    pub functions: Vec<JuntaFunction>,
}

pub fn parse_juntas(text: &str) -> Parsed<ParsedJuntas> {
    let file: JuntaFile = serde_json::from_str(text).map_err(|e| FormatError::at(e.line(), e.to_string()))?;
    let mut supports = Vec::with_capacity(file.functions.len());
    let mut functions = Vec::with_capacity(file.functions.len());
    for (k, f) in file.functions.iter().enumerate() {
        let ctx = |e: FormatError| FormatError::general(format!("function {}: {e}", k + 1));
        let vars = convert_vars(&f.vars, file.n).map_err(ctx)?;
        let function = match f.kind.as_str() {
            "table" => {
                let raw: Vec<Value> = serde_json::from_value(f.payload.clone())
                    .map_err(|e| ctx(FormatError::general(format!("table payload: {e}"))))?;
                JuntaFunction::Table(raw.iter().map(dyadic_value).collect::<Parsed<Vec<_>>>().map_err(ctx)?)
            }
            "robp" => {
                if file.b != 1 {
                    return Err(ctx(FormatError::general("branching programs read single bits (b = 1)")));
                }
                JuntaFunction::Robp(parse_robp(&f.payload, &f.vars).map_err(ctx)?)
            }
            other => return Err(ctx(FormatError::general(format!("unknown function kind {other:?}")))),
        };
        supports.push(vars);
        functions.push(function);
    }
    let system = JuntaSystem::new(file.n, file.b, supports).map_err(|e| FormatError::general(e.to_string()))?;
    for (k, (f, y)) in functions.iter().zip(system.supports()).enumerate() {
        if let JuntaFunction::Table(t) = f {
            let bits = file.b as usize * y.len();
            if bits > 24 || t.len() != 1 << bits {
                return Err(FormatError::general(format!(
                    "function {}: table needs 2^{bits} entries, found {}",
                    k + 1,
                    t.len()
                )));
            }
        }
    }
    Ok(ParsedJuntas { system, functions })
}
