//! Subcommand implementations. Each returns an [`Outcome`] carrying both
//! the JSON result and the table text.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use adtnet_core::codecon::{self, CodeError, CodeOutcome, CodingStats, ReceiverCut};
use adtnet_core::delaynet::{self, DelayCode, DelayError, DelayedVerdict};
use adtnet_core::erasim::{self, ErasureError, FailureModel, Mode, StaticSolution, TimeVaryingVerdict};
use adtnet_core::format::{self, FormatError};
use adtnet_core::galois::{ArithmeticError, GaloisField, RationalField};
use adtnet_core::mincut::{self, CutValueReport, Method, MincutError, MincutOptions, Witness};
use adtnet_core::netmodel::{CodeAssignment, ConnectionClass, ModelError, Network, NodeId, PortId};
use adtnet_core::par::Exec;
use adtnet_core::rng::Seed;
use serde::Serialize;

use crate::report::{table, Outcome, Status};
use crate::Common;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {error}")]
    Format { path: PathBuf, error: FormatError },
    #[error(transparent)]
    Field(#[from] ArithmeticError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Mincut(#[from] MincutError),
    #[error(transparent)]
    Erasure(#[from] ErasureError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn load(path: &Path) -> Result<Network, CliError> {
    let text = read(path)?;
    format::load(&text).map_err(|error| CliError::Format { path: path.to_path_buf(), error })
}

fn load_with(path: &Path, q: Option<u32>) -> Result<Network, CliError> {
    let net = load(path)?;
    match q {
        Some(q) => Ok(net.with_field(GaloisField::of_order(q)?)),
        None => Ok(net),
    }
}

fn exec(common: &Common) -> Exec {
    if common.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

/// Structural problems or a cycle stop the static pipeline.
fn require_static(net: &Network) -> Result<(), CliError> {
    let report = net.validate();
    if !report.is_valid() {
        return Err(CliError::Usage(format!("invalid network: {}", report.problems().join("; "))));
    }
    if !report.acyclic {
        return Err(CliError::Usage("the port graph has a cycle; use `adtnet delay` for networks with unit link delay".into()));
    }
    Ok(())
}

fn node(net: &Network, name: &str) -> Result<NodeId, CliError> {
    net.node_by_name(name).ok_or_else(|| CliError::Usage(format!("no node named `{name}`")))
}

fn ports(ps: &[PortId]) -> String {
    ps.iter().map(|p| p.number().to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

// validate

#[derive(Serialize)]
struct Counts {
    nodes: usize,
    ports: usize,
    edges: usize,
    sources: usize,
    destinations: usize,
}

#[derive(Serialize)]
struct Hyperedge {
    port: PortId,
    ports: Vec<PortId>,
}

#[derive(Serialize)]
struct ValidateResult {
    valid: bool,
    pipeline: &'static str,
    counts: Counts,
    acyclic: bool,
    cycle: Option<Vec<PortId>>,
    problems: Vec<String>,
    hyperedges: Vec<Hyperedge>,
    mac: Vec<Hyperedge>,
}

pub fn validate(path: &Path, delay: Option<bool>) -> Result<Outcome, CliError> {
    let net = load(path)?;
    let delay = delay.unwrap_or(net.is_delay());
    let report = net.validate();
    let mut problems = report.problems();
    if !delay && !report.acyclic {
        let cycle = report.cycle.as_deref().map(ports).unwrap_or_default();
        problems.push(format!("port graph has a cycle through ports {cycle}; the static pipeline needs an acyclic network"));
    }
    // Only fan-outs and fan-ins of two or more edges.
    let to_h = |v: Vec<(PortId, Vec<PortId>)>| {
        v.into_iter().filter(|(_, ps)| ps.len() > 1).map(|(port, ports)| Hyperedge { port, ports }).collect::<Vec<_>>()
    };
    let result = ValidateResult {
        valid: problems.is_empty(),
        pipeline: if delay { "delay" } else { "static" },
        counts: Counts {
            nodes: net.nodes().len(),
            ports: net.num_ports(),
            edges: net.edges().len(),
            sources: net.sources().len(),
            destinations: net.destinations().len(),
        },
        acyclic: report.acyclic,
        cycle: report.cycle.clone(),
        problems,
        hyperedges: to_h(net.hyperedges()),
        mac: to_h(net.mac_groups()),
    };
    let mut t = String::new();
    let c = &result.counts;
    writeln!(t, "network   {}", path.display()).unwrap();
    writeln!(t, "field     GF({})", net.field().order()).unwrap();
    writeln!(t, "size      {} nodes, {} ports, {} edges", c.nodes, c.ports, c.edges).unwrap();
    writeln!(t, "endpoints {} sources, {} destinations", c.sources, c.destinations).unwrap();
    writeln!(t, "pipeline  {}", result.pipeline).unwrap();
    writeln!(t, "acyclic   {}", if result.acyclic { "yes" } else { "no" }).unwrap();
    for h in &result.hyperedges {
        writeln!(t, "broadcast {} -> {}", h.port.number(), ports(&h.ports)).unwrap();
    }
    for h in &result.mac {
        writeln!(t, "mac       {} <- {}", h.port.number(), ports(&h.ports)).unwrap();
    }
    if result.valid {
        writeln!(t, "valid").unwrap();
    } else {
        for p in &result.problems {
            writeln!(t, "problem   {p}").unwrap();
        }
    }
    let status = if result.valid { Status::Ok } else { Status::Invalid };
    Ok(Outcome::new(status, &result, t))
}

// mincut

#[derive(Serialize)]
struct MincutResult {
    field: u32,
    pairs: Vec<CutValueReport>,
}

pub fn mincut(
    path: &Path,
    source: Option<&str>,
    dest: Option<&str>,
    method: Method,
    trials: usize,
    common: &Common,
) -> Result<Outcome, CliError> {
    let net = load_with(path, common.q)?;
    let report = net.validate();
    if !report.is_valid() {
        return Err(CliError::Usage(format!("invalid network: {}", report.problems().join("; "))));
    }
    let senders: Vec<NodeId> = match source {
        Some(s) => vec![node(&net, s)?],
        None => net.sources().iter().map(|e| e.node).collect(),
    };
    let receivers: Vec<NodeId> = match dest {
        Some(d) => vec![node(&net, d)?],
        None => net.destinations().iter().map(|e| e.node).collect(),
    };
    let pairs: Vec<(NodeId, NodeId)> =
        senders.iter().flat_map(|&s| receivers.iter().filter(move |&&t| t != s).map(move |&t| (s, t))).collect();
    if pairs.is_empty() {
        return Err(CliError::Usage("no source/destination pairs to evaluate".into()));
    }
    let options = MincutOptions { method, trials, seed: Seed(common.seed), exec: exec(common), ..MincutOptions::default() };
    let reports = mincut::mincut_all_pairs(&net, &pairs, &options).into_iter().collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let witness = match &r.witness {
                Witness::Cut(nodes) => format!("{{{}}}", nodes.join(", ")),
                Witness::Code(_) => format!("rank over {} trials, per-trial bound {:.4}", r.trials, r.confidence),
            };
            vec![r.source.clone(), r.destination.clone(), r.value.to_string(), r.method.to_string(), witness]
        })
        .collect();
    let mut t = table(&["source", "dest", "mincut", "method", "witness"], &rows);
    if reports.iter().any(|r| r.below_recommended) {
        t.push_str("warning: per-trial success bound below 0.5; consider a larger --q or more --trials\n");
    }
    Ok(Outcome::new(Status::Ok, &MincutResult { field: net.field().order(), pairs: reports }, t))
}

// code

#[derive(Serialize)]
struct CodeResult<'a> {
    field: u32,
    class: ConnectionClass,
    assignment: &'a CodeAssignment,
    verdict: &'a codecon::CodeVerdict,
    stats: &'a CodingStats,
    system_matrix: Vec<Vec<u32>>,
}

#[derive(Serialize)]
struct Infeasible<'a> {
    field: u32,
    class: ConnectionClass,
    reason: String,
    cuts: &'a [ReceiverCut],
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<&'a CodingStats>,
}

fn cuts_table(cuts: &[ReceiverCut]) -> String {
    let rows: Vec<Vec<String>> = cuts
        .iter()
        .map(|c| vec![c.sources.join("+"), c.receiver.clone(), c.mincut.to_string(), c.required.to_string()])
        .collect();
    table(&["sources", "receiver", "mincut", "required"], &rows)
}

fn stats_line(s: &CodingStats) -> String {
    format!(
        "draws {}  successes {}  rate {}  bound (1-{}/{})^{} = {}\n",
        s.trials,
        s.successes,
        fmt_f(s.empirical_rate),
        s.receivers,
        s.q,
        s.eta,
        fmt_f(s.bound)
    )
}

pub fn code(
    path: &Path,
    class: Option<ConnectionClass>,
    trials: usize,
    out: Option<&Path>,
    common: &Common,
) -> Result<Outcome, CliError> {
    let net = load_with(path, common.q)?;
    require_static(&net)?;
    let mut set = net.connections().cloned().ok_or(CodeError::MissingConnections)?;
    if let Some(c) = class {
        set.class = c;
    }
    let errors = set.check(&net);
    if !errors.is_empty() {
        return Err(ModelError::InvalidConnections(errors.join("; ")).into());
    }
    let q = net.field().order();
    let result = codecon::random_code(&net, Some(&set), trials, Seed(common.seed), exec(common));
    let CodeOutcome { assignment, verdict, stats } = match result {
        Ok(o) => o,
        Err(CodeError::Infeasible { reason, cuts }) => {
            let t = format!("infeasible: {reason}\n{}", cuts_table(&cuts));
            let r = Infeasible { field: q, class: set.class, reason, cuts: &cuts, stats: None };
            return Ok(Outcome::new(Status::Infeasible, &r, t));
        }
        Err(e @ CodeError::TrialsExhausted { .. }) => {
            let reason = e.to_string();
            let CodeError::TrialsExhausted { stats, cuts } = e else { unreachable!() };
            let t = format!("{reason}\n{}{}", stats_line(&stats), cuts_table(&cuts));
            let r = Infeasible { field: q, class: set.class, reason, cuts: &cuts, stats: Some(&stats) };
            return Ok(Outcome::new(Status::Infeasible, &r, t));
        }
        Err(e) => return Err(e.into()),
    };
    let sm = codecon::system_matrix(&net, &assignment)?;
    if let Some(p) = out {
        fs::write(p, format::save_assignment(&assignment)).map_err(|e| CliError::io(p, e))?;
    }
    let mut t = String::new();
    writeln!(t, "class     {}", set.class).unwrap();
    writeln!(t, "field     GF({q})").unwrap();
    t.push_str(&stats_line(&stats));
    t.push_str(&verdict_table(&verdict));
    writeln!(t, "system matrix M ({}x{}):", sm.matrix.rows(), sm.matrix.cols()).unwrap();
    for line in sm.matrix.to_string().lines() {
        writeln!(t, "  {line}").unwrap();
    }
    if let Some(p) = out {
        writeln!(t, "assignment written to {}", p.display()).unwrap();
    }
    let r = CodeResult {
        field: q,
        class: set.class,
        assignment: &assignment,
        verdict: &verdict,
        stats: &stats,
        system_matrix: codecon::to_values(&sm.matrix),
    };
    Ok(Outcome::new(Status::Ok, &r, t))
}

fn verdict_table(v: &codecon::CodeVerdict) -> String {
    let rows: Vec<Vec<String>> = v
        .receivers
        .iter()
        .map(|r| {
            vec![
                r.receiver.clone(),
                r.required.to_string(),
                r.rank.to_string(),
                if r.decodable { "yes".into() } else { "no".into() },
                r.reason.clone().unwrap_or_default(),
            ]
        })
        .collect();
    table(&["receiver", "required", "rank", "decodes", "reason"], &rows)
}

// verify

#[derive(Serialize)]
struct VerifyResult<'a> {
    field: u32,
    verdict: &'a codecon::CodeVerdict,
}

pub fn verify(path: &Path, assignment: &Path, q: Option<u32>) -> Result<Outcome, CliError> {
    let net = load_with(path, q)?;
    require_static(&net)?;
    let text = read(assignment)?;
    let code =
        format::load_assignment(&text, &net).map_err(|error| CliError::Format { path: assignment.to_path_buf(), error })?;
    let verdict = codecon::verify(&net, &code, None)?;
    let mut t = verdict_table(&verdict);
    t.push_str(if verdict.feasible { "feasible\n" } else { "infeasible\n" });
    let status = if verdict.feasible { Status::Ok } else { Status::Infeasible };
    Ok(Outcome::new(status, &VerifyResult { field: net.field().order(), verdict: &verdict }, t))
}

// erasure

#[derive(Serialize)]
struct ErasureResult<'a> {
    field: u32,
    model: &'a FailureModel,
    samples: usize,
    time_varying: &'a TimeVaryingVerdict,
    #[serde(rename = "static", skip_serializing_if = "Option::is_none")]
    static_solution: Option<StaticReport<'a>>,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum StaticReport<'a> {
    Found { solution: &'a StaticSolution },
    Infeasible { reason: String },
}

pub fn erasure(
    path: &Path,
    mode: Mode,
    samples: usize,
    iid: Option<f64>,
    r#static: bool,
    trials: usize,
    common: &Common,
) -> Result<Outcome, CliError> {
    let net = load_with(path, common.q)?;
    require_static(&net)?;
    let model = match (iid, net.erasures()) {
        (Some(p), _) => FailureModel::Iid { iid: p },
        (None, Some(m)) => m.clone(),
        (None, None) => {
            return Err(CliError::Usage("no failure model: the file has no `erasures` and --iid was not given".into()))
        }
    };
    model.check(&net)?;
    let set = net.connections().cloned().ok_or(CodeError::MissingConnections)?;
    let seed = Seed(common.seed);
    let options = MincutOptions { seed: seed.derive(1), exec: exec(common), ..MincutOptions::default() };
    let tv = erasim::feasibility_time_varying(&net, &set, &model, mode, samples, seed, &options)?;

    let mut t = String::new();
    writeln!(t, "mode      {mode}").unwrap();
    if mode == Mode::MonteCarlo {
        writeln!(t, "samples   {samples}").unwrap();
    }
    let rows: Vec<Vec<String>> = tv
        .receivers
        .iter()
        .map(|r| {
            let se = r.std_error.map(fmt_f).unwrap_or_else(|| "-".into());
            vec![r.receiver.clone(), fmt_f(r.average_mincut), se, r.required.to_string(), fmt_f(r.margin)]
        })
        .collect();
    t.push_str(&table(&["receiver", "avg mincut", "std error", "required", "margin"], &rows));
    writeln!(t, "time-varying multicast {}", if tv.feasible { "feasible" } else { "infeasible" }).unwrap();

    let mut static_ok = true;
    let solution;
    let static_solution = if r#static {
        let patterns: Vec<_> = model.patterns(&net, erasim::DEFAULT_PATTERN_CAP)?.into_iter().map(|(p, _)| p).collect();
        match erasim::static_solution(&net, &set, &patterns, trials, seed.derive(2), exec(common)) {
            Ok(s) => {
                solution = s;
                writeln!(
                    t,
                    "static code valid under all {} patterns (draw {} of {})",
                    patterns.len(),
                    solution.stats.first_success.map_or(0, |k| k + 1),
                    solution.stats.trials
                )
                .unwrap();
                Some(StaticReport::Found { solution: &solution })
            }
            Err(e @ (ErasureError::InfeasiblePattern { .. } | ErasureError::TrialsExhausted { .. })) => {
                static_ok = false;
                writeln!(t, "static: {e}").unwrap();
                Some(StaticReport::Infeasible { reason: e.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let status = if tv.feasible && static_ok { Status::Ok } else { Status::Infeasible };
    let r = ErasureResult { field: net.field().order(), model: &model, samples, time_varying: &tv, static_solution };
    Ok(Outcome::new(status, &r, t))
}

// delay

#[derive(Serialize)]
struct DelayResult<'a> {
    field: u32,
    acyclic: bool,
    nilpotency: Option<usize>,
    order: usize,
    matrix: &'a adtnet_core::linalg::Matrix<adtnet_core::galois::RationalFunction>,
    series: Vec<Vec<String>>,
    row_blocks: &'a [codecon::Block],
    col_blocks: &'a [codecon::Block],
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<&'a DelayedVerdict>,
    assignment: &'a CodeAssignment,
}

pub fn delay(path: &Path, assignment: Option<&Path>, order: Option<usize>, common: &Common) -> Result<Outcome, CliError> {
    let net = load_with(path, common.q)?;
    let report = net.validate();
    if !report.is_valid() {
        return Err(CliError::Usage(format!("invalid network: {}", report.problems().join("; "))));
    }
    let seed = Seed(common.seed);
    let code = match assignment {
        Some(p) => {
            let text = read(p)?;
            format::load_assignment(&text, &net).map_err(|error| CliError::Format { path: p.to_path_buf(), error })?
        }
        None => CodeAssignment::random(&net, &mut seed.rng()),
    };
    let order = order.unwrap_or_else(|| delaynet::default_order(&net));
    let dcode = DelayCode::from(code.clone());
    let sm = delaynet::delayed_system_matrix(&net, &dcode)?;
    let rf = RationalField::new(net.field().clone());
    let mut series = Vec::with_capacity(sm.m.rows());
    for i in 0..sm.m.rows() {
        let mut row = Vec::with_capacity(sm.m.cols());
        for j in 0..sm.m.cols() {
            let p = rf.expand(sm.m.get(i, j), order + 1)?;
            row.push(p.to_string());
        }
        series.push(row);
    }
    let verdict = match net.connections() {
        Some(_) => Some(delaynet::verify_delayed(&net, &dcode, None, seed.derive(1))?),
        None => None,
    };

    let mut t = String::new();
    writeln!(t, "field     GF({})", net.field().order()).unwrap();
    writeln!(t, "acyclic   {}", if report.acyclic { "yes" } else { "no" }).unwrap();
    match sm.nilpotency {
        Some(k) => writeln!(t, "F nilpotent with index {k}").unwrap(),
        None => writeln!(t, "F not nilpotent; inverse computed over GF(q)(D)").unwrap(),
    }
    writeln!(t, "M(D) ({}x{}):", sm.m.rows(), sm.m.cols()).unwrap();
    let mut rows = Vec::new();
    for (i, line) in series.iter().enumerate() {
        for (j, s) in line.iter().enumerate() {
            rows.push(vec![format!("({},{})", i + 1, j + 1), sm.m.get(i, j).to_string(), format!("{s} + O(D^{})", order + 1)]);
        }
    }
    t.push_str(&table(&["entry", "exact", "series"], &rows));
    let mut status = Status::Ok;
    if let Some(v) = &verdict {
        let rows: Vec<Vec<String>> = v
            .receivers
            .iter()
            .map(|r| {
                vec![
                    r.receiver.clone(),
                    r.required.to_string(),
                    r.rank.to_string(),
                    r.evaluation_rank.to_string(),
                    if r.decodable { "yes".into() } else { "no".into() },
                ]
            })
            .collect();
        t.push_str(&table(&["receiver", "required", "rank", "eval rank", "decodes"], &rows));
        writeln!(t, "{}", if v.feasible { "feasible" } else { "infeasible" }).unwrap();
        if !v.feasible {
            status = Status::Infeasible;
        }
    }
    let r = DelayResult {
        field: net.field().order(),
        acyclic: report.acyclic,
        nilpotency: sm.nilpotency,
        order,
        matrix: &sm.m,
        series,
        row_blocks: &sm.row_blocks,
        col_blocks: &sm.col_blocks,
        verdict: verdict.as_ref(),
        assignment: &code,
    };
    Ok(Outcome::new(status, &r, t))
}
