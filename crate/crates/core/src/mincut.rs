//! S-T min-cut, computed two independent ways.
//!
//! Enumeration follows the cut definition: over every node partition with
//! `S` in Ω and `T` outside, take the rank (over the network's field) of the
//! 0/1 incidence matrix of edges leaving Ω, and minimize. Ports belong to
//! the side of their owning node.
//!
//! The algebraic method draws random codes with a full-size encoder at `S`
//! (one process per output port) and decoder at `T` (one per input port)
//! and reports the largest rank of the system matrix seen.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::codecon::{system_matrix, CodeError};
use crate::galois::Gf;
use crate::linalg::Matrix;
use crate::netmodel::{CodeAssignment, Endpoint, Network, NodeId};
use crate::par::{self, Exec};
use crate::rng::Seed;

pub const DEFAULT_NODE_CAP: usize = 20;
pub const DEFAULT_TRIALS: usize = 8;
/// Largest node count for which [`Method::Auto`] enumerates.
pub const AUTO_ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MincutError {
    #[error("source and destination must differ")]
    SameEndpoints,
    #[error("cut enumeration over {nodes} nodes exceeds the cap of {cap}")]
    TooManyNodes { nodes: usize, cap: usize },
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Code(#[from] Box<CodeError>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Enumeration,
    Algebraic,
    Auto,
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "enum" | "enumeration" => Ok(Method::Enumeration),
            "alg" | "algebraic" => Ok(Method::Algebraic),
            "auto" => Ok(Method::Auto),
            _ => Err(format!("unknown method `{s}` (expected enum, algebraic or auto)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::Algebraic => "algebraic",
            Method::Auto => "auto",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    /// Node names on the source side Ω.
    Cut(Vec<String>),
    /// Assignment achieving the reported rank on the probe network (source
    /// with one process per output port, destination with one per input).
    Code(CodeAssignment),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutValueReport {
    pub source: String,
    pub destination: String,
    pub value: usize,
    pub method: Method,
    pub witness: Witness,
    pub trials: usize,
    /// Per-trial success bound `(1 - 1/q)^η`, `η` the number of edges.
    pub confidence: f64,
    pub below_recommended: bool,
}

#[derive(Clone, Debug)]
pub struct MincutOptions {
    pub method: Method,
    pub trials: usize,
    pub seed: Seed,
    pub node_cap: usize,
    pub exec: Exec,
}

impl Default for MincutOptions {
    fn default() -> Self {
        MincutOptions {
            method: Method::Auto,
            trials: DEFAULT_TRIALS,
            seed: Seed(0),
            node_cap: DEFAULT_NODE_CAP,
            exec: Exec::default(),
        }
    }
}

fn confidence(net: &Network) -> f64 {
    let q = net.field().order() as f64;
    (1.0 - 1.0 / q).powi(net.edges().len() as i32)
}

/// Rank of the incidence matrix of edges from Ω to its complement.
pub fn cut_rank(net: &Network, omega: &[bool]) -> usize {
    let side = |p: crate::netmodel::PortId| omega[net.port(p).owner.0];
    let crossing: Vec<_> = net.edges().iter().filter(|e| side(e.from) && !side(e.to)).collect();
    if crossing.is_empty() {
        return 0;
    }
    let mut rows: Vec<usize> = crossing.iter().map(|e| e.from.0).collect();
    let mut cols: Vec<usize> = crossing.iter().map(|e| e.to.0).collect();
    rows.sort_unstable();
    rows.dedup();
    cols.sort_unstable();
    cols.dedup();
    let mut g = Matrix::filled(rows.len(), cols.len(), Gf::ZERO);
    for e in crossing {
        let r = rows.binary_search(&e.from.0).expect("row present");
        let c = cols.binary_search(&e.to.0).expect("column present");
        g.set(r, c, Gf::ONE);
    }
    g.rank(net.field())
}

pub fn mincut_enumeration(net: &Network, s: NodeId, t: NodeId, cap: usize, exec: Exec) -> Result<CutValueReport, MincutError> {
    if s == t {
        return Err(MincutError::SameEndpoints);
    }
    let n = net.nodes().len();
    if n > cap {
        return Err(MincutError::TooManyNodes { nodes: n, cap });
    }
    let others: Vec<usize> = (0..n).filter(|&k| k != s.0 && k != t.0).collect();
    let partition = |mask: usize| {
        let mut omega = vec![false; n];
        omega[s.0] = true;
        for (bit, &k) in others.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                omega[k] = true;
            }
        }
        omega
    };
    let ranks = par::map(exec, 1usize << others.len(), |mask| cut_rank(net, &partition(mask)));
    let (best_mask, &value) = ranks.iter().enumerate().min_by_key(|&(mask, r)| (*r, mask)).expect("at least the empty extension");
    let omega = partition(best_mask);
    let names = (0..n).filter(|&k| omega[k]).map(|k| net.nodes()[k].name.clone()).collect();
    Ok(CutValueReport {
        source: net.node(s).name.clone(),
        destination: net.node(t).name.clone(),
        value,
        method: Method::Enumeration,
        witness: Witness::Cut(names),
        trials: 0,
        confidence: 1.0,
        below_recommended: false,
    })
}

/// The network with `s` as the only source (one process per output port) and
/// `t` as the only destination (one process per input port).
pub fn probe_network(net: &Network, s: NodeId, t: NodeId) -> Network {
    net.with_endpoints(
        vec![Endpoint { node: s, processes: net.node(s).outputs.len() }],
        vec![Endpoint { node: t, processes: net.node(t).inputs.len() }],
    )
}

/// Rank of the system matrix of `code` on the probe network for `(s, t)`.
pub fn code_rank(net: &Network, s: NodeId, t: NodeId, code: &CodeAssignment) -> Result<usize, MincutError> {
    let probe = probe_network(net, s, t);
    let m = system_matrix(&probe, code).map_err(Box::new)?;
    Ok(m.matrix.rank(net.field()))
}

pub fn mincut_algebraic(
    net: &Network,
    s: NodeId,
    t: NodeId,
    trials: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CutValueReport, MincutError> {
    if s == t {
        return Err(MincutError::SameEndpoints);
    }
    if trials == 0 {
        return Err(MincutError::NoTrials);
    }
    let probe = probe_network(net, s, t);
    let results = par::map(exec, trials, |k| {
        let code = CodeAssignment::random(&probe, &mut seed.stream(k as u64));
        let m = system_matrix(&probe, &code)?;
        Ok::<_, CodeError>((m.matrix.rank(net.field()), code))
    });
    let mut best: Option<(usize, CodeAssignment)> = None;
    for r in results {
        let (rank, code) = r.map_err(Box::new)?;
        if best.as_ref().is_none_or(|(b, _)| rank > *b) {
            best = Some((rank, code));
        }
    }
    let (value, code) = best.expect("trials >= 1");
    let confidence = confidence(net);
    Ok(CutValueReport {
        source: net.node(s).name.clone(),
        destination: net.node(t).name.clone(),
        value,
        method: Method::Algebraic,
        witness: Witness::Code(code),
        trials,
        confidence,
        below_recommended: confidence < 0.5,
    })
}

/// Dispatches on `options.method`; `Auto` enumerates up to
/// [`AUTO_ENUMERATION_LIMIT`] nodes.
pub fn mincut(net: &Network, s: NodeId, t: NodeId, options: &MincutOptions) -> Result<CutValueReport, MincutError> {
    let enumerate = match options.method {
        Method::Enumeration => true,
        Method::Algebraic => false,
        Method::Auto => net.nodes().len() <= AUTO_ENUMERATION_LIMIT,
    };
    if enumerate {
        mincut_enumeration(net, s, t, options.node_cap, options.exec)
    } else {
        mincut_algebraic(net, s, t, options.trials, options.seed, options.exec)
    }
}

/// One report per pair; pair `k` uses the seed derived with label `k`.
pub fn mincut_all_pairs(
    net: &Network,
    pairs: &[(NodeId, NodeId)],
    options: &MincutOptions,
) -> Vec<Result<CutValueReport, MincutError>> {
    pairs
        .iter()
        .enumerate()
        .map(|(k, &(s, t))| {
            let opts = MincutOptions { seed: options.seed.derive(k as u64), ..options.clone() };
            mincut(net, s, t, &opts)
        })
        .collect()
}

/// Min-cut value only, using `Auto` with default trials.
pub fn mincut_value(net: &Network, s: NodeId, t: NodeId, seed: Seed, exec: Exec) -> Result<usize, MincutError> {
    let options = MincutOptions { seed, exec, ..MincutOptions::default() };
    Ok(mincut(net, s, t, &options)?.value)
}
