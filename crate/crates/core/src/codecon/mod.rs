//! System matrix assembly, code verification, and code construction for
//! each connection class.
//!
//! Convention: a row vector of source symbols `X` produces port symbols
//! `Y = X A (I - F)^-1` and destination outputs `Z = Y B^T = X M`.

mod construct;

use serde::Serialize;

use crate::galois::Gf;
use crate::linalg::{build_f, transfer_matrix, LinalgError, Matrix};
use crate::mincut::{mincut_value, MincutError};
use crate::netmodel::{
    CodeAssignment, Connection, ConnectionClass, ConnectionSet, Direction, ModelError, Network, NodeId, PortId,
};
use crate::par::{self, Exec};
use crate::rng::Seed;

pub use construct::{construct_disjoint_multicast, construct_two_level, solve_multiple_multicast};

pub const DEFAULT_TRIALS: usize = 32;
pub const DEFAULT_RETRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mincut(#[from] MincutError),
    #[error("the network has no connection set")]
    MissingConnections,
    #[error("{op} does not handle {class} connection sets")]
    UnsupportedClass { op: &'static str, class: ConnectionClass },
    #[error("infeasible: {reason}")]
    Infeasible { reason: String, cuts: Vec<ReceiverCut> },
    #[error("no valid code found in {} trials ({})", stats.trials, describe_cuts(.cuts))]
    TrialsExhausted { stats: CodingStats, cuts: Vec<ReceiverCut> },
}

fn describe_cuts(cuts: &[ReceiverCut]) -> String {
    let short: Vec<String> = cuts
        .iter()
        .filter(|c| c.mincut < c.required)
        .map(|c| format!("mincut({} -> {}) = {} < {}", c.sources.join("+"), c.receiver, c.mincut, c.required))
        .collect();
    if short.is_empty() {
        "min-cut conditions hold; more trials or a larger field should succeed".into()
    } else {
        format!("demand exceeds capacity: {}", short.join(", "))
    }
}

/// A min-cut requirement: from the (super-source over the) listed sources
/// to a receiver, or from one source to a set of receivers joined by a
/// super-destination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceiverCut {
    pub sources: Vec<String>,
    pub receiver: String,
    pub mincut: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodingStats {
    pub trials: usize,
    pub successes: usize,
    pub first_success: Option<usize>,
    pub empirical_rate: f64,
    /// `(1 - N/q)^η` with `N` receivers and `η` the number of edges.
    pub bound: f64,
    pub receivers: usize,
    pub eta: usize,
    pub q: u32,
}

/// `max(0, 1 - n/q)^eta`.
pub fn random_coding_bound(q: u32, n: usize, eta: usize) -> f64 {
    (1.0 - n as f64 / q as f64).max(0.0).powi(eta as i32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub node: String,
    pub start: usize,
    pub len: usize,
}

/// `M = A (I - F)^-1 B^T` with row blocks per source and column blocks per
/// destination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemMatrix {
    pub matrix: Matrix<Gf>,
    pub row_blocks: Vec<Block>,
    pub col_blocks: Vec<Block>,
}

impl SystemMatrix {
    pub fn column_block(&self, node: &str) -> Option<Matrix<Gf>> {
        let b = self.col_blocks.iter().find(|b| b.node == node)?;
        let rows: Vec<usize> = (0..self.matrix.rows()).collect();
        let cols: Vec<usize> = (b.start..b.start + b.len).collect();
        Some(self.matrix.select(&rows, &cols))
    }
}

/// Encoding matrix: one row per source process, one column per port.
pub fn build_a(net: &Network, code: &CodeAssignment) -> Result<Matrix<Gf>, ModelError> {
    for &(i, e) in code.alpha.keys() {
        let legal = e.0 < net.num_ports()
            && net.port(e).direction == Direction::Output
            && net.source(net.port(e).owner).is_some_and(|s| i < s.processes);
        if !legal {
            return Err(ModelError::InvalidAssignment(format!("alpha ({}, {e}) is not at a source output port", i + 1)));
        }
    }
    let mut a = Matrix::zeros(net.field(), net.num_source_processes(), net.num_ports());
    let mut row = 0;
    for s in net.sources() {
        for i in 0..s.processes {
            for &e in &net.node(s.node).outputs {
                a.set(row, e.0, code.alpha(i, e));
            }
            row += 1;
        }
    }
    Ok(a)
}

/// Decoding matrix: one row per destination process, one column per port.
pub fn build_b(net: &Network, code: &CodeAssignment) -> Result<Matrix<Gf>, ModelError> {
    for &(e, j) in code.epsilon.keys() {
        let legal = e.0 < net.num_ports()
            && net.port(e).direction == Direction::Input
            && net.destination(net.port(e).owner).is_some_and(|d| j < d.processes);
        if !legal {
            return Err(ModelError::InvalidAssignment(format!("epsilon ({e}, {}) is not at a destination input port", j + 1)));
        }
    }
    let mut b = Matrix::zeros(net.field(), net.num_destination_processes(), net.num_ports());
    let mut row = 0;
    for d in net.destinations() {
        for j in 0..d.processes {
            for &e in &net.node(d.node).inputs {
                b.set(row, e.0, code.epsilon(e, j));
            }
            row += 1;
        }
    }
    Ok(b)
}

fn blocks(net: &Network, endpoints: &[crate::netmodel::Endpoint]) -> Vec<Block> {
    let mut start = 0;
    endpoints
        .iter()
        .map(|e| {
            let b = Block { node: net.node(e.node).name.clone(), start, len: e.processes };
            start += e.processes;
            b
        })
        .collect()
}

pub fn system_matrix(net: &Network, code: &CodeAssignment) -> Result<SystemMatrix, CodeError> {
    let field = net.field();
    let f = build_f(net, code)?;
    let t = transfer_matrix(field, &f)?;
    let a = build_a(net, code)?;
    let b = build_b(net, code)?;
    let matrix = a.mul(field, &t)?.mul(field, &b.transpose())?;
    Ok(SystemMatrix { matrix, row_blocks: blocks(net, net.sources()), col_blocks: blocks(net, net.destinations()) })
}

/// Linear map from a receiver's input port symbols to its demanded
/// processes: `(Y at ports) * matrix = (X at processes)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decoder {
    pub ports: Vec<PortId>,
    /// Demanded processes as `node:index`, 1-based.
    pub processes: Vec<String>,
    pub matrix: Matrix<Gf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReceiverDiagnostic {
    pub receiver: String,
    pub required: usize,
    /// Rank of the receiver's column block of `M`.
    pub rank: usize,
    pub decodable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<Decoder>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodeVerdict {
    pub feasible: bool,
    pub class: ConnectionClass,
    pub receivers: Vec<ReceiverDiagnostic>,
}

impl CodeVerdict {
    pub fn failing(&self) -> Vec<&str> {
        self.receivers.iter().filter(|r| !r.decodable).map(|r| r.receiver.as_str()).collect()
    }
}

fn process_label(net: &Network, row: usize) -> String {
    let mut offset = 0;
    for s in net.sources() {
        if row < offset + s.processes {
            return format!("{}:{}", net.node(s.node).name, row - offset + 1);
        }
        offset += s.processes;
    }
    format!("?:{row}")
}

fn connection_set<'a>(net: &'a Network, conns: Option<&'a ConnectionSet>) -> Result<&'a ConnectionSet, CodeError> {
    let set = conns.or(net.connections()).ok_or(CodeError::MissingConnections)?;
    let errors = set.check(net);
    if !errors.is_empty() {
        return Err(ModelError::InvalidConnections(errors.join("; ")).into());
    }
    Ok(set)
}

/// Checks every receiver of `conns` (or the network's own connection set).
///
/// For all classes but `general`, a receiver is served when some `W`
/// satisfies `M_T W = E_D`: its outputs determine exactly its demanded
/// processes. For `general`, the two sufficient conditions are checked as
/// stated: rows of processes the receiver does not demand vanish in its
/// block, and the block on its demanded rows is square and nonsingular.
pub fn verify(net: &Network, code: &CodeAssignment, conns: Option<&ConnectionSet>) -> Result<CodeVerdict, CodeError> {
    let set = connection_set(net, conns)?;
    code.check(net)?;
    let sm = system_matrix(net, code)?;
    let b = build_b(net, code)?;
    let field = net.field();
    let m = &sm.matrix;
    let all_rows: Vec<usize> = (0..m.rows()).collect();
    let mut receivers = Vec::new();
    for t in set.receivers() {
        let name = net.node(t).name.clone();
        let offset = net.destination_offset(t).expect("checked destination");
        let nu = net.destination(t).expect("checked destination").processes;
        let cols: Vec<usize> = (offset..offset + nu).collect();
        let demanded = set.demanded_rows(net, t);
        let block = m.select(&all_rows, &cols);
        let rank = block.rank(field);
        let ports = net.node(t).inputs.clone();
        let port_idx: Vec<usize> = ports.iter().map(|p| p.0).collect();
        let bt = b.select(&cols, &port_idx).transpose();
        let processes: Vec<String> = demanded.iter().map(|&r| process_label(net, r)).collect();

        let (w, reason) = if set.class == ConnectionClass::General {
            let others: Vec<usize> = all_rows.iter().copied().filter(|r| !demanded.contains(r)).collect();
            let leak = m.select(&others, &cols);
            if !leak.is_zero(field) {
                let bad: Vec<String> = others
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| leak.row(*k).iter().any(|v| v.0 != 0))
                    .map(|(_, &r)| process_label(net, r))
                    .collect();
                (None, Some(format!("interference: undemanded processes {} reach the receiver", bad.join(", "))))
            } else {
                let sub = m.select(&demanded, &cols);
                match sub.inverse(field) {
                    Ok(inv) => (Some(inv), None),
                    Err(LinalgError::NotSquare { rows, cols }) => {
                        (None, Some(format!("demanded block is {rows}x{cols}, not square")))
                    }
                    Err(_) => (None, Some("demanded block is singular".into())),
                }
            }
        } else {
            let target = Matrix::from_fn(m.rows(), demanded.len(), |i, j| if demanded[j] == i { Gf::ONE } else { Gf::ZERO });
            match block.solve(field, &target) {
                Ok(w) => (Some(w), None),
                Err(_) => (None, Some(format!("rank {rank}; demanded processes are not separable from the received symbols"))),
            }
        };
        let decoder = w.map(|w| Decoder {
            ports: ports.clone(),
            processes: processes.clone(),
            matrix: bt.mul(field, &w).expect("shapes agree"),
        });
        receivers.push(ReceiverDiagnostic {
            receiver: name,
            required: demanded.len(),
            rank,
            decodable: decoder.is_some(),
            reason,
            decoder,
        });
    }
    Ok(CodeVerdict { feasible: receivers.iter().all(|r| r.decodable), class: set.class, receivers })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeOutcome {
    pub assignment: CodeAssignment,
    pub verdict: CodeVerdict,
    pub stats: CodingStats,
}

/// Min-cut from each source to each receiver against its rate.
pub(crate) fn connection_cuts(net: &Network, set: &ConnectionSet, seed: Seed, exec: Exec) -> Result<Vec<ReceiverCut>, CodeError> {
    let mut out = Vec::new();
    for t in set.receivers() {
        let demanded = set.demanded_rows(net, t).len();
        let senders: Vec<NodeId> = set.connections.iter().filter(|c| c.dest == t).map(|c| c.source).collect();
        let mincut = if senders.len() == 1 {
            mincut_value(net, senders[0], t, seed, exec)?
        } else {
            let (sup, _) = crate::netmodel::add_super_source(net, &senders)?;
            let s = sup.sources()[0].node;
            mincut_value(&sup, s, t, seed, exec)?
        };
        out.push(ReceiverCut {
            sources: senders.iter().map(|&s| net.node(s).name.clone()).collect(),
            receiver: net.node(t).name.clone(),
            mincut,
            required: demanded,
        });
    }
    Ok(out)
}

/// Uniform random search: draws `trials` codes (draw `k` from stream `k`)
/// and returns the first that verifies. Disjoint, two-level and
/// multiple-multicast sets are routed to their constructions.
pub fn random_code(
    net: &Network,
    conns: Option<&ConnectionSet>,
    trials: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodeOutcome, CodeError> {
    let set = connection_set(net, conns)?.clone();
    match set.class {
        ConnectionClass::MultipleMulticast => return solve_multiple_multicast(net, &set, trials, seed, exec),
        ConnectionClass::DisjointMulticast => return construct_disjoint_multicast(net, &set, trials, seed, exec),
        ConnectionClass::TwoLevelMulticast => return construct_two_level(net, &set, trials, seed, exec),
        _ => {}
    }
    let draws = par::map(exec, trials, |k| {
        let code = CodeAssignment::random(net, &mut seed.stream(k as u64));
        verify(net, &code, Some(&set)).map(|v| (code, v))
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
    let successes = draws.iter().filter(|(_, v)| v.feasible).count();
    let first = draws.iter().position(|(_, v)| v.feasible);
    let stats = stats(net, &set, trials, successes, first);
    match first {
        Some(k) => {
            let (assignment, verdict) = draws.into_iter().nth(k).expect("index in range");
            Ok(CodeOutcome { assignment, verdict, stats })
        }
        None => {
            let cuts = connection_cuts(net, &set, seed.derive(u64::MAX), exec)?;
            Err(CodeError::TrialsExhausted { stats, cuts })
        }
    }
}

pub(crate) fn stats(net: &Network, set: &ConnectionSet, trials: usize, successes: usize, first: Option<usize>) -> CodingStats {
    let q = net.field().order();
    let receivers = set.receivers().len();
    let eta = net.edges().len();
    CodingStats {
        trials,
        successes,
        first_success: first,
        empirical_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        bound: random_coding_bound(q, receivers, eta),
        receivers,
        eta,
        q,
    }
}

/// Fraction of `draws` uniform codes that verify; draw `k` uses stream `k`.
pub fn success_rate(
    net: &Network,
    conns: &ConnectionSet,
    draws: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodingStats, CodeError> {
    let ok = par::map(exec, draws, |k| {
        let code = CodeAssignment::random(net, &mut seed.stream(k as u64));
        verify(net, &code, Some(conns)).map(|v| v.feasible)
    });
    let ok = ok.into_iter().collect::<Result<Vec<_>, _>>()?;
    let successes = ok.iter().filter(|&&b| b).count();
    Ok(stats(net, conns, draws, successes, ok.iter().position(|&b| b)))
}

/// Multicast of all processes of `source` to each receiver.
pub fn multicast(net: &Network, source: NodeId, receivers: &[NodeId]) -> ConnectionSet {
    let mu = net.source(source).map_or(0, |s| s.processes);
    ConnectionSet::new(
        if receivers.len() == 1 { ConnectionClass::Unicast } else { ConnectionClass::SingleMulticast },
        receivers.iter().map(|&t| Connection { source, dest: t, subset: (0..mu).collect() }).collect(),
    )
}

/// Integer encodings of the entries, row by row.
pub fn to_values(m: &Matrix<Gf>) -> Vec<Vec<u32>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(|v| v.0).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;

    pub(crate) fn fig2(q: u32) -> Network {
        let mut b = Network::builder(GaloisField::of_order(q).unwrap());
        let s = b.node("S", 0, 2).unwrap();
        b.node("V1", 2, 2).unwrap();
        b.node("V2", 2, 2).unwrap();
        let t = b.node("T", 2, 0).unwrap();
        for (f, to) in [(1, 3), (1, 8), (2, 4), (5, 12), (9, 11), (10, 12)] {
            b.edge(PortId(f - 1), PortId(to - 1)).unwrap();
        }
        b.source(s, 2).unwrap().destination(t, 2).unwrap();
        b.connections(ConnectionSet::new(ConnectionClass::Unicast, vec![Connection { source: s, dest: t, subset: vec![0, 1] }]));
        b.build()
    }

    /// Identity α and ε, β(e8,e9) = β(e4,e5) = 1, other β zero.
    fn fig2_identity_code() -> CodeAssignment {
        let mut code = CodeAssignment::new();
        code.alpha.insert((0, PortId(0)), Gf(1));
        code.alpha.insert((1, PortId(1)), Gf(1));
        code.epsilon.insert((PortId(10), 0), Gf(1));
        code.epsilon.insert((PortId(11), 1), Gf(1));
        code.beta.insert((PortId(7), PortId(8)), Gf(1));
        code.beta.insert((PortId(3), PortId(4)), Gf(1));
        code
    }

    #[test]
    fn fig2_identity_system_matrix() {
        let net = fig2(256);
        let sm = system_matrix(&net, &fig2_identity_code()).unwrap();
        assert_eq!(to_values(&sm.matrix), vec![vec![1, 0], vec![0, 1]]);
        let v = verify(&net, &fig2_identity_code(), None).unwrap();
        assert!(v.feasible);
        let dec = v.receivers[0].decoder.as_ref().unwrap();
        assert_eq!(dec.processes, vec!["S:1", "S:2"]);
    }

    #[test]
    fn a_and_b_supports() {
        let net = fig2(256);
        let code = CodeAssignment::random(&net, &mut Seed(5).rng());
        let a = build_a(&net, &code).unwrap();
        let b = build_b(&net, &code).unwrap();
        assert_eq!(a.shape(), (2, 12));
        assert_eq!(b.shape(), (2, 12));
        for j in 2..12 {
            assert!(a.get(0, j).0 == 0 && a.get(1, j).0 == 0);
        }
        for j in 0..10 {
            assert!(b.get(0, j).0 == 0 && b.get(1, j).0 == 0);
        }
        let zero = CodeAssignment::new();
        assert!(build_a(&net, &zero).unwrap().is_zero(net.field()));
    }

    #[test]
    fn zero_beta_gives_zero_system_matrix() {
        let net = fig2(16);
        let mut code = CodeAssignment::random(&net, &mut Seed(1).rng());
        code.beta.clear();
        assert!(system_matrix(&net, &code).unwrap().matrix.is_zero(net.field()));
    }

    #[test]
    fn bound_formula() {
        assert!((random_coding_bound(16, 2, 5) - 0.512_908_935_546_875).abs() < 1e-12);
        assert_eq!(random_coding_bound(2, 3, 4), 0.0);
    }

    #[test]
    fn random_unicast_on_fig2() {
        let net = fig2(256);
        let out = random_code(&net, None, 8, Seed(7), Exec::default()).unwrap();
        assert!(out.verdict.feasible);
        assert_eq!(out.stats.eta, 6);
    }

    #[test]
    fn general_condition_one() {
        let net = fig2(256);
        let s = NodeId(0);
        let t = NodeId(3);
        // T demands only process 1, yet the identity code delivers process 2 too
        let set = ConnectionSet::new(ConnectionClass::General, vec![Connection { source: s, dest: t, subset: vec![0] }]);
        let v = verify(&net, &fig2_identity_code(), Some(&set)).unwrap();
        assert!(!v.feasible);
        assert!(v.receivers[0].reason.as_ref().unwrap().contains("interference"));
    }
}
