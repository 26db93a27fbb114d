use std::collections::BTreeMap;

use rand::Rng;

use super::{random_coding_bound, stats, system_matrix, verify, CodeError, CodeOutcome, CodeVerdict, ReceiverCut};
use crate::galois::{Gf, Ring};
use crate::linalg::{build_f, transfer_matrix, LinalgError, Matrix};
use crate::mincut::mincut_value;
use crate::netmodel::{
    add_super_destination, add_super_source, CodeAssignment, ConnectionClass, ConnectionSet, Network, NodeId, PortId,
};
use crate::par::{self, Exec};
use crate::rng::Seed;

/// Redraws of the free part of `A` before redrawing the intermediates.
const FULL_RECEIVER_REDRAWS: usize = 8;

fn names(net: &Network, nodes: &[NodeId]) -> Vec<String> {
    nodes.iter().map(|&n| net.node(n).name.clone()).collect()
}

fn subsets<T: Clone>(items: &[T]) -> impl Iterator<Item = Vec<T>> + '_ {
    (1usize..1 << items.len())
        .map(move |mask| items.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, x)| x.clone()).collect())
}

fn single_sender(set: &ConnectionSet, op: &'static str) -> Result<NodeId, CodeError> {
    match set.senders().as_slice() {
        [s] => Ok(*s),
        _ => Err(CodeError::UnsupportedClass { op, class: set.class }),
    }
}

/// Reroutes all processes of the listed sources through a super-source and
/// codes the resulting single multicast at random. Coefficients on the
/// super-source are restricted so each original process only enters its
/// own source, which lets the code be folded back onto the original
/// network: `α(i, e) = Σ_k α'(i, k) β'(k, e)` over the feeds of that source.
///
/// Feasibility is checked first: for every receiver and every nonempty
/// subset of sources, the min-cut from their super-source must cover the
/// subset's total rate.
pub fn solve_multiple_multicast(
    net: &Network,
    set: &ConnectionSet,
    trials: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodeOutcome, CodeError> {
    if !matches!(set.class, ConnectionClass::MultipleMulticast | ConnectionClass::SingleMulticast | ConnectionClass::Unicast) {
        return Err(CodeError::UnsupportedClass { op: "multiple multicast", class: set.class });
    }
    let senders = set.senders();
    let receivers = set.receivers();
    let mut violations = Vec::new();
    for (k, subset) in subsets(&senders).enumerate() {
        let (sup, _) = add_super_source(net, &subset)?;
        let star = sup.sources()[0].node;
        let required: usize = subset.iter().map(|&s| net.source(s).map_or(0, |e| e.processes)).sum();
        for &t in &receivers {
            let mincut = mincut_value(&sup, star, t, seed.derive(k as u64), exec)?;
            if mincut < required {
                violations.push(ReceiverCut {
                    sources: names(net, &subset),
                    receiver: net.node(t).name.clone(),
                    mincut,
                    required,
                });
            }
        }
    }
    if !violations.is_empty() {
        let mut bad: Vec<String> = violations.iter().map(|c| c.receiver.clone()).collect();
        bad.dedup();
        return Err(CodeError::Infeasible { reason: format!("min-cut bound violated at {}", bad.join(", ")), cuts: violations });
    }

    let (sup, map) = add_super_source(net, &senders)?;
    let field = net.field().clone();
    let draws = par::map(exec, trials, |k| {
        let mut rng = seed.stream(k as u64);
        let mut code = CodeAssignment::new();
        for (row, (src, _)) in map.processes.iter().enumerate() {
            for f in map.feeds.iter().filter(|f| &f.source == src) {
                code.alpha.insert((row, f.super_port), field.random(&mut rng));
            }
        }
        code.randomize_beta(&sup, &mut rng);
        code.randomize_epsilon(&sup, &mut rng);
        for s in sup.sources().iter().skip(1) {
            for i in 0..s.processes {
                for &e in &sup.node(s.node).outputs {
                    code.alpha.insert((i, e), field.random(&mut rng));
                }
            }
        }

        let pm = &map.port_map;
        let mut original = CodeAssignment::new();
        for (a, b) in net.intra_pairs() {
            original.beta.insert((a, b), code.beta(pm[a.0], pm[b.0]));
        }
        for d in net.destinations() {
            for &e in &net.node(d.node).inputs {
                for j in 0..d.processes {
                    original.epsilon.insert((e, j), code.epsilon(pm[e.0], j));
                }
            }
        }
        for (row, (src, i)) in map.processes.iter().enumerate() {
            let s = net.node_by_name(src).expect("feeds name original sources");
            for &e in &net.node(s).outputs {
                let mut v = Gf::ZERO;
                for f in map.feeds.iter().filter(|f| &f.source == src) {
                    v = field.add(&v, &field.mul(&code.alpha(row, f.super_port), &code.beta(f.relay_input, pm[e.0])));
                }
                original.alpha.insert((*i, e), v);
            }
        }
        for s in net.sources().iter().filter(|s| !senders.contains(&s.node)) {
            for i in 0..s.processes {
                for &e in &net.node(s.node).outputs {
                    original.alpha.insert((i, e), code.alpha(i, pm[e.0]));
                }
            }
        }
        verify(net, &original, Some(set)).map(|v| (original, v))
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>, _>>()?;
    let successes = draws.iter().filter(|(_, v)| v.feasible).count();
    let first = draws.iter().position(|(_, v)| v.feasible);
    let mut st = stats(net, set, trials, successes, first);
    st.eta = sup.edges().len();
    st.bound = random_coding_bound(st.q, st.receivers, st.eta);
    match first {
        Some(k) => {
            let (assignment, verdict) = draws.into_iter().nth(k).expect("index in range");
            Ok(CodeOutcome { assignment, verdict, stats: st })
        }
        None => Err(CodeError::TrialsExhausted { stats: st, cuts: Vec::new() }),
    }
}

type Demand = (NodeId, Vec<usize>);

/// Subset condition for disjoint receivers: for every nonempty subset, the
/// min-cut from the source to their super-destination covers the total
/// demand.
fn disjoint_violations(
    net: &Network,
    s: NodeId,
    disjoint: &[Demand],
    seed: Seed,
    exec: Exec,
) -> Result<Vec<ReceiverCut>, CodeError> {
    let mut out = Vec::new();
    for (k, subset) in subsets(disjoint).enumerate() {
        let required: usize = subset.iter().map(|(_, x)| x.len()).sum();
        let nodes: Vec<NodeId> = subset.iter().map(|(t, _)| *t).collect();
        let mincut = if nodes.len() == 1 {
            mincut_value(net, s, nodes[0], seed.derive(k as u64), exec)?
        } else {
            let (sup, _) = add_super_destination(net, &nodes)?;
            let star = sup.destinations()[0].node;
            mincut_value(&sup, s, star, seed.derive(k as u64), exec)?
        };
        if mincut < required {
            out.push(ReceiverCut {
                sources: vec![net.node(s).name.clone()],
                receiver: names(net, &nodes).join("+"),
                mincut,
                required,
            });
        }
    }
    Ok(out)
}

fn full_violations(net: &Network, s: NodeId, full: &[NodeId], seed: Seed, exec: Exec) -> Result<Vec<ReceiverCut>, CodeError> {
    let mu = net.source(s).map_or(0, |e| e.processes);
    let mut out = Vec::new();
    for (k, &t) in full.iter().enumerate() {
        let mincut = mincut_value(net, s, t, seed.derive(1 << 32 | k as u64), exec)?;
        if mincut < mu {
            out.push(ReceiverCut {
                sources: vec![net.node(s).name.clone()],
                receiver: net.node(t).name.clone(),
                mincut,
                required: mu,
            });
        }
    }
    Ok(out)
}

/// One attempt: random intermediates and receiver coefficients, then `A`
/// solved so every disjoint receiver sees exactly its processes through an
/// identity block, with the remaining freedom in `A` drawn at random until
/// every full receiver can decode all processes.
fn attempt<R: Rng>(
    net: &Network,
    set: &ConnectionSet,
    s: NodeId,
    disjoint: &[Demand],
    full: &[NodeId],
    rng: &mut R,
) -> Result<Option<(CodeAssignment, CodeVerdict)>, CodeError> {
    let field = net.field();
    let mu = net.source(s).map_or(0, |e| e.processes);
    let dis_nodes: Vec<NodeId> = disjoint.iter().map(|(t, _)| *t).collect();
    let (star, map) = if dis_nodes.is_empty() {
        (net.clone(), None)
    } else {
        let (n, m) = add_super_destination(net, &dis_nodes)?;
        (n, Some(m))
    };
    let pm: Vec<PortId> = map.as_ref().map_or_else(|| (0..net.num_ports()).map(PortId).collect(), |m| m.port_map.clone());

    let mut code = CodeAssignment::new();
    code.randomize_beta(&star, rng);
    for &t in &dis_nodes {
        let node = star.node(t);
        let fresh = &node.outputs[net.node(t).outputs.len()..];
        for (k, &inp) in node.inputs.iter().enumerate() {
            for (l, &o) in fresh.iter().enumerate() {
                code.beta.insert((inp, o), if k == l { Gf::ONE } else { Gf::ZERO });
            }
        }
    }
    // (T* process column, demanded source process)
    let mut targets: Vec<(usize, usize)> = Vec::new();
    if let Some(m) = &map {
        for (p, (name, j)) in m.processes.iter().enumerate() {
            let (_, subset) = disjoint.iter().find(|(t, _)| net.node(*t).name == *name).expect("mapped receiver");
            if *j < subset.len() {
                for f in m.feeds.iter().filter(|f| f.destination == *name) {
                    code.epsilon.insert((f.super_port, p), field.random(rng));
                }
                targets.push((p, subset[*j]));
            }
        }
    }
    for &t in full {
        let nu = star.destination(t).map_or(0, |d| d.processes);
        for &e in &star.node(t).inputs {
            for j in 0..nu {
                code.epsilon.insert((e, j), field.random(rng));
            }
        }
    }

    let g = transfer_matrix(field, &build_f(&star, &code)?)?;
    let b = super::build_b(&star, &code)?;
    let outs: Vec<usize> = star.node(s).outputs.iter().map(|p| p.0).collect();
    let all: Vec<usize> = (0..star.num_ports()).collect();
    let channel = g.select(&outs, &all).mul(field, &b.transpose())?;
    let out_rows: Vec<usize> = (0..outs.len()).collect();

    let (particular, free) = if map.is_some() {
        let nstar = star.destinations()[0].processes;
        let kd = channel.select(&out_rows, &(0..nstar).collect::<Vec<_>>());
        let target = Matrix::from_fn(mu, nstar, |x, p| if targets.contains(&(p, x)) { Gf::ONE } else { Gf::ZERO });
        let particular = match kd.solve_left(field, &target) {
            Ok(a) => a,
            Err(LinalgError::Inconsistent) => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        (particular, kd.transpose().nullspace(field).transpose())
    } else {
        (Matrix::zeros(field, mu, outs.len()), Matrix::identity(field, outs.len()))
    };

    let full_blocks: Vec<Matrix<Gf>> = full
        .iter()
        .map(|&t| {
            let off = star.destination_offset(t).expect("full receiver is a destination");
            let nu = star.destination(t).map_or(0, |d| d.processes);
            channel.select(&out_rows, &(off..off + nu).collect::<Vec<_>>())
        })
        .collect();
    let mut chosen = None;
    let redraws = if full.is_empty() { 1 } else { FULL_RECEIVER_REDRAWS };
    for _ in 0..redraws {
        let a = if full.is_empty() {
            particular.clone()
        } else {
            let y = Matrix::random(field, mu, free.rows(), rng);
            particular.add(field, &y.mul(field, &free)?)?
        };
        let mut ok = true;
        for blk in &full_blocks {
            if a.mul(field, blk)?.rank(field) < mu {
                ok = false;
                break;
            }
        }
        if ok {
            chosen = Some(a);
            break;
        }
    }
    let Some(a) = chosen else { return Ok(None) };

    let mut original = CodeAssignment::new();
    for (k, &e) in net.node(s).outputs.iter().enumerate() {
        for i in 0..mu {
            original.alpha.insert((i, e), *a.get(i, k));
        }
    }
    for (x, y) in net.intra_pairs() {
        original.beta.insert((x, y), code.beta(pm[x.0], pm[y.0]));
    }
    if let Some(m) = &map {
        let mut inverse = BTreeMap::new();
        for (old, new) in pm.iter().enumerate() {
            inverse.insert(*new, PortId(old));
        }
        for f in &m.feeds {
            let orig = inverse[&f.input];
            for (p, (name, j)) in m.processes.iter().enumerate() {
                if *name == f.destination {
                    original.epsilon.insert((orig, *j), code.epsilon(f.super_port, p));
                }
            }
        }
    }
    for &t in full {
        let nu = net.destination(t).map_or(0, |d| d.processes);
        for &e in &net.node(t).inputs {
            for j in 0..nu {
                original.epsilon.insert((e, j), code.epsilon(pm[e.0], j));
            }
        }
    }

    let verdict = verify(net, &original, Some(set))?;
    if !verdict.feasible {
        return Ok(None);
    }
    let m = system_matrix(net, &original)?.matrix;
    for (t, subset) in disjoint {
        let off = net.destination_offset(*t).expect("receiver is a destination");
        let nu = net.destination(*t).map_or(0, |d| d.processes);
        for x in 0..m.rows() {
            for j in 0..nu {
                let want = if subset.get(j) == Some(&x) { Gf::ONE } else { Gf::ZERO };
                if *m.get(x, off + j) != want {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some((original, verdict)))
}

#[allow(clippy::too_many_arguments)]
fn run_attempts(
    net: &Network,
    set: &ConnectionSet,
    s: NodeId,
    disjoint: &[Demand],
    full: &[NodeId],
    retries: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodeOutcome, CodeError> {
    let found = par::find_map_first(exec, retries, |r| match attempt(net, set, s, disjoint, full, &mut seed.stream(r as u64)) {
        Ok(None) => None,
        Ok(Some(x)) => Some(Ok((r, x))),
        Err(e) => Some(Err(e)),
    });
    let eta = net.edges().len();
    match found.transpose()? {
        Some((r, (assignment, verdict))) => {
            let mut st = stats(net, set, r + 1, 1, Some(r));
            st.eta = eta;
            st.bound = random_coding_bound(st.q, st.receivers, eta);
            Ok(CodeOutcome { assignment, verdict, stats: st })
        }
        None => {
            let mut st = stats(net, set, retries, 0, None);
            st.eta = eta;
            st.bound = random_coding_bound(st.q, st.receivers, eta);
            Err(CodeError::TrialsExhausted { stats: st, cuts: Vec::new() })
        }
    }
}

/// Disjoint multicast: each receiver demands its own processes and the
/// demands are pairwise disjoint. After checking the subset min-cut
/// condition, intermediates are drawn at random and the source encoding is
/// solved so the super-destination sees an identity (up to the receiver
/// permutation); the result is expressed on the original network.
pub fn construct_disjoint_multicast(
    net: &Network,
    set: &ConnectionSet,
    retries: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodeOutcome, CodeError> {
    if !matches!(set.class, ConnectionClass::DisjointMulticast | ConnectionClass::Unicast) {
        return Err(CodeError::UnsupportedClass { op: "disjoint multicast", class: set.class });
    }
    let s = single_sender(set, "disjoint multicast")?;
    let disjoint: Vec<Demand> = set.connections.iter().map(|c| (c.dest, c.subset.clone())).collect();
    let bad = disjoint_violations(net, s, &disjoint, seed.derive(0xD15), exec)?;
    if !bad.is_empty() {
        let which: Vec<String> = bad.iter().map(|c| format!("{{{}}}", c.receiver.replace('+', ", "))).collect();
        return Err(CodeError::Infeasible {
            reason: format!("subset min-cut condition fails for {}", which.join(" and ")),
            cuts: bad,
        });
    }
    run_attempts(net, set, s, &disjoint, &[], retries, seed, exec)
}

/// Two-level multicast: receivers demanding every process form the full
/// tier, the rest must have pairwise-disjoint demands. The disjoint tier is
/// served as in [`construct_disjoint_multicast`] and the remaining freedom
/// in the source encoding keeps every full-tier block invertible.
pub fn construct_two_level(
    net: &Network,
    set: &ConnectionSet,
    retries: usize,
    seed: Seed,
    exec: Exec,
) -> Result<CodeOutcome, CodeError> {
    if !matches!(set.class, ConnectionClass::TwoLevelMulticast | ConnectionClass::SingleMulticast | ConnectionClass::Unicast) {
        return Err(CodeError::UnsupportedClass { op: "two-level multicast", class: set.class });
    }
    let s = single_sender(set, "two-level multicast")?;
    let mu = net.source(s).map_or(0, |e| e.processes);
    let mut disjoint = Vec::new();
    let mut full = Vec::new();
    for c in &set.connections {
        if c.subset.len() == mu {
            full.push(c.dest);
        } else {
            disjoint.push((c.dest, c.subset.clone()));
        }
    }
    let mut bad = disjoint_violations(net, s, &disjoint, seed.derive(0xD15), exec)?;
    bad.extend(full_violations(net, s, &full, seed.derive(0xF11), exec)?);
    if !bad.is_empty() {
        let which: Vec<String> = bad.iter().map(|c| format!("{} (mincut {} < {})", c.receiver, c.mincut, c.required)).collect();
        return Err(CodeError::Infeasible { reason: format!("min-cut conditions fail: {}", which.join(", ")), cuts: bad });
    }
    run_attempts(net, set, s, &disjoint, &full, retries, seed, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;
    use crate::netmodel::Connection;

    /// S with two outputs, each reaching its own receiver directly, plus a
    /// relay R that forwards a mix of both outputs to T2.
    fn two_receivers() -> (Network, NodeId, NodeId, NodeId) {
        let mut b = Network::builder(GaloisField::of_order(256).unwrap());
        let s = b.node("S", 0, 2).unwrap();
        let r = b.node("R", 2, 1).unwrap();
        let t1 = b.node("T1", 1, 0).unwrap();
        let t2 = b.node("T2", 2, 0).unwrap();
        b.link(s, 0, t1, 0).unwrap().link(s, 0, r, 0).unwrap().link(s, 1, r, 1).unwrap();
        b.link(s, 1, t2, 0).unwrap().link(r, 0, t2, 1).unwrap();
        b.source(s, 2).unwrap().destination(t1, 1).unwrap().destination(t2, 2).unwrap();
        (b.build(), s, t1, t2)
    }

    #[test]
    fn disjoint_two_receivers() {
        let (net, s, t1, t2) = two_receivers();
        let set = ConnectionSet::new(
            ConnectionClass::DisjointMulticast,
            vec![Connection { source: s, dest: t1, subset: vec![0] }, Connection { source: s, dest: t2, subset: vec![1] }],
        );
        let out = construct_disjoint_multicast(&net, &set, 32, Seed(3), Exec::default()).unwrap();
        assert!(out.verdict.feasible);
        let m = system_matrix(&net, &out.assignment).unwrap().matrix;
        assert_eq!(super::super::to_values(&m), vec![vec![1, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn disjoint_subset_violation_is_named() {
        let (net, s, t1, _) = two_receivers();
        // T1 has a single input, so it cannot take two processes
        let set =
            ConnectionSet::new(ConnectionClass::DisjointMulticast, vec![Connection { source: s, dest: t1, subset: vec![0] }]);
        assert!(construct_disjoint_multicast(&net, &set, 4, Seed(0), Exec::Sequential).is_ok());
        let net1 = net.with_endpoints(net.sources().to_vec(), vec![crate::netmodel::Endpoint { node: t1, processes: 2 }]);
        let set =
            ConnectionSet::new(ConnectionClass::DisjointMulticast, vec![Connection { source: s, dest: t1, subset: vec![0, 1] }]);
        match construct_disjoint_multicast(&net1, &set, 4, Seed(0), Exec::Sequential) {
            Err(CodeError::Infeasible { reason, .. }) => assert!(reason.contains("{T1}"), "{reason}"),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn two_level_one_of_each() {
        let (net, s, t1, t2) = two_receivers();
        let set = ConnectionSet::new(
            ConnectionClass::TwoLevelMulticast,
            vec![Connection { source: s, dest: t1, subset: vec![0] }, Connection { source: s, dest: t2, subset: vec![0, 1] }],
        );
        let out = construct_two_level(&net, &set, 32, Seed(9), Exec::default()).unwrap();
        assert!(out.verdict.feasible);
        let m = system_matrix(&net, &out.assignment).unwrap().matrix;
        assert_eq!((m.get(0, 0).0, m.get(1, 0).0), (1, 0));
    }

    #[test]
    fn two_level_rejects_weak_full_receiver() {
        let (net, s, t1, _) = two_receivers();
        let net1 = net.with_endpoints(net.sources().to_vec(), vec![crate::netmodel::Endpoint { node: t1, processes: 2 }]);
        let set =
            ConnectionSet::new(ConnectionClass::TwoLevelMulticast, vec![Connection { source: s, dest: t1, subset: vec![0, 1] }]);
        assert!(matches!(construct_two_level(&net1, &set, 4, Seed(0), Exec::Sequential), Err(CodeError::Infeasible { .. })));
    }

    #[test]
    fn multiple_multicast_two_sources() {
        let mut b = Network::builder(GaloisField::of_order(64).unwrap());
        let s1 = b.node("S1", 0, 1).unwrap();
        let s2 = b.node("S2", 0, 1).unwrap();
        let a = b.node("A", 1, 1).unwrap();
        let t1 = b.node("T1", 2, 0).unwrap();
        let t2 = b.node("T2", 2, 0).unwrap();
        b.link(s1, 0, a, 0).unwrap().link(s1, 0, t1, 0).unwrap();
        b.link(s2, 0, a, 0).unwrap().link(s2, 0, t2, 1).unwrap();
        b.link(a, 0, t1, 1).unwrap().link(a, 0, t2, 0).unwrap();
        b.source(s1, 1).unwrap().source(s2, 1).unwrap();
        b.destination(t1, 2).unwrap().destination(t2, 2).unwrap();
        let net = b.build();
        let set = ConnectionSet::new(
            ConnectionClass::MultipleMulticast,
            vec![
                Connection { source: s1, dest: t1, subset: vec![0] },
                Connection { source: s2, dest: t1, subset: vec![0] },
                Connection { source: s1, dest: t2, subset: vec![0] },
                Connection { source: s2, dest: t2, subset: vec![0] },
            ],
        );
        let out = solve_multiple_multicast(&net, &set, 16, Seed(2), Exec::default()).unwrap();
        assert!(out.verdict.feasible);
        // dropping A's link to T1 leaves T1 with min-cut 1 from {S1, S2}
        let cut = net.without_edges(&[crate::netmodel::Edge::new(net.node(a).outputs[0], net.node(t1).inputs[1])]).unwrap();
        match solve_multiple_multicast(&cut, &set, 4, Seed(2), Exec::Sequential) {
            Err(CodeError::Infeasible { reason, .. }) => assert!(reason.contains("T1")),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
