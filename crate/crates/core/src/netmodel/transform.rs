use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Connection, ConnectionClass, ConnectionSet, Edge, Endpoint, ModelError, Network, NodeId, PortId};

/// Port and process correspondence produced by [`add_super_source`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperSourceMap {
    pub super_node: String,
    /// New id of every original port, indexed by the original id.
    pub port_map: Vec<PortId>,
    pub feeds: Vec<SourceFeed>,
    /// `(original source, process)` for each super-source process.
    pub processes: Vec<(String, usize)>,
}

/// One super-source output and the fresh input it drives; `output` is the
/// original source output port it stands in for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SourceFeed {
    pub source: String,
    pub super_port: PortId,
    pub relay_input: PortId,
    pub output: PortId,
}

/// Port and process correspondence produced by [`add_super_destination`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperDestinationMap {
    pub super_node: String,
    pub port_map: Vec<PortId>,
    pub feeds: Vec<DestinationFeed>,
    /// `(original destination, process)` for each super-destination process.
    pub processes: Vec<(String, usize)>,
}

/// One original destination input, the fresh output that relays it and the
/// super-destination input receiving it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DestinationFeed {
    pub destination: String,
    pub input: PortId,
    pub relay_output: PortId,
    pub super_port: PortId,
}

struct Rebuilt {
    net: Network,
    port_map: Vec<PortId>,
    fresh_in: Vec<Vec<PortId>>,
    fresh_out: Vec<Vec<PortId>>,
    added: NodeId,
}

fn unique_name(net: &Network, base: &str) -> String {
    let mut name = base.to_string();
    while net.node_by_name(&name).is_some() {
        name.push('*');
    }
    name
}

/// Copies `net` with extra ports appended to each node and one new node at
/// the end. Original node ids are unchanged; port ids shift.
fn rebuild(net: &Network, extra_in: &[usize], extra_out: &[usize], name: &str, inputs: usize, outputs: usize) -> Rebuilt {
    let mut b = Network::builder(net.field().clone());
    let mut port_map = vec![PortId(0); net.num_ports()];
    let mut fresh_in = Vec::new();
    let mut fresh_out = Vec::new();
    for (k, node) in net.nodes().iter().enumerate() {
        let id = b
            .node(&node.name, node.inputs.len() + extra_in[k], node.outputs.len() + extra_out[k])
            .expect("names are unique in the original");
        let new = b.net.nodes[id.0].clone();
        for (j, p) in node.inputs.iter().enumerate() {
            port_map[p.0] = new.inputs[j];
        }
        for (j, p) in node.outputs.iter().enumerate() {
            port_map[p.0] = new.outputs[j];
        }
        fresh_in.push(new.inputs[node.inputs.len()..].to_vec());
        fresh_out.push(new.outputs[node.outputs.len()..].to_vec());
    }
    let added = b.node(name, inputs, outputs).expect("name chosen to be unique");
    for e in net.edges() {
        b.edge(port_map[e.from.0], port_map[e.to.0]).expect("mapped ports exist");
    }
    let mut out = b.build();
    out.sources = net.sources.clone();
    out.destinations = net.destinations.clone();
    out.delay = net.delay;
    out.erasures = net.erasures.as_ref().map(|m| m.remap(|e| Edge::new(port_map[e.from.0], port_map[e.to.0])));
    Rebuilt { net: out, port_map, fresh_in, fresh_out, added }
}

fn check_members(list: &[NodeId], valid: impl Fn(NodeId) -> bool, net: &Network, role: &str) -> Result<(), ModelError> {
    if list.is_empty() {
        return Err(ModelError::InvalidConnections(format!("at least one {role} is required")));
    }
    let mut seen = BTreeSet::new();
    for &n in list {
        if n.0 >= net.nodes().len() {
            return Err(ModelError::UnknownNode(format!("#{}", n.0)));
        }
        if !valid(n) {
            return Err(ModelError::InvalidConnections(format!("`{}` is not a {role}", net.node(n).name)));
        }
        if !seen.insert(n) {
            return Err(ModelError::DuplicateEndpoint(net.node(n).name.clone(), "transform member"));
        }
    }
    Ok(())
}

/// Adds a super-source `S*` with one output per output port of the listed
/// sources. Each listed source gains one fresh input per output port, fed
/// one-to-one from `S*`, and is demoted to a relay; `S*` carries all their
/// processes. Connections from the listed sources are moved onto `S*`.
pub fn add_super_source(net: &Network, sources: &[NodeId]) -> Result<(Network, SuperSourceMap), ModelError> {
    check_members(sources, |n| net.source(n).is_some(), net, "source")?;
    let n = net.nodes().len();
    let mut extra_in = vec![0; n];
    for &s in sources {
        extra_in[s.0] = net.node(s).outputs.len();
    }
    let total: usize = extra_in.iter().sum();
    let name = unique_name(net, "S*");
    let Rebuilt { net: mut out, port_map, fresh_in, added, .. } = rebuild(net, &extra_in, &vec![0; n], &name, 0, total);

    let super_outputs = out.nodes[added.0].outputs.clone();
    let mut feeds = Vec::new();
    let mut next = 0;
    for &s in sources {
        for (k, &e) in net.node(s).outputs.iter().enumerate() {
            let super_port = super_outputs[next];
            next += 1;
            let relay_input = fresh_in[s.0][k];
            out.edges.push(Edge::new(super_port, relay_input));
            feeds.push(SourceFeed { source: net.node(s).name.clone(), super_port, relay_input, output: port_map[e.0] });
        }
    }

    let mut processes = Vec::new();
    let mut offsets = BTreeMap::new();
    for &s in sources {
        offsets.insert(s, processes.len());
        let mu = net.source(s).map_or(0, |e| e.processes);
        processes.extend((0..mu).map(|i| (net.node(s).name.clone(), i)));
    }
    let mut new_sources = vec![Endpoint { node: added, processes: processes.len() }];
    new_sources.extend(net.sources().iter().filter(|e| !sources.contains(&e.node)).copied());
    out.sources = new_sources;

    out.connections = net.connections().map(|set| {
        let mut merged: BTreeMap<NodeId, BTreeSet<usize>> = BTreeMap::new();
        let mut order = Vec::new();
        let mut kept = Vec::new();
        for c in &set.connections {
            if let Some(&off) = offsets.get(&c.source) {
                if !merged.contains_key(&c.dest) {
                    order.push(c.dest);
                }
                merged.entry(c.dest).or_default().extend(c.subset.iter().map(|i| off + i));
            } else {
                kept.push(c.clone());
            }
        }
        let mut connections: Vec<Connection> = order
            .into_iter()
            .map(|t| Connection { source: added, dest: t, subset: merged[&t].iter().copied().collect() })
            .collect();
        connections.extend(kept);
        let class = match (sources.len(), set.class) {
            (1, c) => c,
            (_, ConnectionClass::MultipleMulticast) => ConnectionClass::SingleMulticast,
            _ => ConnectionClass::General,
        };
        ConnectionSet::new(class, connections)
    });

    Ok((out, SuperSourceMap { super_node: name, port_map, feeds, processes }))
}

/// Adds a super-destination `T*` with one input per input port of the listed
/// destinations. Each listed destination gains one fresh output per input
/// port, wired one-to-one into `T*`, and is demoted to a relay; `T*` carries
/// all their processes. The connection set is dropped.
pub fn add_super_destination(net: &Network, dests: &[NodeId]) -> Result<(Network, SuperDestinationMap), ModelError> {
    check_members(dests, |n| net.destination(n).is_some(), net, "destination")?;
    let n = net.nodes().len();
    let mut extra_out = vec![0; n];
    for &t in dests {
        extra_out[t.0] = net.node(t).inputs.len();
    }
    let total: usize = extra_out.iter().sum();
    let name = unique_name(net, "T*");
    let Rebuilt { net: mut out, port_map, fresh_out, added, .. } = rebuild(net, &vec![0; n], &extra_out, &name, total, 0);

    let super_inputs = out.nodes[added.0].inputs.clone();
    let mut feeds = Vec::new();
    let mut next = 0;
    for &t in dests {
        for (k, &e) in net.node(t).inputs.iter().enumerate() {
            let super_port = super_inputs[next];
            next += 1;
            let relay_output = fresh_out[t.0][k];
            out.edges.push(Edge::new(relay_output, super_port));
            feeds.push(DestinationFeed { destination: net.node(t).name.clone(), input: port_map[e.0], relay_output, super_port });
        }
    }

    let mut processes = Vec::new();
    for &t in dests {
        let nu = net.destination(t).map_or(0, |e| e.processes);
        processes.extend((0..nu).map(|j| (net.node(t).name.clone(), j)));
    }
    let mut new_dests = vec![Endpoint { node: added, processes: processes.len() }];
    new_dests.extend(net.destinations().iter().filter(|e| !dests.contains(&e.node)).copied());
    out.destinations = new_dests;
    out.connections = None;

    Ok((out, SuperDestinationMap { super_node: name, port_map, feeds, processes }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;

    fn two_sources() -> Network {
        let mut b = Network::builder(GaloisField::of_order(16).unwrap());
        let s1 = b.node("S1", 0, 2).unwrap();
        let s2 = b.node("S2", 0, 3).unwrap();
        let t1 = b.node("T1", 2, 0).unwrap();
        let t2 = b.node("T2", 2, 0).unwrap();
        b.link(s1, 0, t1, 0).unwrap().link(s2, 0, t1, 1).unwrap().link(s2, 2, t2, 0).unwrap();
        b.link(s1, 1, t2, 1).unwrap();
        b.source(s1, 2).unwrap().source(s2, 1).unwrap();
        b.destination(t1, 2).unwrap().destination(t2, 2).unwrap();
        b.build()
    }

    #[test]
    fn super_source_port_counts() {
        let net = two_sources();
        let (out, map) = add_super_source(&net, &[NodeId(0), NodeId(1)]).unwrap();
        assert_eq!(out.node(NodeId(4)).outputs.len(), 5);
        assert_eq!(out.edges().len(), net.edges().len() + 5);
        assert_eq!(map.feeds.len(), 5);
        assert_eq!(out.sources().len(), 1);
        assert_eq!(out.sources()[0].processes, 3);
        let r = out.validate();
        assert!(r.is_valid() && r.acyclic, "{:?}", r.problems());
        // every fresh input has exactly one incoming edge, from S*
        for f in &map.feeds {
            let incoming: Vec<_> = out.edges().iter().filter(|e| e.to == f.relay_input).collect();
            assert_eq!(incoming, vec![&Edge::new(f.super_port, f.relay_input)]);
        }
        // original edges survive under the port map
        for e in net.edges() {
            assert!(out.has_edge(Edge::new(map.port_map[e.from.0], map.port_map[e.to.0])));
        }
    }

    #[test]
    fn super_destination_port_counts() {
        let net = two_sources();
        let (out, map) = add_super_destination(&net, &[NodeId(2), NodeId(3)]).unwrap();
        assert_eq!(out.node(NodeId(4)).inputs.len(), 4);
        assert_eq!(map.feeds.len(), 4);
        assert_eq!(out.destinations(), &[Endpoint { node: NodeId(4), processes: 4 }]);
        assert!(out.validate().is_valid());
        assert!(out.is_acyclic());
    }

    #[test]
    fn rejects_non_members() {
        let net = two_sources();
        assert!(add_super_source(&net, &[NodeId(2)]).is_err());
        assert!(add_super_source(&net, &[]).is_err());
        assert!(add_super_destination(&net, &[NodeId(0)]).is_err());
    }
}
