//! Network model: nodes with numbered input and output ports, directed
//! port-to-port edges, sources and destinations with process counts, and
//! connection sets.
//!
//! Port ids are derived, never stored: ports are numbered in node order,
//! each node's inputs before its outputs. Internally ids are 0-based; they
//! serialize and display 1-based (`e1`, `e2`, ...).

mod assign;
pub mod generate;
mod transform;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::erasim::FailureModel;
use crate::galois::{ArithmeticError, GaloisField};

pub use assign::CodeAssignment;
pub use transform::{add_super_destination, add_super_source, DestinationFeed, SourceFeed, SuperDestinationMap, SuperSourceMap};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("port {port} out of range (network has {count} ports)")]
    PortOutOfRange { port: usize, count: usize },
    #[error("edge {0} is not in the network")]
    UnknownEdge(Edge),
    #[error("node `{0}` is listed more than once as {1}")]
    DuplicateEndpoint(String, &'static str),
    #[error("invalid code assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid connection set: {0}")]
    InvalidConnections(String),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// A port, 0-based internally; 1-based in files and display.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId(pub usize);

impl PortId {
    /// From a 1-based file id.
    pub fn from_number(n: usize) -> Option<PortId> {
        n.checked_sub(1).map(PortId)
    }

    pub fn number(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0 + 1)
    }
}

impl Serialize for PortId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.number() as u64)
    }
}

impl<'de> Deserialize<'de> for PortId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let n = usize::deserialize(d)?;
        PortId::from_number(n).ok_or_else(|| serde::de::Error::custom("port ids start at 1"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Port {
    pub owner: NodeId,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub inputs: Vec<PortId>,
    pub outputs: Vec<PortId>,
}

/// Directed edge; serializes as `[from, to]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(PortId, PortId)", into = "(PortId, PortId)")]
pub struct Edge {
    pub from: PortId,
    pub to: PortId,
}

impl Edge {
    pub fn new(from: PortId, to: PortId) -> Self {
        Edge { from, to }
    }
}

impl From<(PortId, PortId)> for Edge {
    fn from((from, to): (PortId, PortId)) -> Self {
        Edge { from, to }
    }
}

impl From<Edge> for (PortId, PortId) {
    fn from(e: Edge) -> Self {
        (e.from, e.to)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.from, self.to)
    }
}

/// A source or destination and its number of processes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Endpoint {
    pub node: NodeId,
    pub processes: usize,
}

/// `(source, destination, demanded processes)`, process indices 0-based
/// and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub source: NodeId,
    pub dest: NodeId,
    pub subset: Vec<usize>,
}

impl Connection {
    pub fn rate(&self) -> usize {
        self.subset.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionClass {
    Unicast,
    SingleMulticast,
    MultipleMulticast,
    DisjointMulticast,
    TwoLevelMulticast,
    General,
}

impl ConnectionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConnectionClass::Unicast => "unicast",
            ConnectionClass::SingleMulticast => "single-multicast",
            ConnectionClass::MultipleMulticast => "multiple-multicast",
            ConnectionClass::DisjointMulticast => "disjoint-multicast",
            ConnectionClass::TwoLevelMulticast => "two-level-multicast",
            ConnectionClass::General => "general",
        }
    }
}

impl fmt::Display for ConnectionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ConnectionClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown class `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionSet {
    pub class: ConnectionClass,
    pub connections: Vec<Connection>,
}

impl ConnectionSet {
    pub fn new(class: ConnectionClass, connections: Vec<Connection>) -> Self {
        ConnectionSet { class, connections }
    }

    /// Destinations in order of first appearance.
    pub fn receivers(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        for c in &self.connections {
            if !out.contains(&c.dest) {
                out.push(c.dest);
            }
        }
        out
    }

    /// Sources in order of first appearance.
    pub fn senders(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        for c in &self.connections {
            if !out.contains(&c.source) {
                out.push(c.source);
            }
        }
        out
    }

    /// Global process rows demanded by `dest`, ascending.
    pub fn demanded_rows(&self, net: &Network, dest: NodeId) -> Vec<usize> {
        let mut rows: BTreeSet<usize> = BTreeSet::new();
        for c in self.connections.iter().filter(|c| c.dest == dest) {
            if let Some(offset) = net.source_offset(c.source) {
                rows.extend(c.subset.iter().map(|&i| offset + i));
            }
        }
        rows.into_iter().collect()
    }

    /// Structural and class-definition problems, empty when consistent.
    pub fn check(&self, net: &Network) -> Vec<String> {
        let mut errors = Vec::new();
        let name = |n: NodeId| net.node(n).name.clone();
        let mut pairs = BTreeSet::new();
        for c in &self.connections {
            let Some(src) = net.source(c.source) else {
                errors.push(format!("`{}` is not a source", name(c.source)));
                continue;
            };
            if net.destination(c.dest).is_none() {
                errors.push(format!("`{}` is not a destination", name(c.dest)));
            }
            if c.subset.is_empty() {
                errors.push(format!("connection {} -> {} demands no processes", name(c.source), name(c.dest)));
            }
            if c.subset.iter().any(|&i| i >= src.processes) {
                errors.push(format!(
                    "connection {} -> {} names a process outside 1..{}",
                    name(c.source),
                    name(c.dest),
                    src.processes
                ));
            }
            if c.subset.windows(2).any(|w| w[0] >= w[1]) {
                errors.push(format!("connection {} -> {} has unsorted or repeated processes", name(c.source), name(c.dest)));
            }
            if !pairs.insert((c.source, c.dest)) {
                errors.push(format!("connection {} -> {} listed twice", name(c.source), name(c.dest)));
            }
        }
        if !errors.is_empty() {
            return errors;
        }
        for t in self.receivers() {
            let demanded = self.demanded_rows(net, t).len();
            let nu = net.destination(t).map_or(0, |d| d.processes);
            if demanded > nu {
                errors.push(format!("`{}` demands {demanded} processes but has only {nu}", name(t)));
            }
        }
        let full = |c: &Connection| net.source(c.source).is_some_and(|s| c.subset.len() == s.processes);
        let senders = self.senders();
        match self.class {
            ConnectionClass::Unicast => {
                if self.connections.len() != 1 {
                    errors.push("unicast needs exactly one connection".into());
                }
            }
            ConnectionClass::SingleMulticast => {
                if senders.len() != 1 {
                    errors.push("single multicast needs exactly one source".into());
                }
                if !self.connections.iter().all(full) {
                    errors.push("single multicast receivers must demand every process of the source".into());
                }
            }
            ConnectionClass::MultipleMulticast => {
                for t in self.receivers() {
                    for &s in &senders {
                        if !self.connections.iter().any(|c| c.source == s && c.dest == t && full(c)) {
                            errors.push(format!(
                                "multiple multicast receiver `{}` must demand every process of `{}`",
                                name(t),
                                name(s)
                            ));
                        }
                    }
                }
            }
            ConnectionClass::DisjointMulticast | ConnectionClass::TwoLevelMulticast => {
                if senders.len() != 1 {
                    errors.push(format!("{} needs exactly one source", self.class));
                }
                let two_level = self.class == ConnectionClass::TwoLevelMulticast;
                let mut seen = BTreeSet::new();
                for c in &self.connections {
                    if two_level && full(c) {
                        continue;
                    }
                    for &i in &c.subset {
                        if !seen.insert(i) {
                            errors.push(format!("process {} is demanded by more than one disjoint receiver", i + 1));
                        }
                    }
                }
            }
            ConnectionClass::General => {}
        }
        errors
    }
}

/// Result of [`Network::validate`]. `is_valid` covers structural rules;
/// `acyclic` separately gates the static (non-delay) pipeline.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub direction_violations: Vec<Edge>,
    pub duplicate_edges: Vec<Edge>,
    pub ownership_errors: Vec<String>,
    pub process_violations: Vec<String>,
    pub connection_errors: Vec<String>,
    pub acyclic: bool,
    pub cycle: Option<Vec<PortId>>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.direction_violations.is_empty()
            && self.duplicate_edges.is_empty()
            && self.ownership_errors.is_empty()
            && self.process_violations.is_empty()
            && self.connection_errors.is_empty()
    }

    /// Human-readable problems, one per line.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for e in &self.direction_violations {
            out.push(format!("edge {e} does not go from an output port to an input port"));
        }
        for e in &self.duplicate_edges {
            out.push(format!("edge {e} is listed more than once"));
        }
        out.extend(self.ownership_errors.iter().cloned());
        out.extend(self.process_violations.iter().cloned());
        out.extend(self.connection_errors.iter().cloned());
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    field: GaloisField,
    nodes: Vec<Node>,
    ports: Vec<Port>,
    edges: Vec<Edge>,
    sources: Vec<Endpoint>,
    destinations: Vec<Endpoint>,
    connections: Option<ConnectionSet>,
    erasures: Option<FailureModel>,
    delay: bool,
}

/// Incremental construction. Only referential integrity is enforced here;
/// structural rules are reported by [`Network::validate`].
#[derive(Clone, Debug)]
pub struct NetworkBuilder {
    net: Network,
}

impl NetworkBuilder {
    pub fn new(field: GaloisField) -> Self {
        NetworkBuilder {
            net: Network {
                field,
                nodes: Vec::new(),
                ports: Vec::new(),
                edges: Vec::new(),
                sources: Vec::new(),
                destinations: Vec::new(),
                connections: None,
                erasures: None,
                delay: false,
            },
        }
    }

    pub fn node(&mut self, name: &str, inputs: usize, outputs: usize) -> Result<NodeId, ModelError> {
        if self.net.node_by_name(name).is_some() {
            return Err(ModelError::DuplicateNode(name.to_string()));
        }
        let id = NodeId(self.net.nodes.len());
        let mut node = Node { name: name.to_string(), inputs: Vec::new(), outputs: Vec::new() };
        for (count, direction) in [(inputs, Direction::Input), (outputs, Direction::Output)] {
            for _ in 0..count {
                let p = PortId(self.net.ports.len());
                self.net.ports.push(Port { owner: id, direction });
                match direction {
                    Direction::Input => node.inputs.push(p),
                    Direction::Output => node.outputs.push(p),
                }
            }
        }
        self.net.nodes.push(node);
        Ok(id)
    }

    pub fn edge(&mut self, from: PortId, to: PortId) -> Result<&mut Self, ModelError> {
        for p in [from, to] {
            if p.0 >= self.net.ports.len() {
                return Err(ModelError::PortOutOfRange { port: p.number(), count: self.net.ports.len() });
            }
        }
        self.net.edges.push(Edge { from, to });
        Ok(self)
    }

    /// Edge from the `out`-th output of `a` to the `inp`-th input of `b`.
    pub fn link(&mut self, a: NodeId, out: usize, b: NodeId, inp: usize) -> Result<&mut Self, ModelError> {
        let from = *self.net.nodes[a.0]
            .outputs
            .get(out)
            .ok_or(ModelError::PortOutOfRange { port: out + 1, count: self.net.nodes[a.0].outputs.len() })?;
        let to = *self.net.nodes[b.0]
            .inputs
            .get(inp)
            .ok_or(ModelError::PortOutOfRange { port: inp + 1, count: self.net.nodes[b.0].inputs.len() })?;
        self.edge(from, to)
    }

    pub fn source(&mut self, node: NodeId, processes: usize) -> Result<&mut Self, ModelError> {
        if self.net.source(node).is_some() {
            return Err(ModelError::DuplicateEndpoint(self.net.nodes[node.0].name.clone(), "source"));
        }
        self.net.sources.push(Endpoint { node, processes });
        Ok(self)
    }

    pub fn destination(&mut self, node: NodeId, processes: usize) -> Result<&mut Self, ModelError> {
        if self.net.destination(node).is_some() {
            return Err(ModelError::DuplicateEndpoint(self.net.nodes[node.0].name.clone(), "destination"));
        }
        self.net.destinations.push(Endpoint { node, processes });
        Ok(self)
    }

    pub fn connections(&mut self, set: ConnectionSet) -> &mut Self {
        self.net.connections = Some(set);
        self
    }

    pub fn erasures(&mut self, model: FailureModel) -> &mut Self {
        self.net.erasures = Some(model);
        self
    }

    pub fn delay(&mut self, delay: bool) -> &mut Self {
        self.net.delay = delay;
        self
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.net.node_by_name(name)
    }

    pub fn build(&self) -> Network {
        self.net.clone()
    }
}

impl Network {
    pub fn builder(field: GaloisField) -> NetworkBuilder {
        NetworkBuilder::new(field)
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port(&self, id: PortId) -> &Port {
        &self.ports[id.0]
    }

    pub fn num_ports(&self) -> usize {
        self.ports.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn sources(&self) -> &[Endpoint] {
        &self.sources
    }

    pub fn destinations(&self) -> &[Endpoint] {
        &self.destinations
    }

    pub fn source(&self, node: NodeId) -> Option<&Endpoint> {
        self.sources.iter().find(|e| e.node == node)
    }

    pub fn destination(&self, node: NodeId) -> Option<&Endpoint> {
        self.destinations.iter().find(|e| e.node == node)
    }

    pub fn connections(&self) -> Option<&ConnectionSet> {
        self.connections.as_ref()
    }

    pub fn erasures(&self) -> Option<&FailureModel> {
        self.erasures.as_ref()
    }

    pub fn is_delay(&self) -> bool {
        self.delay
    }

    /// Total number of source processes, i.e. the rows of `A`.
    pub fn num_source_processes(&self) -> usize {
        self.sources.iter().map(|s| s.processes).sum()
    }

    /// Total number of destination processes, i.e. the rows of `B`.
    pub fn num_destination_processes(&self) -> usize {
        self.destinations.iter().map(|d| d.processes).sum()
    }

    /// First global process row of a source.
    pub fn source_offset(&self, node: NodeId) -> Option<usize> {
        let mut offset = 0;
        for s in &self.sources {
            if s.node == node {
                return Some(offset);
            }
            offset += s.processes;
        }
        None
    }

    /// First global process column of a destination.
    pub fn destination_offset(&self, node: NodeId) -> Option<usize> {
        let mut offset = 0;
        for d in &self.destinations {
            if d.node == node {
                return Some(offset);
            }
            offset += d.processes;
        }
        None
    }

    /// Every intra-node `(input, output)` pair, node by node.
    pub fn intra_pairs(&self) -> impl Iterator<Item = (PortId, PortId)> + '_ {
        self.nodes.iter().flat_map(|n| n.inputs.iter().flat_map(move |&i| n.outputs.iter().map(move |&o| (i, o))))
    }

    pub fn same_node(&self, a: PortId, b: PortId) -> bool {
        self.ports[a.0].owner == self.ports[b.0].owner
    }

    pub fn with_field(&self, field: GaloisField) -> Network {
        Network { field, ..self.clone() }
    }

    pub fn with_connections(&self, connections: Option<ConnectionSet>) -> Network {
        Network { connections, ..self.clone() }
    }

    pub fn with_erasures(&self, erasures: Option<FailureModel>) -> Network {
        Network { erasures, ..self.clone() }
    }

    /// The network with new sources and destinations; the connection set is
    /// dropped since it may no longer refer to endpoints.
    pub fn with_endpoints(&self, sources: Vec<Endpoint>, destinations: Vec<Endpoint>) -> Network {
        Network { sources, destinations, connections: None, ..self.clone() }
    }

    /// The network with the given edges removed.
    pub fn without_edges(&self, removed: &[Edge]) -> Result<Network, ModelError> {
        for e in removed {
            if !self.edges.contains(e) {
                return Err(ModelError::UnknownEdge(*e));
            }
        }
        let edges = self.edges.iter().filter(|e| !removed.contains(e)).copied().collect();
        Ok(Network { edges, ..self.clone() })
    }

    /// One entry per output port with at least one outgoing edge: the
    /// broadcast set of input ports it reaches.
    pub fn hyperedges(&self) -> Vec<(PortId, Vec<PortId>)> {
        let mut map: BTreeMap<PortId, BTreeSet<PortId>> = BTreeMap::new();
        for e in &self.edges {
            map.entry(e.from).or_default().insert(e.to);
        }
        map.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
    }

    /// One entry per input port with at least one incoming edge: the output
    /// ports whose symbols superpose there.
    pub fn mac_groups(&self) -> Vec<(PortId, Vec<PortId>)> {
        let mut map: BTreeMap<PortId, BTreeSet<PortId>> = BTreeMap::new();
        for e in &self.edges {
            map.entry(e.to).or_default().insert(e.from);
        }
        map.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
    }

    /// Successors in the port graph: edges plus every intra-node
    /// input-to-output pair.
    fn port_successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.ports.len()];
        for e in &self.edges {
            succ[e.from.0].push(e.to.0);
        }
        for (i, o) in self.intra_pairs() {
            succ[i.0].push(o.0);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        succ
    }

    /// A topological order of the port graph, or a cycle witness.
    pub fn port_order(&self) -> Result<Vec<PortId>, Vec<PortId>> {
        let succ = self.port_successors();
        topological_order(&succ).map(|v| v.into_iter().map(PortId).collect()).map_err(|c| c.into_iter().map(PortId).collect())
    }

    pub fn is_acyclic(&self) -> bool {
        self.port_order().is_ok()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if self.ports[e.from.0].direction != Direction::Output || self.ports[e.to.0].direction != Direction::Input {
                report.direction_violations.push(*e);
            }
            if !seen.insert(*e) && !report.duplicate_edges.contains(e) {
                report.duplicate_edges.push(*e);
            }
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            for (list, dir) in [(&node.inputs, Direction::Input), (&node.outputs, Direction::Output)] {
                for p in list {
                    let port = self.ports[p.0];
                    if port.owner != NodeId(idx) || port.direction != dir {
                        report.ownership_errors.push(format!("port {p} is not a {dir:?} port of `{}`", node.name));
                    }
                }
            }
        }
        let owned: usize = self.nodes.iter().map(|n| n.inputs.len() + n.outputs.len()).sum();
        if owned != self.ports.len() {
            report.ownership_errors.push(format!("{} ports but {owned} owned by nodes", self.ports.len()));
        }
        for s in &self.sources {
            let out = self.nodes[s.node.0].outputs.len();
            if s.processes > out {
                report.process_violations.push(format!(
                    "source `{}` has {} processes but only {out} output ports",
                    self.nodes[s.node.0].name, s.processes
                ));
            }
        }
        if let Some(set) = &self.connections {
            report.connection_errors = set.check(self);
        }
        match self.port_order() {
            Ok(_) => report.acyclic = true,
            Err(cycle) => report.cycle = Some(cycle),
        }
        report
    }
}

/// Kahn's algorithm on an adjacency list; on failure returns one cycle.
pub(crate) fn topological_order(succ: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push_back(j);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover vertex has a leftover predecessor; walk backwards until
    // a vertex repeats.
    let leftover: Vec<bool> = (0..n).map(|i| indeg[i] > 0).collect();
    let mut pred = vec![usize::MAX; n];
    for i in 0..n {
        if leftover[i] {
            for &j in &succ[i] {
                if leftover[j] && pred[j] == usize::MAX {
                    pred[j] = i;
                }
            }
        }
    }
    let start = (0..n).find(|&i| leftover[i]).expect("some vertex is on a cycle");
    let mut visited = vec![false; n];
    let mut v = start;
    while !visited[v] {
        visited[v] = true;
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut u = pred[v];
    while u != v {
        cycle.push(u);
        u = pred[u];
    }
    cycle.reverse();
    Err(cycle)
}
