//! JSON network files and code assignment files.
//!
//! ```json
//! {
//!   "field": {"p":2,"m":8},
//!   "nodes": [
//!     {"id":"S","inputs":0,"outputs":2},
//!     {"id":"T","inputs":2,"outputs":0}
//!   ],
//!   "edges": [
//!     [1,3],
//!     [2,4]
//!   ],
//!   "sources": [
//!     {"node":"S","processes":2}
//!   ],
//!   "destinations": [
//!     {"node":"T","processes":2}
//!   ],
//!   "connections": [
//!     {"source":"S","dest":"T","subset":[1,2],"class":"unicast"}
//!   ]
//! }
//! ```
//!
//! Ports are numbered from 1 in node order, each node's inputs before its
//! outputs. `field.modulus` (coefficients, constant term first) is written
//! only when it differs from the default for `(p, m)`. `connections`,
//! `erasures` and `delay` are optional. [`save`] writes a canonical layout, so
//! `save(load(save(net)))` reproduces the same bytes.

use serde::{Deserialize, Serialize};

use crate::erasim::FailureModel;
use crate::galois::{ArithmeticError, FieldSpec, GaloisField};
use crate::netmodel::{CodeAssignment, Connection, ConnectionClass, ConnectionSet, Edge, ModelError, Network, PortId};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{element}: {message}")]
    Semantic { element: String, message: String },
    #[error("field: {0}")]
    Field(#[from] ArithmeticError),
    #[error("assignment: {0}")]
    Assignment(ModelError),
}

impl FormatError {
    fn parse(e: serde_json::Error) -> Self {
        FormatError::Parse { line: e.line(), column: e.column(), message: strip_position(&e.to_string()) }
    }

    fn at(element: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Semantic { element: element.into(), message: message.into() }
    }
}

/// serde_json appends " at line L column C"; the position is reported
/// separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldEntry {
    p: u32,
    #[serde(default = "one")]
    m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modulus: Option<Vec<u32>>,
}

fn one() -> u32 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeEntry {
    id: String,
    inputs: usize,
    outputs: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndpointEntry {
    node: String,
    processes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionEntry {
    source: String,
    dest: String,
    subset: Vec<usize>,
    class: ConnectionClass,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    field: FieldEntry,
    nodes: Vec<NodeEntry>,
    #[serde(default)]
    edges: Vec<(usize, usize)>,
    #[serde(default)]
    sources: Vec<EndpointEntry>,
    #[serde(default)]
    destinations: Vec<EndpointEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    connections: Vec<ConnectionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    erasures: Option<FailureModel>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    delay: bool,
}

fn field_of(entry: &FieldEntry) -> Result<GaloisField, FormatError> {
    let spec = match &entry.modulus {
        Some(m) if entry.m > 1 => FieldSpec::with_modulus(entry.p, entry.m, m.clone())?,
        _ => FieldSpec::new(entry.p, entry.m)?,
    };
    Ok(GaloisField::new(spec)?)
}

/// Parses a network file. Syntax errors carry line and column; semantic
/// errors name the offending element, e.g. `edges[3]`.
pub fn load(text: &str) -> Result<Network, FormatError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(FormatError::parse)?;
    let field = field_of(&file.field)?;
    let mut b = Network::builder(field);
    for (k, n) in file.nodes.iter().enumerate() {
        b.node(&n.id, n.inputs, n.outputs).map_err(|e| FormatError::at(format!("nodes[{k}]"), e.to_string()))?;
    }
    for (k, &(from, to)) in file.edges.iter().enumerate() {
        let port =
            |n: usize| PortId::from_number(n).ok_or_else(|| FormatError::at(format!("edges[{k}]"), "port numbers start at 1"));
        b.edge(port(from)?, port(to)?).map_err(|e| FormatError::at(format!("edges[{k}]"), e.to_string()))?;
    }
    let lookup = |b: &crate::netmodel::NetworkBuilder, element: String, name: &str| {
        b.node_id(name).ok_or_else(|| FormatError::at(element, format!("unknown node `{name}`")))
    };
    for (k, s) in file.sources.iter().enumerate() {
        let el = format!("sources[{k}]");
        let id = lookup(&b, el.clone(), &s.node)?;
        b.source(id, s.processes).map_err(|e| FormatError::at(el, e.to_string()))?;
    }
    for (k, d) in file.destinations.iter().enumerate() {
        let el = format!("destinations[{k}]");
        let id = lookup(&b, el.clone(), &d.node)?;
        b.destination(id, d.processes).map_err(|e| FormatError::at(el, e.to_string()))?;
    }
    if let Some(first) = file.connections.first() {
        let mut connections = Vec::with_capacity(file.connections.len());
        for (k, c) in file.connections.iter().enumerate() {
            let el = format!("connections[{k}]");
            if c.class != first.class {
                return Err(FormatError::at(el, format!("class {} differs from connections[0] ({})", c.class, first.class)));
            }
            let source = lookup(&b, el.clone(), &c.source)?;
            let dest = lookup(&b, el.clone(), &c.dest)?;
            let mut subset = Vec::with_capacity(c.subset.len());
            for &i in &c.subset {
                let i = i.checked_sub(1).ok_or_else(|| FormatError::at(el.clone(), "process indices start at 1"))?;
                if subset.contains(&i) {
                    return Err(FormatError::at(el, format!("process {} listed twice", i + 1)));
                }
                subset.push(i);
            }
            subset.sort_unstable();
            connections.push(Connection { source, dest, subset });
        }
        b.connections(ConnectionSet::new(first.class, connections));
    }
    if let Some(model) = file.erasures {
        b.erasures(model);
    }
    b.delay(file.delay);
    Ok(b.build())
}

fn to_file(net: &Network) -> NetworkFile {
    let spec = net.field().spec();
    let default = FieldSpec::new(spec.p, spec.m).ok();
    let modulus = (spec.m > 1 && default.as_ref() != Some(spec)).then(|| spec.modulus.clone());
    let name = |id| net.node(id).name.clone();
    NetworkFile {
        field: FieldEntry { p: spec.p, m: spec.m, modulus },
        nodes: net
            .nodes()
            .iter()
            .map(|n| NodeEntry { id: n.name.clone(), inputs: n.inputs.len(), outputs: n.outputs.len() })
            .collect(),
        edges: net.edges().iter().map(|e| (e.from.number(), e.to.number())).collect(),
        sources: net.sources().iter().map(|s| EndpointEntry { node: name(s.node), processes: s.processes }).collect(),
        destinations: net.destinations().iter().map(|d| EndpointEntry { node: name(d.node), processes: d.processes }).collect(),
        connections: net
            .connections()
            .map(|set| {
                set.connections
                    .iter()
                    .map(|c| ConnectionEntry {
                        source: name(c.source),
                        dest: name(c.dest),
                        subset: c.subset.iter().map(|i| i + 1).collect(),
                        class: set.class,
                    })
                    .collect()
            })
            .unwrap_or_default(),
        erasures: net.erasures().cloned(),
        delay: net.is_delay(),
    }
}

/// Canonical text: one top-level key per line, one list element per line,
/// everything else compact. Ends with a newline.
pub fn save(net: &Network) -> String {
    fn compact<T: Serialize + ?Sized>(v: &T) -> String {
        serde_json::to_string(v).expect("network file serializes")
    }
    fn list<T: Serialize>(items: &[T]) -> String {
        if items.is_empty() {
            return "[]".into();
        }
        let lines: Vec<String> = items.iter().map(|i| format!("    {}", compact(i))).collect();
        format!("[\n{}\n  ]", lines.join(",\n"))
    }
    let file = to_file(net);
    let mut parts = vec![
        ("field", compact(&file.field)),
        ("nodes", list(&file.nodes)),
        ("edges", list(&file.edges)),
        ("sources", list(&file.sources)),
        ("destinations", list(&file.destinations)),
    ];
    if !file.connections.is_empty() {
        parts.push(("connections", list(&file.connections)));
    }
    if let Some(e) = &file.erasures {
        parts.push(("erasures", compact(e)));
    }
    if file.delay {
        parts.push(("delay", "true".into()));
    }
    let body: Vec<String> = parts.into_iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

/// Parses an assignment file and checks it against `net`.
pub fn load_assignment(text: &str, net: &Network) -> Result<CodeAssignment, FormatError> {
    let code: CodeAssignment = serde_json::from_str(text).map_err(FormatError::parse)?;
    code.check(net).map_err(FormatError::Assignment)?;
    Ok(code)
}

/// Canonical assignment text (zero coefficients dropped).
pub fn save_assignment(code: &CodeAssignment) -> String {
    let mut s = serde_json::to_string(&code.canonical()).expect("assignment serializes");
    s.push('\n');
    s
}

/// Edge given by 1-based port numbers.
pub fn edge(from: usize, to: usize) -> Option<Edge> {
    Some(Edge::new(PortId::from_number(from)?, PortId::from_number(to)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
  "field": {"p":2,"m":4},
  "nodes": [
    {"id":"S","inputs":0,"outputs":2},
    {"id":"T","inputs":2,"outputs":0}
  ],
  "edges": [
    [1,3],
    [2,4]
  ],
  "sources": [
    {"node":"S","processes":2}
  ],
  "destinations": [
    {"node":"T","processes":2}
  ],
  "connections": [
    {"source":"S","dest":"T","subset":[1,2],"class":"unicast"}
  ]
}
"#;

    #[test]
    fn canonical_round_trip() {
        let net = load(SMALL).unwrap();
        assert_eq!(net.num_ports(), 4);
        assert_eq!(save(&net), SMALL);
        assert_eq!(load(&save(&net)).unwrap(), net);
    }

    #[test]
    fn syntax_error_position() {
        let bad = SMALL.replace("[2,4]", "[2,4");
        match load(&bad) {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_name_element() {
        let bad = SMALL.replace("[2,4]", "[2,9]");
        let err = load(&bad).unwrap_err().to_string();
        assert!(err.starts_with("edges[1]"), "{err}");
        let bad = SMALL.replace(r#""node":"T""#, r#""node":"X""#);
        assert_eq!(load(&bad).unwrap_err().to_string(), "destinations[0]: unknown node `X`");
    }

    #[test]
    fn custom_modulus_is_kept() {
        let text = SMALL.replace(r#"{"p":2,"m":4}"#, r#"{"p":2,"m":4,"modulus":[1,1,1,1,1]}"#);
        let net = load(&text).unwrap();
        assert_eq!(save(&net), text);
        let default = SMALL.replace(r#"{"p":2,"m":4}"#, r#"{"p":2,"m":4,"modulus":[1,1,0,0,1]}"#);
        assert_eq!(save(&load(&default).unwrap()), SMALL);
    }

    #[test]
    fn optional_sections() {
        let text = SMALL.replace("\n}\n", ",\n  \"erasures\": {\"iid\":0.25},\n  \"delay\": true\n}\n");
        let net = load(&text).unwrap();
        assert!(net.is_delay());
        assert_eq!(save(&net), text);
    }
}
