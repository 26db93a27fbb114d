#![allow(dead_code)]

use std::path::PathBuf;

use adtnet_core::codecon::Decoder;
use adtnet_core::format;
use adtnet_core::galois::{GaloisField, Gf, Ring};
use adtnet_core::netmodel::{CodeAssignment, Network, NodeId};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> Network {
    format::load(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn node(net: &Network, name: &str) -> NodeId {
    net.node_by_name(name).unwrap_or_else(|| panic!("no node {name}"))
}

/// Port-level propagation in topological port order:
/// `Y(e) = Σ α X` at source outputs plus `Σ g Y(e')` over incoming edges at
/// inputs plus `Σ β Y(e')` over the node's inputs at outputs; then
/// `Z(T, j) = Σ ε Y(e)`.
pub fn propagate(net: &Network, code: &CodeAssignment, x: &[Gf]) -> Vec<Gf> {
    let y = port_values(net, code, x);
    let field = net.field();
    let mut z = Vec::new();
    for d in net.destinations() {
        for j in 0..d.processes {
            let mut acc = Gf::ZERO;
            for &e in &net.node(d.node).inputs {
                acc = field.add(&acc, &field.mul(&code.epsilon(e, j), &y[e.0]));
            }
            z.push(acc);
        }
    }
    z
}

/// Symbol at every port for source symbols `x`.
pub fn port_values(net: &Network, code: &CodeAssignment, x: &[Gf]) -> Vec<Gf> {
    let field = net.field();
    let order = net.port_order().expect("acyclic");
    let mut y = vec![Gf::ZERO; net.num_ports()];
    let mut offsets = std::collections::BTreeMap::new();
    let mut row = 0;
    for s in net.sources() {
        offsets.insert(s.node, row);
        row += s.processes;
    }
    for e in order {
        let port = net.port(e);
        let mut acc = Gf::ZERO;
        if let Some(&off) = offsets.get(&port.owner) {
            let s = net.source(port.owner).unwrap();
            if net.node(port.owner).outputs.contains(&e) {
                for i in 0..s.processes {
                    acc = field.add(&acc, &field.mul(&code.alpha(i, e), &x[off + i]));
                }
            }
        }
        for edge in net.edges().iter().filter(|d| d.to == e) {
            acc = field.add(&acc, &field.mul(&code.gain(*edge), &y[edge.from.0]));
        }
        if net.node(port.owner).outputs.contains(&e) {
            for &i in &net.node(port.owner).inputs {
                acc = field.add(&acc, &field.mul(&code.beta(i, e), &y[i.0]));
            }
        }
        y[e.0] = acc;
    }
    y
}

/// Applies a receiver's decoder to the symbols at its input ports.
pub fn decode(net: &Network, dec: &Decoder, y: &[Gf]) -> Vec<Gf> {
    let field = net.field();
    (0..dec.matrix.cols())
        .map(|j| {
            dec.ports.iter().enumerate().fold(Gf::ZERO, |acc, (k, p)| field.add(&acc, &field.mul(&y[p.0], dec.matrix.get(k, j))))
        })
        .collect()
}

pub fn gf(q: u32) -> GaloisField {
    GaloisField::of_order(q).unwrap()
}
