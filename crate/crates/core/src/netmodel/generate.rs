//! Random network generator for experiments, benchmarks and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Network, NodeId};
use crate::galois::GaloisField;

#[derive(Clone, Debug)]
pub struct RandomNetworkConfig {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Per-node cap on inputs and on outputs.
    pub max_ports_per_side: usize,
    pub max_ports: usize,
    pub edge_probability: f64,
    /// When false, edges may also point backwards in node order.
    pub acyclic: bool,
    pub max_sources: usize,
    pub max_destinations: usize,
}

impl Default for RandomNetworkConfig {
    fn default() -> Self {
        RandomNetworkConfig {
            min_nodes: 2,
            max_nodes: 8,
            max_ports_per_side: 3,
            max_ports: 24,
            edge_probability: 0.3,
            acyclic: true,
            max_sources: 1,
            max_destinations: 1,
        }
    }
}

/// Draws a network: random port counts, then each candidate output-to-input
/// edge independently. With `acyclic`, edges only go forward in node order,
/// which keeps the port graph acyclic. Sources are drawn among nodes with
/// outputs and destinations among the remaining nodes with inputs.
pub fn random_network<R: Rng + ?Sized>(field: &GaloisField, config: &RandomNetworkConfig, rng: &mut R) -> Network {
    let n = rng.gen_range(config.min_nodes..=config.max_nodes);
    let mut b = Network::builder(field.clone());
    let mut budget = config.max_ports;
    let mut shape = Vec::with_capacity(n);
    for k in 0..n {
        let remaining_nodes = n - k - 1;
        let cap = config.max_ports_per_side.min(budget.saturating_sub(remaining_nodes) / 2);
        let first = k == 0;
        let last = k + 1 == n;
        let inputs = if first { 0 } else { rng.gen_range(0..=cap) };
        let outputs = if last { 0 } else { rng.gen_range(0..=cap) };
        let inputs = if last { inputs.max(1.min(cap)) } else { inputs };
        let outputs = if first { outputs.max(1.min(cap)) } else { outputs };
        budget -= inputs + outputs;
        shape.push((inputs, outputs));
    }
    let ids: Vec<NodeId> = shape
        .iter()
        .enumerate()
        .map(|(k, &(i, o))| b.node(&format!("N{k}"), i, o).expect("generated names are unique"))
        .collect();
    for (a, &(_, outs)) in shape.iter().enumerate() {
        for o in 0..outs {
            for (c, &(ins, _)) in shape.iter().enumerate() {
                if c == a || (config.acyclic && c < a) {
                    continue;
                }
                for i in 0..ins {
                    if rng.gen_bool(config.edge_probability) {
                        b.link(ids[a], o, ids[c], i).expect("ports exist");
                    }
                }
            }
        }
    }
    let mut senders: Vec<usize> = (0..n).filter(|&k| shape[k].1 > 0).collect();
    senders.shuffle(rng);
    senders.truncate(rng.gen_range(1..=config.max_sources.max(1)).min(senders.len()));
    senders.sort_unstable();
    for &k in &senders {
        let mu = rng.gen_range(1..=shape[k].1);
        b.source(ids[k], mu).expect("distinct");
    }
    let mut receivers: Vec<usize> = (0..n).filter(|&k| shape[k].0 > 0 && !senders.contains(&k)).collect();
    receivers.shuffle(rng);
    receivers.truncate(rng.gen_range(1..=config.max_destinations.max(1)).min(receivers.len()));
    receivers.sort_unstable();
    for &k in &receivers {
        let nu = rng.gen_range(1..=shape[k].0);
        b.destination(ids[k], nu).expect("distinct");
    }
    b.build()
}
