use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Direction, Edge, ModelError, Network, PortId};
use crate::galois::Gf;

/// Values for the free coding variables.
///
/// `alpha[(i, e)]` weights process `i` of the source owning output port `e`;
/// `epsilon[(e, j)]` weights input port `e` into process `j` of the
/// destination owning it; `beta[(e_in, e_out)]` is the intra-node
/// coefficient. Missing entries are zero. `link_gains` overrides the unit
/// gain of a physical edge (zero models a failed link).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeAssignment {
    pub alpha: BTreeMap<(usize, PortId), Gf>,
    pub beta: BTreeMap<(PortId, PortId), Gf>,
    pub epsilon: BTreeMap<(PortId, usize), Gf>,
    pub link_gains: BTreeMap<Edge, Gf>,
}

impl CodeAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alpha(&self, process: usize, port: PortId) -> Gf {
        self.alpha.get(&(process, port)).copied().unwrap_or(Gf::ZERO)
    }

    pub fn beta(&self, input: PortId, output: PortId) -> Gf {
        self.beta.get(&(input, output)).copied().unwrap_or(Gf::ZERO)
    }

    pub fn epsilon(&self, port: PortId, process: usize) -> Gf {
        self.epsilon.get(&(port, process)).copied().unwrap_or(Gf::ZERO)
    }

    pub fn gain(&self, e: Edge) -> Gf {
        self.link_gains.get(&e).copied().unwrap_or(Gf::ONE)
    }

    /// Uniform draws for every α, β and ε position of `net`, in a fixed
    /// order (sources, then intra-node pairs, then destinations).
    pub fn random<R: Rng + ?Sized>(net: &Network, rng: &mut R) -> Self {
        let mut code = CodeAssignment::default();
        code.randomize_alpha(net, rng);
        code.randomize_beta(net, rng);
        code.randomize_epsilon(net, rng);
        code
    }

    pub fn randomize_alpha<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) {
        let field = net.field();
        for s in net.sources() {
            for i in 0..s.processes {
                for &e in &net.node(s.node).outputs {
                    self.alpha.insert((i, e), field.random(rng));
                }
            }
        }
    }

    pub fn randomize_beta<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) {
        let field = net.field();
        for (i, o) in net.intra_pairs() {
            self.beta.insert((i, o), field.random(rng));
        }
    }

    pub fn randomize_epsilon<R: Rng + ?Sized>(&mut self, net: &Network, rng: &mut R) {
        let field = net.field();
        for d in net.destinations() {
            for &e in &net.node(d.node).inputs {
                for j in 0..d.processes {
                    self.epsilon.insert((e, j), field.random(rng));
                }
            }
        }
    }

    /// Every β set to one.
    pub fn all_ones_beta(net: &Network) -> BTreeMap<(PortId, PortId), Gf> {
        net.intra_pairs().map(|p| (p, Gf::ONE)).collect()
    }

    /// Checks that each variable sits at a legal position and holds a field
    /// element.
    pub fn check(&self, net: &Network) -> Result<(), ModelError> {
        let field = net.field();
        let in_range = |p: PortId| p.0 < net.num_ports();
        let bad = |msg: String| Err(ModelError::InvalidAssignment(msg));
        for (&(i, e), v) in &self.alpha {
            if !in_range(e) {
                return bad(format!("alpha on unknown port {e}"));
            }
            let owner = net.port(e).owner;
            match net.source(owner) {
                Some(s) if net.port(e).direction == Direction::Output && i < s.processes => {}
                _ => return bad(format!("alpha ({}, {e}) is not at a source output port", i + 1)),
            }
            field.element(v.0)?;
        }
        for (&(a, b), v) in &self.beta {
            if !in_range(a) || !in_range(b) {
                return bad(format!("beta on unknown port pair ({a},{b})"));
            }
            if !net.same_node(a, b) || net.port(a).direction != Direction::Input || net.port(b).direction != Direction::Output {
                return bad(format!("beta ({a},{b}) is not an intra-node input-to-output pair"));
            }
            field.element(v.0)?;
        }
        for (&(e, j), v) in &self.epsilon {
            if !in_range(e) {
                return bad(format!("epsilon on unknown port {e}"));
            }
            let owner = net.port(e).owner;
            match net.destination(owner) {
                Some(d) if net.port(e).direction == Direction::Input && j < d.processes => {}
                _ => return bad(format!("epsilon ({e}, {}) is not at a destination input port", j + 1)),
            }
            field.element(v.0)?;
        }
        for (e, v) in &self.link_gains {
            if !net.has_edge(*e) {
                return Err(ModelError::UnknownEdge(*e));
            }
            field.element(v.0)?;
        }
        Ok(())
    }

    /// Renames ports through `map` (old index to new port); used to move an
    /// assignment onto a transformed network.
    pub fn remap(&self, map: &[PortId]) -> Self {
        let m = |p: PortId| map[p.0];
        CodeAssignment {
            alpha: self.alpha.iter().map(|(&(i, e), &v)| ((i, m(e)), v)).collect(),
            beta: self.beta.iter().map(|(&(a, b), &v)| ((m(a), m(b)), v)).collect(),
            epsilon: self.epsilon.iter().map(|(&(e, j), &v)| ((m(e), j), v)).collect(),
            link_gains: self.link_gains.iter().map(|(e, &v)| (Edge::new(m(e.from), m(e.to)), v)).collect(),
        }
    }

    /// Drops explicit zeros so equal codes compare equal.
    pub fn canonical(&self) -> Self {
        CodeAssignment {
            alpha: self.alpha.iter().filter(|(_, v)| v.0 != 0).map(|(k, v)| (*k, *v)).collect(),
            beta: self.beta.iter().filter(|(_, v)| v.0 != 0).map(|(k, v)| (*k, *v)).collect(),
            epsilon: self.epsilon.iter().filter(|(_, v)| v.0 != 0).map(|(k, v)| (*k, *v)).collect(),
            link_gains: self.link_gains.iter().filter(|(_, v)| v.0 != 1).map(|(k, v)| (*k, *v)).collect(),
        }
    }
}

/// File form: triples of 1-based ids and the value.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentFile {
    #[serde(default)]
    alpha: Vec<(usize, PortId, u32)>,
    #[serde(default)]
    beta: Vec<(PortId, PortId, u32)>,
    #[serde(default)]
    epsilon: Vec<(PortId, usize, u32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    link_gains: Vec<(PortId, PortId, u32)>,
}

impl Serialize for CodeAssignment {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AssignmentFile {
            alpha: self.alpha.iter().map(|(&(i, e), v)| (i + 1, e, v.0)).collect(),
            beta: self.beta.iter().map(|(&(a, b), v)| (a, b, v.0)).collect(),
            epsilon: self.epsilon.iter().map(|(&(e, j), v)| (e, j + 1, v.0)).collect(),
            link_gains: self.link_gains.iter().map(|(e, v)| (e.from, e.to, v.0)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodeAssignment {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let f = AssignmentFile::deserialize(d)?;
        let idx = |n: usize| n.checked_sub(1).ok_or_else(|| D::Error::custom("process indices start at 1"));
        let mut code = CodeAssignment::default();
        for (i, e, v) in f.alpha {
            code.alpha.insert((idx(i)?, e), Gf(v));
        }
        for (a, b, v) in f.beta {
            code.beta.insert((a, b), Gf(v));
        }
        for (e, j, v) in f.epsilon {
            code.epsilon.insert((e, idx(j)?), Gf(v));
        }
        for (a, b, v) in f.link_gains {
            code.link_gains.insert(Edge::new(a, b), Gf(v));
        }
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::GaloisField;
    use crate::rng::Seed;

    fn small() -> Network {
        let mut b = Network::builder(GaloisField::of_order(16).unwrap());
        let s = b.node("S", 0, 2).unwrap();
        let r = b.node("R", 1, 1).unwrap();
        let t = b.node("T", 2, 0).unwrap();
        b.link(s, 0, r, 0).unwrap().link(s, 1, t, 0).unwrap().link(r, 0, t, 1).unwrap();
        b.source(s, 2).unwrap().destination(t, 2).unwrap();
        b.build()
    }

    #[test]
    fn random_code_is_legal_and_round_trips() {
        let net = small();
        let code = CodeAssignment::random(&net, &mut Seed(3).rng());
        assert_eq!(code.alpha.len(), 4);
        assert_eq!(code.beta.len(), 1);
        assert_eq!(code.epsilon.len(), 4);
        code.check(&net).unwrap();
        let json = serde_json::to_string(&code).unwrap();
        assert_eq!(serde_json::from_str::<CodeAssignment>(&json).unwrap(), code);
    }

    #[test]
    fn cross_node_beta_rejected() {
        let net = small();
        let mut code = CodeAssignment::new();
        code.beta.insert((PortId(2), PortId(0)), Gf(1));
        assert!(matches!(code.check(&net), Err(ModelError::InvalidAssignment(_))));
    }

    #[test]
    fn alpha_off_source_rejected() {
        let net = small();
        let mut code = CodeAssignment::new();
        code.alpha.insert((0, PortId(3)), Gf(1));
        assert!(code.check(&net).is_err());
        let mut code = CodeAssignment::new();
        code.alpha.insert((0, PortId(0)), Gf(16));
        assert!(code.check(&net).is_err());
    }
}
