mod common;

use adtnet_core::codecon::{construct_disjoint_multicast, construct_two_level, random_code, solve_multiple_multicast, verify};
use adtnet_core::format;
use adtnet_core::galois::Gf;
use adtnet_core::linalg::build_f;
use adtnet_core::mincut::{mincut_algebraic, mincut_enumeration, Witness, DEFAULT_NODE_CAP};
use adtnet_core::netmodel::{CodeAssignment, PortId};
use adtnet_core::par::Exec;
use adtnet_core::rng::Seed;
use common::{fixture, fixture_text, node};

const ALL: [&str; 9] = [
    "fig2.json",
    "diamond.json",
    "parallel.json",
    "cycle2.json",
    "multisource.json",
    "butterfly.json",
    "combination.json",
    "broadcast.json",
    "twolevel.json",
];

#[test]
fn fixtures_are_canonical_and_round_trip() {
    for name in ALL {
        let text = fixture_text(name);
        let net = format::load(&text).unwrap();
        assert_eq!(format::save(&net), text, "{name} is not in canonical layout");
        assert_eq!(format::load(&format::save(&net)).unwrap(), net, "{name}");
    }
}

#[test]
fn fixtures_validate() {
    for name in ALL {
        let report = fixture(name).validate();
        assert!(report.is_valid(), "{name}: {:?}", report.problems());
        assert_eq!(report.acyclic, name != "cycle2.json", "{name}");
    }
}

#[test]
fn fig2_sparsity_and_hyperedges() {
    let net = fixture("fig2.json");
    assert_eq!(net.num_ports(), 12);
    let mut code = CodeAssignment::new();
    for (i, o) in net.intra_pairs() {
        code.beta.insert((i, o), Gf(100 + i.0 as u32 * 12 + o.0 as u32));
    }
    let f = build_f(&net, &code).unwrap();
    let ones: Vec<(usize, usize)> =
        (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).filter(|&(i, j)| *f.get(i, j) == Gf(1)).collect();
    assert_eq!(ones, vec![(0, 2), (0, 7), (1, 3), (4, 11), (8, 10), (9, 11)]);
    let h = net.hyperedges();
    assert_eq!(h[0], (PortId(0), vec![PortId(2), PortId(7)]));
    let mac = net.mac_groups();
    assert!(mac.contains(&(PortId(11), vec![PortId(4), PortId(9)])));
}

#[test]
fn fig2_capacity() {
    let net = fixture("fig2.json");
    let (s, t) = (node(&net, "S"), node(&net, "T"));
    let e = mincut_enumeration(&net, s, t, DEFAULT_NODE_CAP, Exec::Sequential).unwrap();
    assert_eq!(e.value, 2);
    assert_eq!(e.witness, Witness::Cut(vec!["S".into()]));
    assert_eq!(mincut_algebraic(&net, s, t, 4, Seed(1), Exec::Sequential).unwrap().value, 2);
}

#[test]
fn multicast_fixtures_are_solvable() {
    for name in ["butterfly.json", "combination.json", "broadcast.json", "fig2.json", "diamond.json", "parallel.json"] {
        let net = fixture(name);
        let out = random_code(&net, None, 32, Seed(11), Exec::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(out.verdict.feasible, "{name}");
        assert!(verify(&net, &out.assignment, None).unwrap().feasible, "{name}");
    }
}

#[test]
fn multisource_is_feasible() {
    let net = fixture("multisource.json");
    let set = net.connections().unwrap().clone();
    let out = solve_multiple_multicast(&net, &set, 32, Seed(7), Exec::default()).unwrap();
    assert!(out.verdict.feasible);
}

#[test]
fn twolevel_construction() {
    let net = fixture("twolevel.json");
    let set = net.connections().unwrap().clone();
    let out = construct_two_level(&net, &set, 32, Seed(5), Exec::default()).unwrap();
    assert!(out.verdict.feasible);
    assert!(construct_disjoint_multicast(&net, &set, 4, Seed(5), Exec::default()).is_err());
}

#[test]
fn cycle2_is_gated_to_the_delay_pipeline() {
    let net = fixture("cycle2.json");
    assert!(net.is_delay());
    assert!(!net.validate().acyclic);
    assert!(random_code(&net, None, 4, Seed(1), Exec::Sequential).is_err());
}
