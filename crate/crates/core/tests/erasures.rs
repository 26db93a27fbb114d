mod common;

use adtnet_core::codecon::multicast;
use adtnet_core::erasim::{
    apply_failure, feasibility_time_varying, static_solution, time_average_mincut, verify_under_patterns, FailureModel, Mode,
};
use adtnet_core::mincut::{mincut_enumeration, MincutOptions, DEFAULT_NODE_CAP};
use adtnet_core::netmodel::generate::{random_network, RandomNetworkConfig};
use adtnet_core::netmodel::CodeAssignment;
use adtnet_core::par::Exec;
use adtnet_core::rng::Seed;
use common::{fixture, gf, node};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    /// Zeroing a link gain has the same effect as deleting the edge.
    #[test]
    fn failure_equals_deletion(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let field = gf(16);
        let mut rng = Seed(seed).rng();
        let net = random_network(&field, &RandomNetworkConfig::default(), &mut rng);
        prop_assume!(!net.edges().is_empty());
        let code = CodeAssignment::random(&net, &mut rng);
        let e = net.edges()[pick.index(net.edges().len())];
        let (reduced, zeroed) = apply_failure(&net, &code, &[e]).unwrap();
        let a = adtnet_core::codecon::system_matrix(&net, &zeroed).unwrap().matrix;
        let b = adtnet_core::codecon::system_matrix(&reduced, &code).unwrap().matrix;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exact_average_is_bounded_by_endpoint_ports(seed in any::<u64>(), p in 0.0f64..1.0) {
        let field = gf(2);
        let mut rng = Seed(seed).rng();
        let config = RandomNetworkConfig { max_nodes: 5, max_ports: 12, ..Default::default() };
        let net = random_network(&field, &config, &mut rng);
        let (Some(s), Some(t)) = (net.sources().first(), net.destinations().first()) else { return Ok(()) };
        let full = mincut_enumeration(&net, s.node, t.node, DEFAULT_NODE_CAP, Exec::Sequential).unwrap().value as f64;
        let avg = time_average_mincut(&net, s.node, t.node, &FailureModel::Iid { iid: p }, Mode::Exact, 0, Seed(1), &MincutOptions::default()).unwrap();
        let ports = net.node(s.node).outputs.len().min(net.node(t.node).inputs.len()) as f64;
        prop_assert!(avg.value <= ports + 1e-9 && avg.value >= -1e-9);
        let none = time_average_mincut(&net, s.node, t.node, &FailureModel::Iid { iid: 0.0 }, Mode::Exact, 0, Seed(1), &MincutOptions::default()).unwrap();
        prop_assert!((none.value - full).abs() < 1e-9);
    }
}

#[test]
fn parallel_fixture_average() {
    let net = fixture("parallel.json");
    let (s, t) = (node(&net, "S"), node(&net, "T"));
    let model = net.erasures().unwrap();
    let exact = time_average_mincut(&net, s, t, model, Mode::Exact, 0, Seed(0), &MincutOptions::default()).unwrap();
    assert_eq!(exact.value, 1.0);
    let mc = time_average_mincut(&net, s, t, model, Mode::MonteCarlo, 4000, Seed(5), &MincutOptions::default()).unwrap();
    assert!((mc.value - 1.0).abs() <= 3.0 * mc.std_error.unwrap());
    let v = feasibility_time_varying(&net, net.connections().unwrap(), model, Mode::Exact, 0, Seed(0), &MincutOptions::default())
        .unwrap();
    assert!(v.feasible);
}

#[test]
fn diamond_fixture_static_solution() {
    let net = fixture("diamond.json");
    let patterns: Vec<_> = net.erasures().unwrap().patterns(&net, 1 << 16).unwrap().into_iter().map(|(p, _)| p).collect();
    assert_eq!(patterns.len(), 2);
    let set = multicast(&net, node(&net, "S"), &[node(&net, "T")]);
    let sol = static_solution(&net, &set, &patterns, 64, Seed(3), Exec::default()).unwrap();
    let again = verify_under_patterns(&net, &sol.assignment, &set, &patterns).unwrap();
    assert!(again.iter().all(|v| v.verdict.feasible));
}
