mod common;

use adtnet_core::codecon::system_matrix;
use adtnet_core::galois::{GaloisField, Gf, Ring};
use adtnet_core::linalg::{build_f, transfer_matrix, Matrix};
use adtnet_core::netmodel::generate::{random_network, RandomNetworkConfig};
use adtnet_core::netmodel::CodeAssignment;
use adtnet_core::rng::Seed;
use proptest::prelude::*;

fn matrix(q: u32, rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Gf>> {
    prop::collection::vec((0..q).prop_map(Gf), rows * cols).prop_map(move |v| {
        let mut it = v.into_iter();
        Matrix::from_fn(rows, cols, |_, _| it.next().unwrap())
    })
}

fn dims() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..6, 1usize..6, 1usize..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rank_of_product((a, b) in dims().prop_flat_map(|(n, k, m)| (matrix(4, n, k), matrix(4, k, m)))) {
        let f = GaloisField::of_order(4).unwrap();
        let ab = a.mul(&f, &b).unwrap();
        prop_assert!(ab.rank(&f) <= a.rank(&f).min(b.rank(&f)));
        prop_assert_eq!(a.transpose().rank(&f), a.rank(&f));
    }

    #[test]
    fn inverse_and_det(a in matrix(7, 4, 4)) {
        let f = GaloisField::of_order(7).unwrap();
        let det = a.det(&f).unwrap();
        match a.inverse(&f) {
            Ok(inv) => {
                prop_assert!(det != Gf::ZERO);
                prop_assert_eq!(a.mul(&f, &inv).unwrap(), Matrix::identity(&f, 4));
            }
            Err(_) => prop_assert_eq!(det, Gf::ZERO),
        }
    }

    #[test]
    fn solve_satisfies_system((a, x) in (1usize..6, 1usize..6).prop_flat_map(|(n, m)| (matrix(16, n, m), matrix(16, m, 2)))) {
        let f = GaloisField::of_order(16).unwrap();
        let b = a.mul(&f, &x).unwrap();
        let sol = a.solve(&f, &b).unwrap();
        prop_assert_eq!(a.mul(&f, &sol).unwrap(), b);
        let n = a.nullspace(&f);
        prop_assert!(a.mul(&f, &n).unwrap().is_zero(&f));
        prop_assert_eq!(n.cols() + a.rank(&f), a.cols());
    }

    #[test]
    fn transfer_identities(seed in any::<u64>()) {
        let field = GaloisField::of_order(16).unwrap();
        let mut rng = Seed(seed).rng();
        let net = random_network(&field, &RandomNetworkConfig::default(), &mut rng);
        let code = CodeAssignment::random(&net, &mut rng);
        let f = build_f(&net, &code).unwrap();
        let n = net.num_ports();
        let t = transfer_matrix(&field, &f).unwrap();
        let i_minus_f = Matrix::identity(&field, n).sub(&field, &f).unwrap();
        prop_assert_eq!(i_minus_f.mul(&field, &t).unwrap(), Matrix::identity(&field, n));
        prop_assert_eq!(i_minus_f.det(&field).unwrap(), field.one());
        // nilpotent: F^n = 0
        let mut p = Matrix::identity(&field, n);
        for _ in 0..n {
            p = p.mul(&field, &f).unwrap();
        }
        prop_assert!(p.is_zero(&field));
    }

    #[test]
    fn duality_with_port_propagation(seed in any::<u64>()) {
        let field = GaloisField::of_order(256).unwrap();
        let mut rng = Seed(seed).rng();
        let net = random_network(&field, &RandomNetworkConfig { max_sources: 2, max_destinations: 2, ..Default::default() }, &mut rng);
        let code = CodeAssignment::random(&net, &mut rng);
        let m = system_matrix(&net, &code).unwrap().matrix;
        let x: Vec<Gf> = (0..net.num_source_processes()).map(|_| field.random(&mut rng)).collect();
        let xm = Matrix::from_rows(vec![x.clone()]).unwrap();
        let expected = if m.rows() == 0 { vec![Gf::ZERO; m.cols()] } else { xm.mul(&field, &m).unwrap().row(0).to_vec() };
        prop_assert_eq!(common::propagate(&net, &code, &x), expected);
    }
}

#[test]
fn cyclic_f_is_rejected() {
    let field = GaloisField::of_order(2).unwrap();
    let f = Matrix::from_values(&field, vec![vec![0, 1], vec![1, 0]]).unwrap();
    assert!(transfer_matrix(&field, &f).is_err());
}
