use adtnet_core::galois::{Field, GaloisField, Gf, PolyRing, Polynomial, RationalField, Ring};
use adtnet_core::rng::Seed;
use proptest::prelude::*;

const ORDERS: [u32; 9] = [2, 3, 4, 5, 8, 9, 16, 27, 256];

fn field_and_elems(n: usize) -> impl Strategy<Value = (GaloisField, Vec<Gf>)> {
    prop::sample::select(ORDERS.to_vec())
        .prop_flat_map(move |q| (Just(GaloisField::of_order(q).unwrap()), prop::collection::vec((0..q).prop_map(Gf), n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn field_axioms((f, v) in field_and_elems(3)) {
        let (a, b, c) = (v[0], v[1], v[2]);
        prop_assert_eq!(f.add(&a, &b), f.add(&b, &a));
        prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
        prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
        prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        prop_assert_eq!(f.add(&a, &Gf::ZERO), a);
        prop_assert_eq!(f.mul(&a, &Gf::ONE), a);
        prop_assert_eq!(f.add(&a, &f.neg(&a)), Gf::ZERO);
        if a != Gf::ZERO {
            prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), Gf::ONE);
        } else {
            prop_assert!(f.inv(&a).is_err());
        }
    }

    #[test]
    fn fermat((f, v) in field_and_elems(1)) {
        prop_assert_eq!(f.pow(v[0], f.order() as u64), v[0]);
    }

    #[test]
    fn digits_round_trip((f, v) in field_and_elems(1)) {
        prop_assert_eq!(f.from_digits(&f.digits(v[0])), v[0]);
    }
}

fn poly(q: u32, max_deg: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((0..q).prop_map(Gf), 0..=max_deg + 1).prop_map(Polynomial::from_coeffs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rational_forms_are_canonical(n in poly(16, 4), d in poly(16, 4), k in poly(16, 3)) {
        let rf = RationalField::new(GaloisField::of_order(16).unwrap());
        prop_assume!(!d.is_zero() && !k.is_zero());
        let ring = rf.ring();
        let r = rf.ratio(n.clone(), d.clone()).unwrap();
        let scaled = rf.ratio(ring.mul(&n, &k), ring.mul(&d, &k)).unwrap();
        prop_assert_eq!(&r, &scaled);
        prop_assert_eq!(r.denominator().leading(), Gf::ONE);
        let g = ring.gcd(r.numerator(), r.denominator());
        prop_assert!(r.is_zero() || g.degree() == Some(0));
    }

    #[test]
    fn rational_field_ops(a in poly(9, 3), b in poly(9, 3), c in poly(9, 3)) {
        let rf = RationalField::new(GaloisField::of_order(9).unwrap());
        prop_assume!(!b.is_zero() && !c.is_zero());
        let x = rf.ratio(a.clone(), b.clone()).unwrap();
        let y = rf.ratio(b.clone(), c.clone()).unwrap();
        let xy = rf.mul(&x, &y);
        prop_assert_eq!(xy, rf.ratio(a.clone(), c.clone()).unwrap());
        if !x.is_zero() {
            prop_assert_eq!(rf.mul(&x, &rf.inv(&x).unwrap()), rf.one());
        }
        prop_assert_eq!(rf.sub(&rf.add(&x, &y), &y), x);
    }

    #[test]
    fn series_matches_division(a in poly(16, 4), b in poly(16, 4), order in 1usize..12) {
        let field = GaloisField::of_order(16).unwrap();
        let rf = RationalField::new(field.clone());
        let ring = PolyRing::new(field);
        prop_assume!(b.coeff(0) != Gf::ZERO);
        let r = rf.ratio(a, b.clone()).unwrap();
        let s = rf.expand(&r, order).unwrap();
        // s * den = num mod D^order, after normalization
        let lhs = ring.mul(&s, r.denominator()).truncate(order);
        prop_assert_eq!(lhs, r.numerator().truncate(order));
    }

    #[test]
    fn division_identity(a in poly(5, 6), b in poly(5, 3)) {
        let ring = PolyRing::new(GaloisField::of_order(5).unwrap());
        prop_assume!(!b.is_zero());
        let (qt, r) = ring.divmod(&a, &b).unwrap();
        prop_assert_eq!(ring.add(&ring.mul(&qt, &b), &r), a);
        prop_assert!(r.is_zero() || r.degree() < b.degree());
    }
}

#[test]
fn gf4_uniform_draws() {
    let f = GaloisField::of_order(4).unwrap();
    let mut rng = Seed(2024).rng();
    let mut counts = [0usize; 4];
    let n = 100_000;
    for _ in 0..n {
        counts[f.random(&mut rng).0 as usize] += 1;
    }
    for c in counts {
        let freq = c as f64 / n as f64;
        assert!((freq - 0.25).abs() <= 0.01, "{counts:?}");
    }
}

#[test]
fn gf4_omega_is_primitive_cube_root() {
    let f = GaloisField::of_order(4).unwrap();
    let w = Gf(2);
    assert_eq!(f.mul(&w, &w), Gf(3));
    assert_eq!(f.pow(w, 3), Gf::ONE);
}
