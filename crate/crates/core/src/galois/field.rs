use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ArithmeticError, Field, Ring};

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Fixed moduli for GF(2^m), written as bit masks including the leading term.
/// Index is m; entries 0 and 1 are unused.
const BINARY_MODULI: [u32; 17] =
    [0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B];

/// An element of GF(q), encoded as the integer sum of `c_i * p^i` over its
/// coefficient vector with respect to the field's modulus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gf(pub u32);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Characteristic, extension degree and modulus of a finite field.
///
/// The modulus is stored lowest coefficient first and is monic of degree `m`.
/// For prime fields it is always `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec")]
pub struct FieldSpec {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

#[derive(Deserialize)]
struct RawFieldSpec {
    p: u32,
    #[serde(default = "one")]
    m: u32,
    #[serde(default)]
    modulus: Option<Vec<u32>>,
}

fn one() -> u32 {
    1
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = ArithmeticError;

    fn try_from(raw: RawFieldSpec) -> Result<Self, Self::Error> {
        match raw.modulus {
            Some(modulus) if raw.m > 1 => FieldSpec::with_modulus(raw.p, raw.m, modulus),
            _ => FieldSpec::new(raw.p, raw.m),
        }
    }
}

impl FieldSpec {
    /// GF(p) for a prime `p`.
    pub fn prime(p: u32) -> Result<Self, ArithmeticError> {
        Self::new(p, 1)
    }

    /// GF(2^m) with the fixed modulus for `m`.
    pub fn binary(m: u32) -> Result<Self, ArithmeticError> {
        Self::new(2, m)
    }

    /// GF(p^m) with the default modulus: the fixed table for p = 2, otherwise
    /// the lexicographically first monic irreducible polynomial of degree m.
    pub fn new(p: u32, m: u32) -> Result<Self, ArithmeticError> {
        check_order(p, m)?;
        if m == 1 {
            return Ok(FieldSpec { p, m, modulus: vec![0, 1] });
        }
        let modulus = if p == 2 { bits_to_coeffs(BINARY_MODULI[m as usize], m) } else { first_irreducible(p, m) };
        Self::with_modulus(p, m, modulus)
    }

    pub fn with_modulus(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self, ArithmeticError> {
        check_order(p, m)?;
        if m == 1 {
            return Ok(FieldSpec { p, m, modulus: vec![0, 1] });
        }
        if modulus.len() != m as usize + 1 {
            return Err(ArithmeticError::InvalidSpec(format!("modulus must have {} coefficients, got {}", m + 1, modulus.len())));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(ArithmeticError::InvalidSpec("modulus coefficient not reduced mod p".into()));
        }
        if modulus[m as usize] != 1 {
            return Err(ArithmeticError::InvalidSpec("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(ArithmeticError::InvalidSpec(format!("modulus {modulus:?} is reducible over GF({p})")));
        }
        Ok(FieldSpec { p, m, modulus })
    }

    /// The field of the given order, if `order` is a supported prime power.
    pub fn from_order(order: u32) -> Result<Self, ArithmeticError> {
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(ArithmeticError::InvalidSpec(format!("unsupported field order {order}")));
        }
        let p = smallest_factor(order);
        let mut m = 0;
        let mut rest = order;
        while rest.is_multiple_of(p) {
            rest /= p;
            m += 1;
        }
        if rest != 1 {
            return Err(ArithmeticError::InvalidSpec(format!("{order} is not a prime power")));
        }
        Self::new(p, m)
    }

    pub fn order(&self) -> u32 {
        self.p.pow(self.m)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.m)
        }
    }
}

fn check_order(p: u32, m: u32) -> Result<(), ArithmeticError> {
    if p < 2 || smallest_factor(p) != p {
        return Err(ArithmeticError::InvalidSpec(format!("characteristic {p} is not prime")));
    }
    if m == 0 {
        return Err(ArithmeticError::InvalidSpec("extension degree must be positive".into()));
    }
    match p.checked_pow(m) {
        Some(q) if q <= MAX_ORDER => Ok(()),
        _ => Err(ArithmeticError::InvalidSpec(format!("GF({p}^{m}) exceeds the supported order {MAX_ORDER}"))),
    }
}

fn smallest_factor(n: u32) -> u32 {
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 1;
    }
    n
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn bits_to_coeffs(bits: u32, m: u32) -> Vec<u32> {
    (0..=m).map(|i| (bits >> i) & 1).collect()
}

// Dense polynomial helpers over Z_p, lowest coefficient first. Only used to
// validate moduli and to build the log tables.

fn zp_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn zp_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let mut r = zp_trim(a.to_vec());
    let b = zp_trim(b.to_vec());
    let db = b.len() - 1;
    let inv_lead = zp_inv(b[db], p) as u64;
    while r.len() > db {
        let shift = r.len() - 1 - db;
        let factor = (*r.last().unwrap() as u64 * inv_lead) % p64;
        for (i, &c) in b.iter().enumerate() {
            let sub = (factor * c as u64) % p64;
            let slot = &mut r[shift + i];
            *slot = ((*slot as u64 + p64 - sub) % p64) as u32;
        }
        r = zp_trim(r);
    }
    r
}

fn zp_inv(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

/// Trial division by every monic polynomial of degree 1..=m/2.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let m = modulus.len() - 1;
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for k in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut rest = k;
            for _ in 0..d {
                divisor.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            divisor.push(1);
            if zp_rem(modulus, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn first_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    for k in 0..count {
        let mut cand = Vec::with_capacity(m as usize + 1);
        let mut rest = k;
        for _ in 0..m {
            cand.push((rest % p as u64) as u32);
            rest /= p as u64;
        }
        cand.push(1);
        if cand[0] != 0 && is_irreducible(&cand, p) {
            return cand;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[derive(Debug)]
enum Repr {
    Prime,
    Binary { log: Vec<u32>, exp: Vec<u32> },
    Extension { log: Vec<u32>, exp: Vec<u32> },
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    q: u32,
    repr: Repr,
}

/// The finite field GF(q) described by a [`FieldSpec`]. Cheap to clone.
#[derive(Clone)]
pub struct GaloisField {
    inner: Arc<Inner>,
}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaloisField({})", self.inner.spec)
    }
}

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Eq for GaloisField {}

impl GaloisField {
    pub fn new(spec: FieldSpec) -> Result<Self, ArithmeticError> {
        // Re-validate: a FieldSpec can be built field by field.
        let spec = if spec.m == 1 { FieldSpec::prime(spec.p)? } else { FieldSpec::with_modulus(spec.p, spec.m, spec.modulus)? };
        let q = spec.order();
        let repr = if spec.m == 1 {
            Repr::Prime
        } else {
            let (log, exp) = build_tables(&spec);
            if spec.p == 2 {
                Repr::Binary { log, exp }
            } else {
                Repr::Extension { log, exp }
            }
        };
        Ok(GaloisField { inner: Arc::new(Inner { spec, q, repr }) })
    }

    /// Shorthand for `GaloisField::new(FieldSpec::from_order(q)?)`.
    pub fn of_order(q: u32) -> Result<Self, ArithmeticError> {
        Self::new(FieldSpec::from_order(q)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.inner.spec
    }

    pub fn order(&self) -> u32 {
        self.inner.q
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.spec.m
    }

    /// Checked conversion from the integer encoding.
    pub fn element(&self, value: u32) -> Result<Gf, ArithmeticError> {
        if value < self.inner.q {
            Ok(Gf(value))
        } else {
            Err(ArithmeticError::NotInField { value, order: self.inner.q })
        }
    }

    pub fn ensure_same(&self, other: &GaloisField) -> Result<(), ArithmeticError> {
        if self == other {
            Ok(())
        } else {
            Err(ArithmeticError::FieldMismatch { left: self.inner.spec.to_string(), right: other.inner.spec.to_string() })
        }
    }

    /// Coefficient vector (length m) of an element.
    pub fn digits(&self, a: Gf) -> Vec<u32> {
        let p = self.inner.spec.p;
        let mut v = a.0;
        (0..self.inner.spec.m)
            .map(|_| {
                let d = v % p;
                v /= p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Gf {
        let p = self.inner.spec.p;
        Gf(digits.iter().rev().fold(0, |acc, &d| acc * p + d % p))
    }

    pub fn pow(&self, a: Gf, mut e: u64) -> Gf {
        let mut base = a;
        let mut acc = Gf::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Uniform element.
    pub fn random<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Gf {
        Gf(rng.gen_range(0..self.inner.q))
    }

    /// Uniform nonzero element.
    pub fn random_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Gf {
        Gf(rng.gen_range(1..self.inner.q))
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        (0..self.inner.q).map(Gf)
    }

    fn add_digitwise(&self, a: u32, b: u32, negate_b: bool) -> u32 {
        let p = self.inner.spec.p;
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.inner.spec.m {
            let (da, db) = (a % p, b % p);
            let db = if negate_b { (p - db) % p } else { db };
            out += ((da + db) % p) * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }
}

impl Ring for GaloisField {
    type Elem = Gf;

    fn zero(&self) -> Gf {
        Gf::ZERO
    }

    fn one(&self) -> Gf {
        Gf::ONE
    }

    fn is_zero(&self, a: &Gf) -> bool {
        a.0 == 0
    }

    fn add(&self, a: &Gf, b: &Gf) -> Gf {
        match &self.inner.repr {
            Repr::Binary { .. } => Gf(a.0 ^ b.0),
            Repr::Prime => {
                let p = self.inner.spec.p;
                Gf(((a.0 as u64 + b.0 as u64) % p as u64) as u32)
            }
            Repr::Extension { .. } => Gf(self.add_digitwise(a.0, b.0, false)),
        }
    }

    fn neg(&self, a: &Gf) -> Gf {
        match &self.inner.repr {
            Repr::Binary { .. } => *a,
            Repr::Prime => Gf((self.inner.spec.p - a.0) % self.inner.spec.p),
            Repr::Extension { .. } => Gf(self.add_digitwise(0, a.0, true)),
        }
    }

    fn sub(&self, a: &Gf, b: &Gf) -> Gf {
        match &self.inner.repr {
            Repr::Binary { .. } => Gf(a.0 ^ b.0),
            Repr::Prime => {
                let p = self.inner.spec.p as u64;
                Gf(((a.0 as u64 + p - b.0 as u64) % p) as u32)
            }
            Repr::Extension { .. } => Gf(self.add_digitwise(a.0, b.0, true)),
        }
    }

    fn mul(&self, a: &Gf, b: &Gf) -> Gf {
        match &self.inner.repr {
            Repr::Prime => Gf(((a.0 as u64 * b.0 as u64) % self.inner.spec.p as u64) as u32),
            Repr::Binary { log, exp } | Repr::Extension { log, exp } => {
                if a.0 == 0 || b.0 == 0 {
                    Gf::ZERO
                } else {
                    Gf(exp[(log[a.0 as usize] + log[b.0 as usize]) as usize])
                }
            }
        }
    }

    fn of_int(&self, n: i64) -> Gf {
        Gf(n.rem_euclid(self.inner.spec.p as i64) as u32)
    }
}

impl Field for GaloisField {
    fn inv(&self, a: &Gf) -> Result<Gf, ArithmeticError> {
        if a.0 == 0 {
            return Err(ArithmeticError::DivisionByZero);
        }
        Ok(match &self.inner.repr {
            Repr::Prime => Gf(zp_inv(a.0, self.inner.spec.p)),
            Repr::Binary { log, exp } | Repr::Extension { log, exp } => Gf(exp[(self.inner.q - 1 - log[a.0 as usize]) as usize]),
        })
    }
}

/// Multiplication by polynomial arithmetic modulo the field modulus.
fn slow_mul(spec: &FieldSpec, a: u32, b: u32) -> u32 {
    if spec.p == 2 {
        let mut prod: u64 = 0;
        for i in 0..spec.m {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        let modulus: u64 = spec.modulus.iter().enumerate().map(|(i, &c)| (c as u64) << i).sum();
        for bit in (spec.m as usize..2 * spec.m as usize).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= modulus << (bit - spec.m as usize);
            }
        }
        return prod as u32;
    }
    let p = spec.p as u64;
    let m = spec.m as usize;
    let to_digits = |mut v: u32| -> Vec<u64> {
        (0..m)
            .map(|_| {
                let d = v as u64 % p;
                v /= spec.p;
                d
            })
            .collect()
    };
    let (da, db) = (to_digits(a), to_digits(b));
    let mut prod = vec![0u64; 2 * m];
    for (i, x) in da.iter().enumerate() {
        for (j, y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for k in (m..2 * m).rev() {
        let c = prod[k];
        if c != 0 {
            for (i, &mc) in spec.modulus.iter().enumerate() {
                let slot = &mut prod[k - m + i];
                *slot = (*slot + p * p - c * mc as u64) % p;
            }
        }
    }
    prod[..m].iter().rev().fold(0u64, |acc, &d| acc * p + d) as u32
}

fn slow_pow(spec: &FieldSpec, a: u32, mut e: u64) -> u32 {
    let mut base = a;
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = slow_mul(spec, acc, base);
        }
        base = slow_mul(spec, base, base);
        e >>= 1;
    }
    acc
}

fn build_tables(spec: &FieldSpec) -> (Vec<u32>, Vec<u32>) {
    let q = spec.order();
    let group = (q - 1) as u64;
    let factors = prime_factors(q - 1);
    let generator = (2..q)
        .find(|&g| factors.iter().all(|&r| slow_pow(spec, g, group / r as u64) != 1))
        .expect("the multiplicative group of a finite field is cyclic");
    let mut exp = vec![0u32; 2 * (q as usize - 1)];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for i in 0..(q - 1) as usize {
        exp[i] = x;
        exp[i + q as usize - 1] = x;
        log[x as usize] = i as u32;
        x = slow_mul(spec, x, generator);
    }
    (log, exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf2_one_plus_one_is_zero() {
        let f = GaloisField::new(FieldSpec::prime(2).unwrap()).unwrap();
        assert_eq!(f.add(&Gf(1), &Gf(1)), Gf(0));
    }

    #[test]
    fn gf4_omega_squared() {
        // omega = x encoded as 2; x^2 = x + 1 mod x^2 + x + 1 -> encoding 3
        let f = GaloisField::new(FieldSpec::binary(2).unwrap()).unwrap();
        assert_eq!(f.spec().modulus, vec![1, 1, 1]);
        assert_eq!(f.mul(&Gf(2), &Gf(2)), Gf(3));
    }

    #[test]
    fn gf5_inverse_of_three() {
        let f = GaloisField::of_order(5).unwrap();
        let brute = (1..5).find(|y| (3 * y) % 5 == 1).unwrap();
        assert_eq!(brute, 2);
        assert_eq!(f.inv(&Gf(3)).unwrap(), Gf(2));
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = GaloisField::of_order(16).unwrap();
        assert_eq!(f.inv(&Gf(0)), Err(ArithmeticError::DivisionByZero));
        assert!(f.div(&Gf(3), &Gf(0)).is_err());
    }

    #[test]
    fn all_binary_moduli_are_irreducible() {
        for m in 2..=16 {
            let spec = FieldSpec::binary(m).unwrap();
            assert!(is_irreducible(&spec.modulus, 2), "m = {m}");
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert!(FieldSpec::with_modulus(2, 2, vec![1, 0, 1]).is_err());
        assert!(FieldSpec::prime(15).is_err());
        assert!(FieldSpec::new(2, 17).is_err());
        assert!(FieldSpec::from_order(12).is_err());
    }

    #[test]
    fn odd_extension_field_is_a_field() {
        let f = GaloisField::of_order(9).unwrap();
        for a in f.elements().skip(1) {
            let inv = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &inv), Gf::ONE);
            assert_eq!(f.pow(a, 8), Gf::ONE);
            assert_eq!(f.add(&a, &f.neg(&a)), Gf::ZERO);
        }
    }

    #[test]
    fn tables_agree_with_polynomial_multiplication() {
        for q in [4u32, 8, 27, 256, 625] {
            let f = GaloisField::of_order(q).unwrap();
            for a in (0..q).step_by(7) {
                for b in (0..q).step_by(5) {
                    assert_eq!(f.mul(&Gf(a), &Gf(b)), Gf(slow_mul(f.spec(), a, b)));
                }
            }
        }
    }

    #[test]
    fn element_range_checked() {
        let f = GaloisField::of_order(7).unwrap();
        assert!(f.element(6).is_ok());
        assert_eq!(f.element(7), Err(ArithmeticError::NotInField { value: 7, order: 7 }));
        let g = GaloisField::of_order(8).unwrap();
        assert!(matches!(f.ensure_same(&g), Err(ArithmeticError::FieldMismatch { .. })));
    }

    #[test]
    fn spec_json_defaults_modulus() {
        let spec: FieldSpec = serde_json::from_str(r#"{"p": 2, "m": 8}"#).unwrap();
        assert_eq!(spec, FieldSpec::binary(8).unwrap());
        let bad: Result<FieldSpec, _> = serde_json::from_str(r#"{"p": 2, "m": 2, "modulus": [1, 0, 1]}"#);
        assert!(bad.is_err());
    }
}
