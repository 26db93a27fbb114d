use std::fmt;

use super::{ArithmeticError, Field, GaloisField, Gf, PolyRing, Polynomial, Ring};

/// A rational function `num / den` in canonical form: coprime, with a monic
/// denominator. Zero is `0 / 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn zero() -> Self {
        RationalFunction { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    pub fn constant(c: Gf) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den == Polynomial::one()
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

/// Serialized as its display string, e.g. `"(D^3)/(1 + D^2)"`.
impl serde::Serialize for RationalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The field GF(q)(D).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalField {
    ring: PolyRing,
}

impl RationalField {
    pub fn new(field: GaloisField) -> Self {
        RationalField { ring: PolyRing::new(field) }
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &GaloisField {
        self.ring.field()
    }

    /// Builds and normalizes `num / den`.
    pub fn ratio(&self, num: Polynomial, den: Polynomial) -> Result<RationalFunction, ArithmeticError> {
        if den.is_zero() {
            return Err(ArithmeticError::DivisionByZero);
        }
        Ok(self.normalize(num, den))
    }

    fn normalize(&self, num: Polynomial, den: Polynomial) -> RationalFunction {
        if num.is_zero() {
            return RationalFunction::zero();
        }
        let g = self.ring.gcd(&num, &den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            let (n, _) = self.ring.divmod(&num, &g).expect("gcd is nonzero");
            let (d, _) = self.ring.divmod(&den, &g).expect("gcd is nonzero");
            (n, d)
        };
        let lead_inv = self.field().inv(&den.leading()).expect("denominator is nonzero");
        RationalFunction { num: self.ring.scale(&num, lead_inv), den: self.ring.scale(&den, lead_inv) }
    }

    /// Value at `D = x`; fails when the denominator vanishes there.
    pub fn eval(&self, r: &RationalFunction, x: Gf) -> Result<Gf, ArithmeticError> {
        let d = self.ring.eval(&r.den, x);
        self.field().div(&self.ring.eval(&r.num, x), &d)
    }

    /// Power series expansion modulo `D^order`.
    pub fn expand(&self, r: &RationalFunction, order: usize) -> Result<Polynomial, ArithmeticError> {
        let inv = self.ring.series_inverse(&r.den, order)?;
        Ok(self.ring.mul(&r.num, &inv).truncate(order))
    }
}

impl Ring for RationalField {
    type Elem = RationalFunction;

    fn zero(&self) -> RationalFunction {
        RationalFunction::zero()
    }

    fn one(&self) -> RationalFunction {
        RationalFunction::one()
    }

    fn is_zero(&self, a: &RationalFunction) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.den == b.den {
            return self.normalize(self.ring.add(&a.num, &b.num), a.den.clone());
        }
        let num = self.ring.add(&self.ring.mul(&a.num, &b.den), &self.ring.mul(&b.num, &a.den));
        self.normalize(num, self.ring.mul(&a.den, &b.den))
    }

    fn neg(&self, a: &RationalFunction) -> RationalFunction {
        RationalFunction { num: self.ring.neg(&a.num), den: a.den.clone() }
    }

    fn mul(&self, a: &RationalFunction, b: &RationalFunction) -> RationalFunction {
        if a.is_zero() || b.is_zero() {
            return RationalFunction::zero();
        }
        if a.is_polynomial() && b.is_polynomial() {
            return RationalFunction::from_poly(self.ring.mul(&a.num, &b.num));
        }
        self.normalize(self.ring.mul(&a.num, &b.num), self.ring.mul(&a.den, &b.den))
    }

    fn of_int(&self, n: i64) -> RationalFunction {
        RationalFunction::constant(self.field().of_int(n))
    }
}

impl Field for RationalField {
    fn inv(&self, a: &RationalFunction) -> Result<RationalFunction, ArithmeticError> {
        if a.is_zero() {
            return Err(ArithmeticError::DivisionByZero);
        }
        Ok(self.normalize(a.den.clone(), a.num.clone()))
    }
}
