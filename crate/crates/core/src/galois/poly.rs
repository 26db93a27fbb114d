use std::fmt;

use super::{ArithmeticError, Field, GaloisField, Gf, Ring};

/// Polynomial in `D` over GF(q), lowest degree first.
///
/// Always canonical: no trailing zero coefficients, so the zero polynomial
/// has an empty coefficient list and equality is structural.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Gf>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Gf::ONE)
    }

    pub fn constant(c: Gf) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * D^k`.
    pub fn monomial(c: Gf, k: usize) -> Self {
        let mut coeffs = vec![Gf::ZERO; k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Gf>) -> Self {
        while coeffs.last() == Some(&Gf::ZERO) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Gf] {
        &self.coeffs
    }

    /// Coefficient of `D^k`; zero past the degree.
    pub fn coeff(&self, k: usize) -> Gf {
        self.coeffs.get(k).copied().unwrap_or(Gf::ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Gf {
        self.coeffs.last().copied().unwrap_or(Gf::ZERO)
    }

    /// Reduction modulo `D^order`.
    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(order).copied().collect())
    }

    /// Multiplication by `D^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Gf::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial { coeffs }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.0 == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (k, c.0) {
                (0, v) => write!(f, "{v}")?,
                (1, 1) => write!(f, "D")?,
                (1, v) => write!(f, "{v}*D")?,
                (k, 1) => write!(f, "D^{k}")?,
                (k, v) => write!(f, "{v}*D^{k}")?,
            }
        }
        Ok(())
    }
}

/// The ring GF(q)[D].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyRing {
    field: GaloisField,
}

impl PolyRing {
    pub fn new(field: GaloisField) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    /// Builds a polynomial from integer encodings, lowest degree first.
    pub fn from_values(&self, values: &[u32]) -> Result<Polynomial, ArithmeticError> {
        let coeffs = values.iter().map(|&v| self.field.element(v)).collect::<Result<_, _>>()?;
        Ok(Polynomial::from_coeffs(coeffs))
    }

    pub fn scale(&self, a: &Polynomial, c: Gf) -> Polynomial {
        Polynomial::from_coeffs(a.coeffs.iter().map(|x| self.field.mul(x, &c)).collect())
    }

    /// Horner evaluation at `D = x`.
    pub fn eval(&self, a: &Polynomial, x: Gf) -> Gf {
        a.coeffs.iter().rev().fold(Gf::ZERO, |acc, c| self.field.add(&self.field.mul(&acc, &x), c))
    }

    /// Euclidean division: returns `(quotient, remainder)` with
    /// `a = quotient * b + remainder` and `deg remainder < deg b`.
    pub fn divmod(&self, a: &Polynomial, b: &Polynomial) -> Result<(Polynomial, Polynomial), ArithmeticError> {
        let db = b.degree().ok_or(ArithmeticError::DivisionByZero)?;
        let inv_lead = self.field.inv(&b.leading())?;
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return Ok((Polynomial::zero(), a.clone()));
        }
        let mut quot = vec![Gf::ZERO; rem.len() - db];
        for k in (0..quot.len()).rev() {
            let c = self.field.mul(&rem[k + db], &inv_lead);
            quot[k] = c;
            if c.0 != 0 {
                for (i, bc) in b.coeffs.iter().enumerate() {
                    rem[k + i] = self.field.sub(&rem[k + i], &self.field.mul(&c, bc));
                }
            }
        }
        rem.truncate(db);
        Ok((Polynomial::from_coeffs(quot), Polynomial::from_coeffs(rem)))
    }

    pub fn monic(&self, a: &Polynomial) -> Polynomial {
        if a.is_zero() {
            return Polynomial::zero();
        }
        let inv = self.field.inv(&a.leading()).expect("nonzero leading coefficient");
        self.scale(a, inv)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = self.divmod(&x, &y).expect("divisor is nonzero");
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    /// The power series inverse of `a` modulo `D^order`.
    pub fn series_inverse(&self, a: &Polynomial, order: usize) -> Result<Polynomial, ArithmeticError> {
        let c0 = a.coeff(0);
        if c0.0 == 0 {
            return Err(ArithmeticError::NotInvertibleSeries);
        }
        let inv0 = self.field.inv(&c0)?;
        let mut out: Vec<Gf> = Vec::with_capacity(order);
        for n in 0..order {
            if n == 0 {
                out.push(inv0);
                continue;
            }
            let mut acc = Gf::ZERO;
            for k in 1..=n.min(a.coeffs.len().saturating_sub(1)) {
                acc = self.field.add(&acc, &self.field.mul(&a.coeffs[k], &out[n - k]));
            }
            out.push(self.field.neg(&self.field.mul(&acc, &inv0)));
        }
        Ok(Polynomial::from_coeffs(out))
    }
}

impl Ring for PolyRing {
    type Elem = Polynomial;

    fn zero(&self) -> Polynomial {
        Polynomial::zero()
    }

    fn one(&self) -> Polynomial {
        Polynomial::one()
    }

    fn is_zero(&self, a: &Polynomial) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        let n = a.coeffs.len().max(b.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|k| self.field.add(&a.coeff(k), &b.coeff(k))).collect())
    }

    fn neg(&self, a: &Polynomial) -> Polynomial {
        Polynomial::from_coeffs(a.coeffs.iter().map(|c| self.field.neg(c)).collect())
    }

    fn sub(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        let n = a.coeffs.len().max(b.coeffs.len());
        Polynomial::from_coeffs((0..n).map(|k| self.field.sub(&a.coeff(k), &b.coeff(k))).collect())
    }

    fn mul(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        if a.is_zero() || b.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Gf::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.0 == 0 {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                out[i + j] = self.field.add(&out[i + j], &self.field.mul(x, y));
            }
        }
        Polynomial::from_coeffs(out)
    }

    fn of_int(&self, n: i64) -> Polynomial {
        Polynomial::constant(self.field.of_int(n))
    }
}
