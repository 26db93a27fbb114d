//! Exact arithmetic over GF(q), q = p^m, univariate polynomials over GF(q)
//! in the delay indeterminate `D`, and the rational function field GF(q)(D).
//!
//! All arithmetic is context based: a field (or ring) object owns whatever
//! tables it needs and elements are plain values. The same matrix code in
//! [`crate::linalg`] therefore serves GF(q) and GF(q)(D) alike.

mod field;
mod poly;
mod rational;

use std::fmt;

pub use field::{FieldSpec, GaloisField, Gf, MAX_ORDER};
pub use poly::{PolyRing, Polynomial};
pub use rational::{RationalField, RationalFunction};

/// Errors raised by field, polynomial and rational-function arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithmeticError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("value {value} is not an element of GF({order})")]
    NotInField { value: u32, order: u32 },
    #[error("operands live in different fields: {left} and {right}")]
    FieldMismatch { left: String, right: String },
    #[error("power series inverse needs a nonzero constant term")]
    NotInvertibleSeries,
    #[error("invalid field specification: {0}")]
    InvalidSpec(String),
}

/// A commutative ring with identity, given as a context object.
pub trait Ring: Clone + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Image of an integer under the canonical map Z -> R.
    fn of_int(&self, n: i64) -> Self::Elem {
        let mut acc = self.zero();
        let mut base = self.one();
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.add(&base, &base);
            k >>= 1;
        }
        if n < 0 {
            self.neg(&acc)
        } else {
            acc
        }
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, ArithmeticError>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, ArithmeticError> {
        Ok(self.mul(a, &self.inv(b)?))
    }
}
