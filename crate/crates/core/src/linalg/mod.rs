//! Dense matrices over any [`Field`] from [`crate::galois`].
//!
//! Elimination uses a fixed pivot rule (first nonzero entry scanning down the
//! current column), so identical inputs always give identical echelon forms.

mod transfer;

use std::fmt;

use crate::galois::{ArithmeticError, Field, GaloisField, Gf, Ring};

pub use transfer::{build_f, transfer_matrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular (rank {rank} of {size})")]
    Singular { rank: usize, size: usize },
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("rows have different lengths")]
    Ragged,
    #[error("adjacency matrix is not nilpotent (port cycle {cycle:?}); cyclic networks need the delay model")]
    NotNilpotent { cycle: Vec<usize> },
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Clone> Matrix<E> {
    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Matrix { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row vectors. An empty list gives a 0x0 matrix.
    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Ragged);
        }
        let n = rows.len();
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &E {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: E) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn map<T>(&self, f: impl FnMut(&E) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Submatrix on the given row and column indices, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch { op: "hstack", left: self.shape(), right: other.shape() });
        }
        Ok(Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch { op: "vstack", left: self.shape(), right: other.shape() });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }
}

impl<E: Clone + PartialEq> Matrix<E> {
    pub fn zeros<R: Ring<Elem = E>>(ring: &R, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, ring.zero())
    }

    pub fn identity<R: Ring<Elem = E>>(ring: &R, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ring.one() } else { ring.zero() })
    }

    pub fn is_zero<R: Ring<Elem = E>>(&self, ring: &R) -> bool {
        self.data.iter().all(|x| ring.is_zero(x))
    }

    pub fn mul<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch { op: "mul", left: self.shape(), right: other.shape() });
        }
        let mut out = Self::zeros(ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if ring.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if ring.is_zero(b) {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.data[idx] = ring.add(&out.data[idx], &ring.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    pub fn add<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, LinalgError> {
        self.zip(ring, other, "add", |r, a, b| r.add(a, b))
    }

    pub fn sub<R: Ring<Elem = E>>(&self, ring: &R, other: &Self) -> Result<Self, LinalgError> {
        self.zip(ring, other, "sub", |r, a, b| r.sub(a, b))
    }

    pub fn scale<R: Ring<Elem = E>>(&self, ring: &R, c: &E) -> Self {
        self.map(|x| ring.mul(x, c))
    }

    fn zip<R: Ring<Elem = E>>(
        &self,
        ring: &R,
        other: &Self,
        op: &'static str,
        f: impl Fn(&R, &E, &E) -> E,
    ) -> Result<Self, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch { op, left: self.shape(), right: other.shape() });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(ring, a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref<F: Field<Elem = E>>(&self, field: &F) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.eliminate(field, true, self.cols).1;
        (m, pivots)
    }

    /// In-place elimination over the first `limit` columns. With `reduce`,
    /// produces reduced row echelon form; otherwise row echelon form with
    /// unnormalized pivots. Returns the row swap parity and pivot columns.
    fn eliminate<F: Field<Elem = E>>(&mut self, field: &F, reduce: bool, limit: usize) -> (bool, Vec<usize>) {
        let mut pivots = Vec::new();
        let mut odd = false;
        let mut r = 0;
        for c in 0..limit.min(self.cols) {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !field.is_zero(self.get(i, c))) else {
                continue;
            };
            if p != r {
                self.swap_rows(p, r);
                odd = !odd;
            }
            if reduce {
                let inv = field.inv(self.get(r, c)).expect("pivot is nonzero");
                for j in c..self.cols {
                    let v = field.mul(self.get(r, j), &inv);
                    self.set(r, j, v);
                }
            }
            let pivot = self.get(r, c).clone();
            let start = if reduce { 0 } else { r + 1 };
            for i in start..self.rows {
                if i == r || field.is_zero(self.get(i, c)) {
                    continue;
                }
                let factor =
                    if reduce { self.get(i, c).clone() } else { field.div(self.get(i, c), &pivot).expect("pivot is nonzero") };
                for j in c..self.cols {
                    let v = field.sub(self.get(i, j), &field.mul(&factor, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (odd, pivots)
    }

    pub fn rank<F: Field<Elem = E>>(&self, field: &F) -> usize {
        let mut m = self.clone();
        m.eliminate(field, false, self.cols).1.len()
    }

    pub fn det<F: Field<Elem = E>>(&self, field: &F) -> Result<E, LinalgError> {
        self.require_square()?;
        let mut m = self.clone();
        let (odd, pivots) = m.eliminate(field, false, self.cols);
        if pivots.len() < self.rows {
            return Ok(field.zero());
        }
        let mut d = field.one();
        for i in 0..self.rows {
            d = field.mul(&d, m.get(i, i));
        }
        Ok(if odd { field.neg(&d) } else { d })
    }

    pub fn inverse<F: Field<Elem = E>>(&self, field: &F) -> Result<Self, LinalgError> {
        self.require_square()?;
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(field, n))?;
        let pivots = aug.eliminate(field, true, n).1;
        if pivots.len() < n {
            return Err(LinalgError::Singular { rank: pivots.len(), size: n });
        }
        Ok(aug.select(&(0..n).collect::<Vec<_>>(), &(n..2 * n).collect::<Vec<_>>()))
    }

    /// A solution `X` of `self * X = rhs`, free variables set to zero.
    pub fn solve<F: Field<Elem = E>>(&self, field: &F, rhs: &Self) -> Result<Self, LinalgError> {
        if rhs.rows != self.rows {
            return Err(LinalgError::DimensionMismatch { op: "solve", left: self.shape(), right: rhs.shape() });
        }
        let n = self.cols;
        let mut aug = self.hstack(rhs)?;
        let pivots = aug.eliminate(field, true, aug.cols);
        let pivots = pivots.1;
        if pivots.iter().any(|&c| c >= n) {
            return Err(LinalgError::Inconsistent);
        }
        let mut x = Self::zeros(field, n, rhs.cols);
        for (r, &c) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x.set(c, j, aug.get(r, n + j).clone());
            }
        }
        Ok(x)
    }

    /// A solution `X` of `X * self = rhs`.
    pub fn solve_left<F: Field<Elem = E>>(&self, field: &F, rhs: &Self) -> Result<Self, LinalgError> {
        Ok(self.transpose().solve(field, &rhs.transpose())?.transpose())
    }

    /// Basis of the right null space `{x : self * x = 0}` as columns.
    pub fn nullspace<F: Field<Elem = E>>(&self, field: &F) -> Self {
        let (r, pivots) = self.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zeros(field, self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            basis.set(f, k, field.one());
            for (row, &pc) in pivots.iter().enumerate() {
                basis.set(pc, k, field.neg(r.get(row, f)));
            }
        }
        basis
    }

    fn require_square(&self) -> Result<(), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }
}

impl Matrix<Gf> {
    /// Builds a matrix from integer encodings, checking field membership.
    pub fn from_values(field: &GaloisField, rows: Vec<Vec<u32>>) -> Result<Self, LinalgError> {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| field.element(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }

    pub fn random<R: rand::Rng + ?Sized>(field: &GaloisField, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| field.random(rng))
    }
}

/// Serialized as an array of rows.
impl<E: serde::Serialize> serde::Serialize for Matrix<E> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(&self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        seq.end()
    }
}

/// Row-major text: entries separated by single spaces, one row per line.
impl<E: fmt::Display> fmt::Display for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            if i > 0 {
                writeln!(f)?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        Ok(())
    }
}
