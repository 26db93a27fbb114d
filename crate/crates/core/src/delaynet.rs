//! Networks with unit link delay, including cyclic ones.
//!
//! Every application of `F` costs one time step: a symbol crossing an edge
//! arrives one step later, and so does a symbol mixed through a node by `β`.
//! Injection by `α` and extraction by `ε` are instantaneous. The impulse
//! response of the port graph is then `(I - DF)^-1` and the end-to-end map is
//! `M(D) = A(D) (I - DF)^-1 B(D)^T` over GF(q)(D).

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::codecon::{build_a, build_b, Block};
use crate::galois::{
    ArithmeticError, Field, FieldSpec, GaloisField, Gf, PolyRing, Polynomial, RationalField, RationalFunction, Ring, MAX_ORDER,
};
use crate::linalg::{build_f, LinalgError, Matrix};
use crate::netmodel::{CodeAssignment, ConnectionClass, ConnectionSet, ModelError, Network, PortId};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DelayError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error("the network has no connection set")]
    MissingConnections,
    #[error("input has {got} processes per step, expected {expected}")]
    InputWidth { got: usize, expected: usize },
}

/// How to compute `(I - DF)^-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferMethod {
    /// `Σ_{k=0}^{order} D^k F^k`.
    Series(usize),
    /// Gauss-Jordan inversion over GF(q)(D).
    Exact,
}

/// Default truncation order for series diagnostics: twice the port count.
pub fn default_order(net: &Network) -> usize {
    2 * net.num_ports()
}

/// `Σ_{k=0}^{order} D^k F^k` as a polynomial matrix.
pub fn delayed_transfer_series(field: &GaloisField, f: &Matrix<Gf>, order: usize) -> Result<Matrix<Polynomial>, LinalgError> {
    let (n, cols) = f.shape();
    if n != cols {
        return Err(LinalgError::NotSquare { rows: n, cols });
    }
    let mut coeffs: Vec<Vec<Gf>> = vec![Vec::with_capacity(order + 1); n * n];
    let mut power = Matrix::identity(field, n);
    for k in 0..=order {
        for i in 0..n {
            for j in 0..n {
                coeffs[i * n + j].push(*power.get(i, j));
            }
        }
        if k < order {
            if power.is_zero(field) {
                break;
            }
            power = power.mul(field, f)?;
        }
    }
    let mut it = coeffs.into_iter();
    Ok(Matrix::from_fn(n, n, |_, _| Polynomial::from_coeffs(it.next().expect("n*n entries"))))
}

/// `(I - DF)^-1` with rational entries.
pub fn delayed_transfer_exact(field: &GaloisField, f: &Matrix<Gf>) -> Result<Matrix<RationalFunction>, LinalgError> {
    let (n, cols) = f.shape();
    if n != cols {
        return Err(LinalgError::NotSquare { rows: n, cols });
    }
    let rf = RationalField::new(field.clone());
    let i_minus_df = Matrix::from_fn(n, n, |i, j| {
        let diag = if i == j { Gf::ONE } else { Gf::ZERO };
        let d = Polynomial::from_coeffs(vec![diag, field.neg(f.get(i, j))]);
        RationalFunction::from_poly(d)
    });
    i_minus_df.inverse(&rf)
}

/// `(I - DF)^-1` by either method, with entries lifted to GF(q)(D).
pub fn delayed_transfer(
    field: &GaloisField,
    f: &Matrix<Gf>,
    method: TransferMethod,
) -> Result<Matrix<RationalFunction>, LinalgError> {
    match method {
        TransferMethod::Series(order) => {
            Ok(delayed_transfer_series(field, f, order)?.map(|p| RationalFunction::from_poly(p.clone())))
        }
        TransferMethod::Exact => delayed_transfer_exact(field, f),
    }
}

/// Smallest `k` with `F^k = 0`, if any `k <= n` works.
pub fn nilpotency_index(field: &GaloisField, f: &Matrix<Gf>) -> Option<usize> {
    let n = f.rows();
    let mut power = Matrix::identity(field, n);
    for k in 0..=n {
        if power.is_zero(field) {
            return Some(k);
        }
        power = power.mul(field, f).ok()?;
    }
    None
}

/// A code whose `α` and `ε` may be rational functions of `D`. Entries of
/// `alpha`/`epsilon` override the constants in `code`; `β` and link gains
/// always come from `code`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DelayCode {
    pub code: CodeAssignment,
    pub alpha: BTreeMap<(usize, PortId), RationalFunction>,
    pub epsilon: BTreeMap<(PortId, usize), RationalFunction>,
}

impl From<CodeAssignment> for DelayCode {
    fn from(code: CodeAssignment) -> Self {
        DelayCode { code, ..Default::default() }
    }
}

impl DelayCode {
    /// Checks overrides sit at legal positions by building `A` and `B` with
    /// a placeholder at each.
    fn check(&self, net: &Network) -> Result<(), ModelError> {
        let mut probe = self.code.clone();
        for &k in self.alpha.keys() {
            probe.alpha.insert(k, Gf::ONE);
        }
        for &k in self.epsilon.keys() {
            probe.epsilon.insert(k, Gf::ONE);
        }
        build_a(net, &probe)?;
        build_b(net, &probe)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayedSystemMatrix {
    pub m: Matrix<RationalFunction>,
    pub f: Matrix<Gf>,
    pub row_blocks: Vec<Block>,
    pub col_blocks: Vec<Block>,
    /// Nilpotency index of `F`, or `None` when the port graph carries a cycle.
    pub nilpotency: Option<usize>,
}

fn blocks(net: &Network, sources: bool) -> Vec<Block> {
    let endpoints = if sources { net.sources() } else { net.destinations() };
    let mut start = 0;
    endpoints
        .iter()
        .map(|e| {
            let b = Block { node: net.node(e.node).name.clone(), start, len: e.processes };
            start += e.processes;
            b
        })
        .collect()
}

/// Exact `M(D)`. Nilpotent `F` uses the finite power series; otherwise the
/// inverse is computed over GF(q)(D).
pub fn delayed_system_matrix(net: &Network, code: &DelayCode) -> Result<DelayedSystemMatrix, DelayError> {
    code.check(net)?;
    let field = net.field();
    let rf = RationalField::new(field.clone());
    let f = build_f(net, &code.code)?;
    let nilpotency = nilpotency_index(field, &f);
    let t = match nilpotency {
        Some(k) => delayed_transfer(field, &f, TransferMethod::Series(k.saturating_sub(1)))?,
        None => delayed_transfer_exact(field, &f)?,
    };
    let lift = |m: Matrix<Gf>| m.map(|&v| RationalFunction::constant(v));
    let mut a = lift(build_a(net, &code.code)?);
    let mut b = lift(build_b(net, &code.code)?);
    for (&(i, e), r) in &code.alpha {
        let s = net.port(e).owner;
        let row = net.source_offset(s).expect("checked source") + i;
        a.set(row, e.0, r.clone());
    }
    for (&(e, j), r) in &code.epsilon {
        let d = net.port(e).owner;
        let row = net.destination_offset(d).expect("checked destination") + j;
        b.set(row, e.0, r.clone());
    }
    let m = a.mul(&rf, &t)?.mul(&rf, &b.transpose())?;
    Ok(DelayedSystemMatrix { m, f, row_blocks: blocks(net, true), col_blocks: blocks(net, false), nilpotency })
}

/// Entrywise value at `D = x`.
pub fn evaluate(rf: &RationalField, m: &Matrix<RationalFunction>, x: Gf) -> Result<Matrix<Gf>, ArithmeticError> {
    let mut err = None;
    let out = m.map(|r| {
        rf.eval(r, x).unwrap_or_else(|e| {
            err = Some(e);
            Gf::ZERO
        })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// GF(q) viewed inside GF(q^k).
#[derive(Clone, Debug)]
pub struct Embedding {
    base: GaloisField,
    ext: GaloisField,
    /// Image of the generator of the base field over its prime field.
    root: Gf,
}

impl Embedding {
    /// Embeds `base` into the field of order `base.order()^k`. Fails when
    /// that order exceeds the supported maximum.
    pub fn new(base: &GaloisField, k: u32) -> Result<Self, ArithmeticError> {
        let spec = FieldSpec::new(base.characteristic(), base.degree() * k)?;
        let ext = GaloisField::new(spec)?;
        let modulus = &base.spec().modulus;
        let root = if base.degree() == 1 {
            Gf::ZERO
        } else {
            ext.elements()
                .find(|&x| {
                    let mut acc = Gf::ZERO;
                    for &c in modulus.iter().rev() {
                        acc = ext.add(&ext.mul(&acc, &x), &ext.from_digits(&[c]));
                    }
                    acc == Gf::ZERO
                })
                .expect("an irreducible polynomial of degree m splits in GF(p^(mk))")
        };
        Ok(Embedding { base: base.clone(), ext, root })
    }

    pub fn ext(&self) -> &GaloisField {
        &self.ext
    }

    pub fn map(&self, a: Gf) -> Gf {
        let mut acc = Gf::ZERO;
        for &c in self.base.digits(a).iter().rev() {
            acc = self.ext.add(&self.ext.mul(&acc, &self.root), &self.ext.from_digits(&[c]));
        }
        acc
    }

    fn map_poly(&self, p: &Polynomial) -> Polynomial {
        Polynomial::from_coeffs(p.coeffs().iter().map(|&c| self.map(c)).collect())
    }
}

/// Outcome of a rank test by evaluation at random points of an extension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvaluationRank {
    /// Largest rank seen; a lower bound on the rank over GF(q)(D).
    pub rank: usize,
    pub extension_order: u32,
    pub points: usize,
    /// Whether the extension reached the `2 * degree * size` margin.
    pub margin_met: bool,
}

fn max_degree(m: &Matrix<RationalFunction>) -> usize {
    let mut d = 0;
    for i in 0..m.rows() {
        for r in m.row(i) {
            d = d.max(r.numerator().degree().unwrap_or(0)).max(r.denominator().degree().unwrap_or(0));
        }
    }
    d
}

/// Rank of `m` over GF(q)(D), estimated by evaluating at up to `points`
/// random `D = d` in an extension GF(q^k) with `q^k > 2 * degree * size`
/// where supported. Stops early once full rank is seen.
pub fn rank_by_evaluation(
    field: &GaloisField,
    m: &Matrix<RationalFunction>,
    points: usize,
    seed: Seed,
) -> Result<EvaluationRank, DelayError> {
    let size = m.rows().max(m.cols());
    let margin = 2 * max_degree(m).max(1) * size.max(1);
    let q = field.order() as u64;
    let mut k = 1u32;
    while (q.pow(k + 1)) <= MAX_ORDER as u64 && q.pow(k) <= margin as u64 {
        k += 1;
    }
    let emb = Embedding::new(field, k)?;
    let ext = emb.ext();
    let ring = PolyRing::new(ext.clone());
    let mapped: Matrix<(Polynomial, Polynomial)> = m.map(|r| (emb.map_poly(r.numerator()), emb.map_poly(r.denominator())));
    let full = m.rows().min(m.cols());
    let mut rng = seed.rng();
    let mut best = 0;
    let mut used = 0;
    let mut attempts = 0;
    while used < points && best < full && attempts < 4 * points.max(1) {
        attempts += 1;
        let d = ext.random(&mut rng);
        let mut pole = false;
        let v = mapped.map(|(n, den)| {
            let dv = ring.eval(den, d);
            if dv == Gf::ZERO {
                pole = true;
                return Gf::ZERO;
            }
            ext.div(&ring.eval(n, d), &dv).expect("nonzero denominator")
        });
        if pole {
            continue;
        }
        used += 1;
        best = best.max(v.rank(ext));
    }
    Ok(EvaluationRank { rank: best, extension_order: ext.order(), points: used, margin_met: q.pow(k) > margin as u64 })
}

/// Symbolic and evaluation rank of a square matrix; nonsingular when the
/// symbolic rank is full. The evaluation result is reported alongside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Nonsingularity {
    pub size: usize,
    pub symbolic_rank: usize,
    pub evaluation: EvaluationRank,
    pub nonsingular: bool,
}

pub fn nonsingularity(field: &GaloisField, m: &Matrix<RationalFunction>, seed: Seed) -> Result<Nonsingularity, DelayError> {
    let rf = RationalField::new(field.clone());
    let symbolic_rank = m.rank(&rf);
    let points = max_degree(m) * m.rows().max(1) + 1;
    let evaluation = rank_by_evaluation(field, m, points.min(64), seed)?;
    let size = m.rows();
    Ok(Nonsingularity { size, symbolic_rank, evaluation, nonsingular: m.rows() == m.cols() && symbolic_rank == size })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DelayedReceiver {
    pub receiver: String,
    pub required: usize,
    pub rank: usize,
    pub evaluation_rank: usize,
    pub decodable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DelayedVerdict {
    pub feasible: bool,
    pub class: ConnectionClass,
    pub receivers: Vec<DelayedReceiver>,
}

/// Per-receiver solvability over GF(q)(D). A receiver decodes when some
/// rational `W` gives `M_T(D) W = E_D`; for `general` sets, undemanded rows
/// must vanish and the demanded block must be nonsingular.
pub fn verify_delayed(
    net: &Network,
    code: &DelayCode,
    conns: Option<&ConnectionSet>,
    seed: Seed,
) -> Result<DelayedVerdict, DelayError> {
    let set = conns.or(net.connections()).ok_or(DelayError::MissingConnections)?;
    let errors = set.check(net);
    if !errors.is_empty() {
        return Err(ModelError::InvalidConnections(errors.join("; ")).into());
    }
    let field = net.field();
    let rf = RationalField::new(field.clone());
    let sm = delayed_system_matrix(net, code)?;
    let m = &sm.m;
    let all_rows: Vec<usize> = (0..m.rows()).collect();
    let mut receivers = Vec::new();
    for (k, t) in set.receivers().into_iter().enumerate() {
        let offset = net.destination_offset(t).expect("checked destination");
        let nu = net.destination(t).expect("checked destination").processes;
        let cols: Vec<usize> = (offset..offset + nu).collect();
        let demanded = set.demanded_rows(net, t);
        let block = m.select(&all_rows, &cols);
        let rank = block.rank(&rf);
        let evaluation_rank = rank_by_evaluation(field, &block, 16, seed.derive(k as u64))?.rank;
        let decodable = if set.class == ConnectionClass::General {
            let others: Vec<usize> = all_rows.iter().copied().filter(|r| !demanded.contains(r)).collect();
            let sub = m.select(&demanded, &cols);
            m.select(&others, &cols).is_zero(&rf) && sub.rows() == sub.cols() && sub.rank(&rf) == sub.rows()
        } else {
            let target = Matrix::from_fn(m.rows(), demanded.len(), |i, j| {
                if demanded[j] == i {
                    RationalFunction::one()
                } else {
                    RationalFunction::zero()
                }
            });
            block.solve(&rf, &target).is_ok()
        };
        receivers.push(DelayedReceiver {
            receiver: net.node(t).name.clone(),
            required: demanded.len(),
            rank,
            evaluation_rank,
            decodable,
        });
    }
    Ok(DelayedVerdict { feasible: receivers.iter().all(|r| r.decodable), class: set.class, receivers })
}

/// Symbols over time: `x[t]` per source process, `y[t]` per port, `z[t]`
/// per destination process, for `t = 0..horizon`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TimeSeries {
    pub x: Vec<Vec<Gf>>,
    pub y: Vec<Vec<Gf>>,
    pub z: Vec<Vec<Gf>>,
}

impl TimeSeries {
    pub fn horizon(&self) -> usize {
        self.x.len()
    }
}

/// Unit-delay simulation at port level:
///
/// * `Y_t(e) = Σ_i α(i, e) X_t(S, i) + Σ_{(e', e) edge} g Y_{t-1}(e') + Σ_{e' in I(V)} β(e', e) Y_{t-1}(e')`
/// * `Z_t(T, j) = Σ_{e in I(T)} ε(e, j) Y_t(e)`
///
/// Input rows beyond `inputs.len()` are zero. Works on cyclic networks.
pub fn simulate_time(net: &Network, code: &CodeAssignment, inputs: &[Vec<Gf>], horizon: usize) -> Result<TimeSeries, DelayError> {
    code.check(net)?;
    let field = net.field();
    let mu = net.num_source_processes();
    if let Some(bad) = inputs.iter().find(|r| r.len() != mu) {
        return Err(DelayError::InputWidth { got: bad.len(), expected: mu });
    }
    let n = net.num_ports();
    let beta: Vec<(PortId, PortId, Gf)> =
        net.intra_pairs().map(|(i, o)| (i, o, code.beta(i, o))).filter(|(_, _, b)| *b != Gf::ZERO).collect();
    let mut out = TimeSeries::default();
    let mut prev = vec![Gf::ZERO; n];
    for t in 0..horizon {
        let x = inputs.get(t).cloned().unwrap_or_else(|| vec![Gf::ZERO; mu]);
        let mut y = vec![Gf::ZERO; n];
        let mut row = 0;
        for s in net.sources() {
            for i in 0..s.processes {
                for &e in &net.node(s.node).outputs {
                    y[e.0] = field.add(&y[e.0], &field.mul(&code.alpha(i, e), &x[row]));
                }
                row += 1;
            }
        }
        for e in net.edges() {
            y[e.to.0] = field.add(&y[e.to.0], &field.mul(&code.gain(*e), &prev[e.from.0]));
        }
        for &(i, o, b) in &beta {
            y[o.0] = field.add(&y[o.0], &field.mul(&b, &prev[i.0]));
        }
        let mut z = Vec::with_capacity(net.num_destination_processes());
        for d in net.destinations() {
            for j in 0..d.processes {
                let mut acc = Gf::ZERO;
                for &e in &net.node(d.node).inputs {
                    acc = field.add(&acc, &field.mul(&code.epsilon(e, j), &y[e.0]));
                }
                z.push(acc);
            }
        }
        out.x.push(x);
        out.y.push(y.clone());
        out.z.push(z);
        prev = y;
    }
    Ok(out)
}

/// Response to a unit impulse on source process `process` at `t = 0`.
pub fn impulse_response(net: &Network, code: &CodeAssignment, process: usize, horizon: usize) -> Result<TimeSeries, DelayError> {
    let mut x0 = vec![Gf::ZERO; net.num_source_processes()];
    if let Some(v) = x0.get_mut(process) {
        *v = Gf::ONE;
    }
    simulate_time(net, code, &[x0], horizon)
}

/// Random input sequence of the given length.
pub fn random_inputs<R: Rng + ?Sized>(net: &Network, horizon: usize, rng: &mut R) -> Vec<Vec<Gf>> {
    let field = net.field();
    (0..horizon).map(|_| (0..net.num_source_processes()).map(|_| field.random(rng)).collect()).collect()
}
