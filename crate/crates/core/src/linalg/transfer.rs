use super::{LinalgError, Matrix};
use crate::galois::{Gf, Ring};
use crate::netmodel::{topological_order, CodeAssignment, ModelError, Network};

/// The port adjacency matrix: `F[i][j]` is the link gain (default one) for
/// an edge `(e_i, e_j)`, `β(e_i, e_j)` for an intra-node input-to-output
/// pair, zero otherwise.
pub fn build_f(net: &Network, code: &CodeAssignment) -> Result<Matrix<Gf>, ModelError> {
    let field = net.field();
    for &(a, b) in code.beta.keys() {
        if a.0 >= net.num_ports() || b.0 >= net.num_ports() || !net.same_node(a, b) {
            return Err(ModelError::InvalidAssignment(format!("beta ({a},{b}) crosses nodes")));
        }
    }
    for e in code.link_gains.keys() {
        if !net.has_edge(*e) {
            return Err(ModelError::UnknownEdge(*e));
        }
    }
    let n = net.num_ports();
    let mut f = Matrix::zeros(field, n, n);
    for e in net.edges() {
        let v = field.add(f.get(e.from.0, e.to.0), &code.gain(*e));
        f.set(e.from.0, e.to.0, v);
    }
    for (i, o) in net.intra_pairs() {
        f.set(i.0, o.0, code.beta(i, o));
    }
    Ok(f)
}

/// `(I - F)^-1` for nilpotent `F`.
///
/// Rows are filled by back-substitution in reverse topological order of the
/// nonzero pattern, using `T_i = e_i + Σ_j F_ij T_j`. If the pattern has a
/// cycle, falls back to the power sum and checks `F^n = 0`.
pub fn transfer_matrix<R: Ring>(ring: &R, f: &Matrix<R::Elem>) -> Result<Matrix<R::Elem>, LinalgError> {
    let (n, cols) = f.shape();
    if n != cols {
        return Err(LinalgError::NotSquare { rows: n, cols });
    }
    let succ: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| !ring.is_zero(f.get(i, j))).collect()).collect();
    match topological_order(&succ) {
        Ok(order) => {
            let mut t = Matrix::identity(ring, n);
            for &i in order.iter().rev() {
                for &j in &succ[i] {
                    let fij = f.get(i, j).clone();
                    for k in 0..n {
                        let tjk = t.get(j, k);
                        if ring.is_zero(tjk) {
                            continue;
                        }
                        let v = ring.add(t.get(i, k), &ring.mul(&fij, tjk));
                        t.set(i, k, v);
                    }
                }
            }
            Ok(t)
        }
        Err(cycle) => {
            let mut sum = Matrix::identity(ring, n);
            let mut power = f.clone();
            for _ in 0..n {
                if power.is_zero(ring) {
                    return Ok(sum);
                }
                sum = sum.add(ring, &power)?;
                power = power.mul(ring, f)?;
            }
            if power.is_zero(ring) {
                Ok(sum)
            } else {
                Err(LinalgError::NotNilpotent { cycle: cycle.into_iter().map(|p| p + 1).collect() })
            }
        }
    }
}
