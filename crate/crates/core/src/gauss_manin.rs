//! The Gauss-Manin connection on the frame `{phi<J^1>, ..., phi<J^r>}`:
//! coefficient rows `v_J`, the rank-one residue matrices `M_J(alpha)` and
//! the connection coefficients `Psi_ij(alpha; x)`.
//!
//! Conventions: a cohomology class `phi = w . Phi` is stored as its
//! coefficient row `w`, and the connection acts on it from the right,
//! `w -> w Psi_ij`. The Gauss-Manin vector of a function is a column and
//! satisfies `dS/dx_ij = Psi_ij S`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::index::{in_j_circ, IndexSet, Shape};
use crate::intersection::{inverse_cpq, matrix_c, pairing_scaled, LabeledMatrix};
use crate::linalg::{dot, Matrix};
use crate::minors::{d2log_minor, dlog_minor, XMatrix};
use crate::params::ParamVector;
use crate::scalar::Scalar;

/// A vector aligned to the frame.
#[derive(Clone, Debug, PartialEq)]
pub struct GMVector<T> {
    labels: Vec<IndexSet>,
    entries: Vec<T>,
}

impl<T: Scalar> GMVector<T> {
    pub fn new(shape: Shape, entries: Vec<T>) -> Result<Self> {
        let labels = shape.basis().frame.clone();
        if labels.len() != entries.len() {
            return Err(Error::Internal(format!(
                "vector of length {} for a frame of rank {}",
                entries.len(),
                labels.len()
            )));
        }
        Ok(Self { labels, entries })
    }

    pub fn zeros(shape: Shape) -> Self {
        let labels = shape.basis().frame.clone();
        let entries = vec![T::zero(); labels.len()];
        Self { labels, entries }
    }

    pub fn labels(&self) -> &[IndexSet] {
        &self.labels
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The entry labelled by `j`.
    pub fn entry(&self, j: &IndexSet) -> Option<&T> {
        self.labels.binary_search(j).ok().map(|p| &self.entries[p])
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            labels: self.labels.clone(),
            entries: self.entries.iter().map(|v| v.clone() * s.clone()).collect(),
        }
    }

    /// `m * self` as a column vector.
    pub fn left_mul(&self, m: &LabeledMatrix<T>) -> Result<Self> {
        if m.col_labels != self.labels || m.row_labels != self.labels {
            return Err(Error::LabelMismatch);
        }
        Ok(Self {
            labels: self.labels.clone(),
            entries: m.matrix.mul_vec(&self.entries),
        })
    }

    /// `self * m` as a row vector.
    pub fn right_mul(&self, m: &LabeledMatrix<T>) -> Result<Self> {
        if m.col_labels != self.labels || m.row_labels != self.labels {
            return Err(Error::LabelMismatch);
        }
        Ok(Self {
            labels: self.labels.clone(),
            entries: m.matrix.vec_mul(&self.entries),
        })
    }
}

/// x-independent data of the connection for one `alpha`, with the matrices
/// `M_J` memoized.
#[derive(Debug)]
pub struct Connection<T> {
    alpha: ParamVector,
    dual: ParamVector,
    c: LabeledMatrix<T>,
    c_inv: LabeledMatrix<T>,
    c_dual_inv: LabeledMatrix<T>,
    residues: HashMap<IndexSet, Matrix<T>>,
}

impl<T: Scalar> Connection<T> {
    pub fn new(alpha: &ParamVector) -> Result<Self> {
        alpha.require_nonzero()?;
        let last = alpha.shape().last();
        let dual = alpha.negated();
        Ok(Self {
            c: matrix_c(alpha)?,
            c_inv: inverse_cpq(alpha, 0, last, 0, last)?,
            c_dual_inv: inverse_cpq(&dual, 0, last, 0, last)?,
            alpha: alpha.clone(),
            dual,
            residues: HashMap::new(),
        })
    }

    pub fn alpha(&self) -> &ParamVector {
        &self.alpha
    }

    pub fn shape(&self) -> Shape {
        self.alpha.shape()
    }

    pub fn frame(&self) -> &[IndexSet] {
        &self.c.row_labels
    }

    /// The scaled intersection matrix of the frame.
    pub fn c(&self) -> &LabeledMatrix<T> {
        &self.c
    }

    /// Row of pairings `(I(phi<J>, phi<J^l>))_l` under parameters `alpha`.
    fn pairing_row(alpha: &ParamVector, frame: &[IndexSet], j: &IndexSet) -> Result<Vec<T>> {
        frame.iter().map(|f| pairing_scaled(alpha, j, f)).collect()
    }

    /// Coefficients of `phi<J>` in the frame.
    pub fn v_j(&self, j: &IndexSet) -> Result<Vec<T>> {
        let row = Self::pairing_row(&self.alpha, self.frame(), j)?;
        Ok(self.c_inv.matrix.vec_mul(&row))
    }

    /// `v_J` under the dual parameters `-alpha`.
    pub fn v_j_dual(&self, j: &IndexSet) -> Result<Vec<T>> {
        let row = Self::pairing_row(&self.dual, self.frame(), j)?;
        Ok(self.c_dual_inv.matrix.vec_mul(&row))
    }

    /// `M_J = (prod_{p in J} alpha_p) C tr(v_J^dual) v_J`.
    pub fn m_j(&mut self, j: &IndexSet) -> Result<&Matrix<T>> {
        if !self.residues.contains_key(j) {
            let m = self.build_m_j(j)?;
            self.residues.insert(j.clone(), m);
        }
        Ok(&self.residues[j])
    }

    fn build_m_j(&self, j: &IndexSet) -> Result<Matrix<T>> {
        let v = self.v_j(j)?;
        let v_dual = self.v_j_dual(j)?;
        let scale = j
            .elements()
            .iter()
            .fold(T::one(), |acc, &p| acc * self.alpha.scalar(p));
        let col: Vec<T> = self
            .c
            .matrix
            .mul_vec(&v_dual)
            .into_iter()
            .map(|w| w * scale.clone())
            .collect();
        Ok(Matrix::from_fn(col.len(), v.len(), |a, b| {
            col[a].clone() * v[b].clone()
        }))
    }

    /// The `dx_ij` coefficient `Psi_ij(alpha; x)`.
    pub fn psi(&mut self, x: &XMatrix<T>, i: usize, j: usize) -> Result<LabeledMatrix<T>> {
        self.sum_residues(x, i, j, |x, set| dlog_minor(x, set, i, j))
    }

    /// `d Psi_ij / dx_{i'j'}`, from exact second logarithmic derivatives of
    /// the minors.
    pub fn psi_derivative(
        &mut self,
        x: &XMatrix<T>,
        (i, j): (usize, usize),
        (ip, jp): (usize, usize),
    ) -> Result<LabeledMatrix<T>> {
        self.sum_residues(x, i, j, |x, set| d2log_minor(x, set, (i, j), (ip, jp)))
    }

    fn sum_residues(
        &mut self,
        x: &XMatrix<T>,
        i: usize,
        j: usize,
        weight: impl Fn(&XMatrix<T>, &IndexSet) -> Result<T>,
    ) -> Result<LabeledMatrix<T>> {
        let shape = self.shape();
        check_position(shape, i, j)?;
        let r = shape.rank();
        let mut acc = Matrix::zeros(r, r);
        let circ = shape.basis().circ.clone();
        for set in circ.iter().filter(|s| s.contains(shape.k() + j)) {
            let w = weight(x, set)?;
            if w.is_zero() {
                continue;
            }
            acc = acc.add(&self.m_j(set)?.scale(&w));
        }
        let frame = self.frame().to_vec();
        Ok(LabeledMatrix::new(frame.clone(), frame, acc))
    }

    /// The connection applied to the class with coefficient row `phi`,
    /// written without a frame: the sum over `J` of
    /// `alpha_J I(phi, phi<J>) / I(phi<J>, phi<J>) phi<J> dlog|x~<J>|`.
    pub fn apply_frame_free(
        &self,
        x: &XMatrix<T>,
        phi: &[T],
        i: usize,
        j: usize,
    ) -> Result<Vec<T>> {
        let shape = self.shape();
        check_position(shape, i, j)?;
        let frame = self.frame();
        let mut out = vec![T::zero(); frame.len()];
        for set in shape.basis().circ.iter().filter(|s| s.contains(shape.k() + j)) {
            let dlog = dlog_minor(x, set, i, j)?;
            if dlog.is_zero() {
                continue;
            }
            let self_pairing: T = pairing_scaled(&self.alpha, set, set)?;
            if self_pairing.is_zero() {
                return Err(Error::ZeroAlphaJ(set.clone()));
            }
            let column = Self::pairing_row(&self.alpha, frame, set)?;
            let coeff = T::from_i64(self.alpha.alpha_j(set)) * dot(phi, &column) / self_pairing
                * dlog;
            if coeff.is_zero() {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.v_j(set)?) {
                *o = o.clone() + coeff.clone() * v;
            }
        }
        Ok(out)
    }
}

fn check_position(shape: Shape, i: usize, j: usize) -> Result<()> {
    if i == 0 || i > shape.k() {
        return Err(Error::IndexOutOfRange {
            index: i,
            lo: 1,
            hi: shape.k(),
        });
    }
    if j == 0 || j > shape.n() {
        return Err(Error::IndexOutOfRange {
            index: j,
            lo: 1,
            hi: shape.n(),
        });
    }
    Ok(())
}

/// Coefficient row of `phi<J>` in the frame.
pub fn v_j<T: Scalar>(alpha: &ParamVector, j: &IndexSet) -> Result<Vec<T>> {
    Connection::new(alpha)?.v_j(j)
}

/// The residue matrix `M_J(alpha)`.
pub fn m_j<T: Scalar>(alpha: &ParamVector, j: &IndexSet) -> Result<LabeledMatrix<T>> {
    let mut conn = Connection::new(alpha)?;
    let m = conn.m_j(j)?.clone();
    let frame = conn.frame().to_vec();
    Ok(LabeledMatrix::new(frame.clone(), frame, m))
}

/// `Psi_ij(alpha; x)`.
pub fn psi_coefficient<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    i: usize,
    j: usize,
) -> Result<LabeledMatrix<T>> {
    Connection::new(alpha)?.psi(x, i, j)
}

/// Frame-free connection action on a coefficient row.
pub fn apply_connection_frame_free<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    phi: &GMVector<T>,
    i: usize,
    j: usize,
) -> Result<GMVector<T>> {
    let out = Connection::new(alpha)?.apply_frame_free(x, phi.entries(), i, j)?;
    GMVector::new(alpha.shape(), out)
}

/// Whether `J` contributes a logarithmic term to the connection.
pub fn contributes(shape: Shape, j: &IndexSet) -> bool {
    in_j_circ(shape, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::enumerate_j_dot;
    use crate::scalar::{rat, Rat};

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    fn alpha22() -> ParamVector {
        ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap()
    }

    #[test]
    fn frame_vectors_are_unit_rows() {
        let a = alpha22();
        let frame = enumerate_j_dot(a.shape());
        for (p, j) in frame.iter().enumerate() {
            let v: Vec<Rat> = v_j(&a, j).unwrap();
            for (q, e) in v.iter().enumerate() {
                assert_eq!(*e, if p == q { rat(1, 1) } else { rat(0, 1) });
            }
        }
    }

    #[test]
    fn v_j_reproduces_pairings() {
        let a = alpha22();
        let conn: Connection<Rat> = Connection::new(&a).unwrap();
        let j = set(&[1, 3, 5]);
        let jp = set(&[2, 3, 4]);
        let lhs = dot(&conn.c().matrix.vec_mul(&conn.v_j(&j).unwrap()), &conn.v_j_dual(&jp).unwrap());
        let rhs: Rat = pairing_scaled(&a, &j, &jp).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn residue_trace_and_eigenrow() {
        let a = alpha22();
        let mut conn: Connection<Rat> = Connection::new(&a).unwrap();
        let j = set(&[0, 3, 4]);
        let v = conn.v_j(&j).unwrap();
        let m = conn.m_j(&j).unwrap().clone();
        assert_eq!(m.trace(), rat(a.alpha_j(&j), 1));
        let vm = m.vec_mul(&v);
        let expected: Vec<Rat> = v.iter().map(|e| e.clone() * rat(a.alpha_j(&j), 1)).collect();
        assert_eq!(vm, expected);
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let a = alpha22();
        let x = XMatrix::new(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(1, 7)]]).unwrap();
        let phi = GMVector::<Rat>::zeros(a.shape());
        let out = apply_connection_frame_free(&a, &x, &phi, 1, 2).unwrap();
        assert!(out.entries().iter().all(|v| *v == rat(0, 1)));
    }

    #[test]
    fn out_of_range_position() {
        let a = alpha22();
        let x = XMatrix::new(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(1, 7)]]).unwrap();
        assert!(psi_coefficient(&a, &x, 3, 1).is_err());
        assert!(psi_coefficient(&a, &x, 1, 0).is_err());
    }
}
