//! Intersection numbers between the logarithmic forms `phi<J>` and the
//! matrices built from them.
//!
//! Every pairing here is the intersection number with the common factor
//! `(2 pi i)^k` removed. All downstream formulas are homogeneous in that
//! factor (each matrix is paired with an inverse), so exact rational
//! arithmetic suffices.

use crate::error::{Error, Result};
use crate::index::{aligned_0ji, aligned_ij0, enumerate_pjq, IndexSet, Sign};
use crate::linalg::Matrix;
use crate::params::ParamVector;
use crate::scalar::Scalar;

/// A matrix whose rows and columns are labelled by ordered index-set lists.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix<T> {
    pub row_labels: Vec<IndexSet>,
    pub col_labels: Vec<IndexSet>,
    pub matrix: Matrix<T>,
}

impl<T: Scalar> LabeledMatrix<T> {
    pub fn new(row_labels: Vec<IndexSet>, col_labels: Vec<IndexSet>, matrix: Matrix<T>) -> Self {
        assert_eq!(row_labels.len(), matrix.rows());
        assert_eq!(col_labels.len(), matrix.cols());
        Self {
            row_labels,
            col_labels,
            matrix,
        }
    }

    pub fn identity(labels: Vec<IndexSet>) -> Self {
        let n = labels.len();
        Self::new(labels.clone(), labels, Matrix::identity(n))
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.matrix[(i, j)]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.col_labels != other.row_labels {
            return Err(Error::LabelMismatch);
        }
        Ok(Self::new(
            self.row_labels.clone(),
            other.col_labels.clone(),
            self.matrix.mul(&other.matrix),
        ))
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.col_labels.clone(),
            self.row_labels.clone(),
            self.matrix.transpose(),
        )
    }

    /// Inverse by exact elimination.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self::new(
            self.col_labels.clone(),
            self.row_labels.clone(),
            self.matrix.inverse()?,
        ))
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(
            self.row_labels.clone(),
            self.col_labels.clone(),
            self.matrix.scale(s),
        )
    }

    /// Whether all off-diagonal entries vanish.
    pub fn is_diagonal(&self) -> bool {
        let m = &self.matrix;
        (0..m.rows()).all(|i| (0..m.cols()).all(|j| i == j || m[(i, j)].is_zero()))
    }

    /// Columns picked by label in the order of `labels`, each multiplied by
    /// the matching sign.
    pub fn select_cols(&self, labels: &[IndexSet], signs: &[Sign]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| self.col_labels.iter().position(|c| c == l).ok_or(Error::LabelMismatch))
            .collect::<Result<Vec<_>>>()?;
        let m = Matrix::from_fn(self.matrix.rows(), labels.len(), |i, j| {
            signs[j].apply(self.matrix[(i, idx[j])].clone())
        });
        Ok(Self::new(self.row_labels.clone(), labels.to_vec(), m))
    }

    /// Rows picked by label in the order of `labels`, each multiplied by the
    /// matching sign.
    pub fn select_rows(&self, labels: &[IndexSet], signs: &[Sign]) -> Result<Self> {
        Ok(self.transpose().select_cols(labels, signs)?.transpose())
    }
}

/// The scaled intersection number `I(phi<J>, phi<J'>) / (2 pi i)^k`.
pub fn pairing_scaled<T: Scalar>(alpha: &ParamVector, j: &IndexSet, jp: &IndexSet) -> Result<T> {
    let k = alpha.shape().k();
    if j == jp {
        alpha.require_nonzero_on(j.elements())?;
        let den = product(alpha, j.elements().iter().copied());
        return Ok(T::from_i64(alpha.alpha_j(j)) / den);
    }
    if j.intersection_len(jp) != k {
        return Ok(T::zero());
    }
    // J - {j_p} = J' - {j'_q}
    let p = j.elements().iter().position(|v| !jp.contains(*v)).expect("J differs from J'");
    let q = jp.elements().iter().position(|v| !j.contains(*v)).expect("J' differs from J");
    let common: Vec<usize> = j.elements().iter().copied().filter(|v| jp.contains(*v)).collect();
    alpha.require_nonzero_on(&common)?;
    let den = product(alpha, common.into_iter());
    Ok(Sign::from_parity((p + q) % 2 == 1).apply(T::one() / den))
}

fn product<T: Scalar>(alpha: &ParamVector, idx: impl Iterator<Item = usize>) -> T {
    idx.fold(T::one(), |acc, i| acc * alpha.scalar(i))
}

/// `(I(phi<I>, phi<J>))` for the given row and column labels.
pub fn pairing_matrix<T: Scalar>(
    alpha: &ParamVector,
    rows: &[IndexSet],
    cols: &[IndexSet],
) -> Result<LabeledMatrix<T>> {
    let mut m = Matrix::zeros(rows.len(), cols.len());
    for (a, i) in rows.iter().enumerate() {
        for (b, j) in cols.iter().enumerate() {
            m[(a, b)] = pairing_scaled(alpha, i, j)?;
        }
    }
    Ok(LabeledMatrix::new(rows.to_vec(), cols.to_vec(), m))
}

/// `C_{(p1 q1)(p2 q2)}`: rows are the sets containing `p1` and not `q1`,
/// columns the sets containing `p2` and not `q2`, both ordered by the
/// shared `k`-subset.
pub fn matrix_cpq<T: Scalar>(
    alpha: &ParamVector,
    p1: usize,
    q1: usize,
    p2: usize,
    q2: usize,
) -> Result<LabeledMatrix<T>> {
    alpha.require_nonzero()?;
    let shape = alpha.shape();
    let rows = enumerate_pjq(p1, q1, shape)?;
    let cols = enumerate_pjq(p2, q2, shape)?;
    pairing_matrix(alpha, &rows, &cols)
}

/// The intersection matrix `C(alpha)` of the frame.
pub fn matrix_c<T: Scalar>(alpha: &ParamVector) -> Result<LabeledMatrix<T>> {
    let last = alpha.shape().last();
    matrix_cpq(alpha, 0, last, 0, last)
}

/// `P_i(alpha)`: rows are the aligned sets containing `i` and not 0 (sign
/// corrected), columns the frame.
pub fn matrix_p<T: Scalar>(alpha: &ParamVector, i: usize) -> Result<LabeledMatrix<T>> {
    alpha.require_nonzero()?;
    let shape = alpha.shape();
    let rows = aligned_0ji(i, shape)?;
    let base: LabeledMatrix<T> = pairing_matrix(alpha, &rows.sets, &shape.basis().frame)?;
    signed_rows(base, &rows.signs)
}

/// `Q_i(alpha)`: rows are the aligned sets containing 0 and not `i` (sign
/// corrected), columns the frame.
pub fn matrix_q<T: Scalar>(alpha: &ParamVector, i: usize) -> Result<LabeledMatrix<T>> {
    alpha.require_nonzero()?;
    let shape = alpha.shape();
    let rows = aligned_ij0(i, shape)?;
    let base: LabeledMatrix<T> = pairing_matrix(alpha, &rows.sets, &shape.basis().frame)?;
    signed_rows(base, &rows.signs)
}

fn signed_rows<T: Scalar>(mut m: LabeledMatrix<T>, signs: &[Sign]) -> Result<LabeledMatrix<T>> {
    for (r, s) in signs.iter().enumerate() {
        if *s == Sign::Minus {
            for c in 0..m.matrix.cols() {
                m.matrix[(r, c)] = -m.matrix[(r, c)].clone();
            }
        }
    }
    Ok(m)
}

/// Inverse of [`matrix_cpq`] as `C_{(q2p2)(p2q2)}^{-1} C_{(q2p2)(q1p1)}
/// C_{(p1q1)(q1p1)}^{-1}`, where both outer factors are diagonal.
pub fn inverse_cpq<T: Scalar>(
    alpha: &ParamVector,
    p1: usize,
    q1: usize,
    p2: usize,
    q2: usize,
) -> Result<LabeledMatrix<T>> {
    let left = matrix_cpq::<T>(alpha, q2, p2, p2, q2)?;
    let middle = matrix_cpq::<T>(alpha, q2, p2, q1, p1)?;
    let right = matrix_cpq::<T>(alpha, p1, q1, q1, p1)?;
    if !left.is_diagonal() || !right.is_diagonal() {
        return Err(Error::Internal(
            "matched-alignment intersection matrix is not diagonal".into(),
        ));
    }
    // Rows of the result carry the column labels of `left`, columns carry the
    // row labels of `right`.
    let mut m = middle.matrix.clone();
    for a in 0..m.rows() {
        for b in 0..m.cols() {
            if m[(a, b)].is_zero() {
                continue;
            }
            m[(a, b)] = m[(a, b)].clone() / left.matrix[(a, a)].clone() / right.matrix[(b, b)].clone();
        }
    }
    Ok(LabeledMatrix::new(left.col_labels, right.row_labels, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Shape;
    use crate::scalar::{rat, Rat};

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    fn k1n1() -> ParamVector {
        ParamVector::new(Shape::new(1, 1).unwrap(), vec![-2, -1, 1, 2]).unwrap()
    }

    #[test]
    fn diagonal_pairing() {
        let a = ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap();
        let v: Rat = pairing_scaled(&a, &set(&[0, 1, 2]), &set(&[0, 1, 2])).unwrap();
        assert_eq!(v, rat(4, 9));
        let z: Rat = pairing_scaled(&a, &set(&[0, 1, 2]), &set(&[0, 3, 4])).unwrap();
        assert_eq!(z, rat(0, 1));
    }

    #[test]
    fn matched_pairing_is_signed_reciprocal() {
        // J = {p, j1..jk} with p smallest, J' = {j1..jk, q} with q largest.
        let a = ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap();
        let v: Rat = pairing_scaled(&a, &set(&[0, 2, 3]), &set(&[2, 3, 5])).unwrap();
        // p = 0, q = 2, so (-1)^k with k = 2.
        assert_eq!(v, rat(1, 1) / (rat(-3, 1) * rat(3, 1)));
    }

    #[test]
    fn small_c_matrix() {
        let c: LabeledMatrix<Rat> = matrix_c(&k1n1()).unwrap();
        assert_eq!(c.row_labels, vec![set(&[0, 1]), set(&[0, 2])]);
        assert_eq!(c.matrix[(0, 0)], rat(-3, 2));
        assert_eq!(c.matrix[(1, 1)], rat(1, 2));
        assert_eq!(c.matrix[(0, 1)], rat(-1, 2));
        assert_eq!(c.matrix[(1, 0)], rat(-1, 2));
        let inv: LabeledMatrix<Rat> = inverse_cpq(&k1n1(), 0, 3, 0, 3).unwrap();
        // 2x2 adjugate inverse.
        let det = rat(-3, 2) * rat(1, 2) - rat(1, 4);
        assert_eq!(inv.matrix[(0, 0)], rat(1, 2) / det.clone());
        assert_eq!(inv.matrix[(0, 1)], rat(1, 2) / det.clone());
        assert_eq!(inv.matrix[(1, 1)], rat(-3, 2) / det);
    }

    #[test]
    fn q_rows_carry_alignment_signs() {
        let q: LabeledMatrix<Rat> = matrix_q(&k1n1(), 1).unwrap();
        assert_eq!(q.row_labels, vec![set(&[0, 3]), set(&[0, 2])]);
        let plain: Rat = pairing_scaled(&k1n1(), &set(&[0, 3]), &set(&[0, 1])).unwrap();
        assert_eq!(q.matrix[(0, 0)], plain);
        let p: LabeledMatrix<Rat> = matrix_p(&k1n1(), 1).unwrap();
        assert!(p.row_labels.iter().all(|l| l.contains(1) && !l.contains(0)));
    }

    #[test]
    fn zero_parameter_is_rejected() {
        let a = ParamVector::new(Shape::new(1, 1).unwrap(), vec![-1, 0, -1, 2]).unwrap();
        assert_eq!(matrix_c::<Rat>(&a), Err(Error::ZeroParameter(1)));
        assert_eq!(
            pairing_scaled::<Rat>(&a, &set(&[0, 1]), &set(&[0, 1])),
            Err(Error::ZeroParameter(1))
        );
    }

    #[test]
    fn mismatched_labels_do_not_multiply() {
        let c: LabeledMatrix<Rat> = matrix_c(&k1n1()).unwrap();
        let q: LabeledMatrix<Rat> = matrix_q(&k1n1(), 1).unwrap();
        assert_eq!(c.mul(&q), Err(Error::LabelMismatch));
        assert!(q.mul(&c).is_ok());
    }
}
