//! The extended matrix `x~ = (1 0 1 1; 0 I x 1)` and its maximal minors.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::index::{IndexSet, IndexTuple, Shape};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// The `k x n` variable matrix. Indices in the public API are 1-based, as
/// in `x_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct XMatrix<T> {
    shape: Shape,
    entries: Matrix<T>,
}

impl<T: Scalar> XMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        let shape = Shape::new(k, n)?;
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidShape { k, n });
        }
        Ok(Self {
            shape,
            entries: Matrix::from_rows(rows),
        })
    }

    pub fn from_matrix(entries: Matrix<T>) -> Result<Self> {
        let shape = Shape::new(entries.rows(), entries.cols())?;
        Ok(Self { shape, entries })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// `x_{ij}` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[(i - 1, j - 1)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.entries[(i - 1, j - 1)] = v;
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> XMatrix<U> {
        XMatrix {
            shape: self.shape,
            entries: self.entries.map(f),
        }
    }

    /// All `(i, j)` pairs, row-major, 1-based.
    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> {
        let (k, n) = (self.shape.k(), self.shape.n());
        (1..=k).flat_map(move |i| (1..=n).map(move |j| (i, j)))
    }
}

/// Builds the `(k+1) x (k+n+2)` extended matrix.
pub fn build_xtilde<T: Scalar>(x: &XMatrix<T>) -> Matrix<T> {
    let s = x.shape();
    let (k, n) = (s.k(), s.n());
    Matrix::from_fn(k + 1, s.width(), |row, col| {
        if col == s.last() {
            T::one()
        } else if col <= k {
            if row == col {
                T::one()
            } else {
                T::zero()
            }
        } else if row == 0 {
            T::one()
        } else {
            debug_assert!(col - k <= n);
            x.get(row, col - k).clone()
        }
    })
}

/// Column `col` of the extended matrix, without materializing it.
fn xtilde_entry<T: Scalar>(x: &XMatrix<T>, row: usize, col: usize) -> T {
    let s = x.shape();
    let k = s.k();
    if col == s.last() {
        T::one()
    } else if col <= k {
        if row == col {
            T::one()
        } else {
            T::zero()
        }
    } else if row == 0 {
        T::one()
    } else {
        x.get(row, col - k).clone()
    }
}

/// The square sub-matrix on `cols` (in the given order) with `skip_rows`
/// and `skip_cols` (positions into `cols`) removed.
fn submatrix<T: Scalar>(
    x: &XMatrix<T>,
    cols: &[usize],
    skip_rows: &[usize],
    skip_cols: &[usize],
) -> Matrix<T> {
    let rows: Vec<usize> = (0..=x.shape().k()).filter(|r| !skip_rows.contains(r)).collect();
    let cols: Vec<usize> = cols
        .iter()
        .enumerate()
        .filter(|(p, _)| !skip_cols.contains(p))
        .map(|(_, &c)| c)
        .collect();
    Matrix::from_fn(rows.len(), cols.len(), |a, b| xtilde_entry(x, rows[a], cols[b]))
}

/// `|x~<J>|` with columns in ascending order.
pub fn minor<T: Scalar>(x: &XMatrix<T>, j: &IndexSet) -> T {
    submatrix(x, j.elements(), &[], &[]).det()
}

/// The determinant with columns in tuple order.
pub fn minor_tuple<T: Scalar>(x: &XMatrix<T>, t: &IndexTuple) -> T {
    let (set, sign) = t.sort_with_sign();
    sign.apply(minor(x, &set))
}

/// `d|x~<J>| / dx_{ij}`: the signed cofactor at row `i`, column `k+j`.
pub fn minor_partial<T: Scalar>(x: &XMatrix<T>, j_set: &IndexSet, i: usize, j: usize) -> T {
    let k = x.shape().k();
    let Some(p) = j_set.position(k + j) else {
        return T::zero();
    };
    let c = submatrix(x, j_set.elements(), &[i], &[p]).det();
    if (i + p) % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `d^2|x~<J>| / dx_{ij} dx_{i'j'}` by second-order cofactors. Zero when the
/// two variables share a row or a column of `x~<J>`.
pub fn minor_second_partial<T: Scalar>(
    x: &XMatrix<T>,
    j_set: &IndexSet,
    (i1, j1): (usize, usize),
    (i2, j2): (usize, usize),
) -> T {
    let k = x.shape().k();
    let (Some(p1), Some(p2)) = (j_set.position(k + j1), j_set.position(k + j2)) else {
        return T::zero();
    };
    if i1 == i2 || p1 == p2 {
        return T::zero();
    }
    // Positions of the second entry after deleting the first row and column.
    let r2 = if i2 > i1 { i2 - 1 } else { i2 };
    let c2 = if p2 > p1 { p2 - 1 } else { p2 };
    let c = submatrix(x, j_set.elements(), &[i1, i2], &[p1, p2]).det();
    if (i1 + p1 + r2 + c2) % 2 == 1 {
        -c
    } else {
        c
    }
}

/// `d log|x~<J>| / dx_{ij}`; zero when column `k+j` is not in `J`.
pub fn dlog_minor<T: Scalar>(x: &XMatrix<T>, j_set: &IndexSet, i: usize, j: usize) -> Result<T> {
    if !j_set.contains(x.shape().k() + j) {
        return Ok(T::zero());
    }
    let m = minor(x, j_set);
    if m.is_zero() {
        return Err(Error::VanishingMinor(j_set.clone()));
    }
    Ok(minor_partial(x, j_set, i, j) / m)
}

/// `d^2 log|x~<J>| / dx_{ij} dx_{i'j'}` by the quotient rule on minors.
pub fn d2log_minor<T: Scalar>(
    x: &XMatrix<T>,
    j_set: &IndexSet,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<T> {
    let m = minor(x, j_set);
    if m.is_zero() {
        return Err(Error::VanishingMinor(j_set.clone()));
    }
    let da = minor_partial(x, j_set, a.0, a.1);
    let db = minor_partial(x, j_set, b.0, b.1);
    let dab = minor_second_partial(x, j_set, a, b);
    Ok(dab / m.clone() - da * db / (m.clone() * m))
}

/// All `J` whose minor vanishes; empty iff `x` lies in `X`.
pub fn check_in_x<T: Scalar>(x: &XMatrix<T>) -> Vec<IndexSet> {
    x.shape()
        .basis()
        .all
        .iter()
        .filter(|j| minor(x, j).is_zero())
        .cloned()
        .collect()
}

/// All minors of one `x`, computed once per evaluation.
#[derive(Clone, Debug)]
pub struct MinorTable<T> {
    values: HashMap<IndexSet, T>,
}

impl<T: Scalar> MinorTable<T> {
    pub fn new(x: &XMatrix<T>) -> Self {
        let values = x
            .shape()
            .basis()
            .all
            .iter()
            .map(|j| (j.clone(), minor(x, j)))
            .collect();
        Self { values }
    }

    pub fn get(&self, j: &IndexSet) -> &T {
        &self.values[j]
    }

    pub fn get_tuple(&self, t: &IndexTuple) -> T {
        let (set, sign) = t.sort_with_sign();
        sign.apply(self.values[&set].clone())
    }

    pub fn vanishing(&self) -> Vec<IndexSet> {
        let mut v: Vec<IndexSet> = self
            .values
            .iter()
            .filter(|(_, m)| m.is_zero())
            .map(|(j, _)| j.clone())
            .collect();
        v.sort();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rat};

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    fn worked_x() -> XMatrix<Rat> {
        XMatrix::new(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(1, 7)]]).unwrap()
    }

    #[test]
    fn xtilde_layout() {
        let x = XMatrix::new(vec![vec![rat(2, 3)]]).unwrap();
        let t = build_xtilde(&x);
        assert_eq!(
            t.to_rows(),
            vec![
                vec![rat(1, 1), rat(0, 1), rat(1, 1), rat(1, 1)],
                vec![rat(0, 1), rat(1, 1), rat(2, 3), rat(1, 1)]
            ]
        );
        let t = build_xtilde(&worked_x());
        assert_eq!(t.cols(), 6);
        assert_eq!(t.row(0), &[rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1), rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn minor_examples() {
        let x = worked_x();
        assert_eq!(minor(&x, &set(&[0, 1, 2])), rat(1, 1));
        let (x11, x12, x21, x22) = (rat(1, 2), rat(1, 3), rat(1, 5), rat(1, 7));
        assert_eq!(minor(&x, &set(&[0, 3, 4])), x11.clone() * x22 - x12 * x21);
        assert_eq!(minor(&x, &set(&[0, 2, 3])), -x11.clone());
        let t = IndexTuple::new(vec![0, 3, 2]).unwrap();
        assert_eq!(minor_tuple(&x, &t), x11);
    }

    #[test]
    fn dlog_examples() {
        let x = worked_x();
        assert_eq!(dlog_minor(&x, &set(&[0, 1, 2]), 1, 1).unwrap(), rat(0, 1));
        assert_eq!(dlog_minor(&x, &set(&[0, 1, 3]), 2, 1).unwrap(), rat(5, 1));
        let d = rat(1, 2) * rat(1, 7) - rat(1, 3) * rat(1, 5);
        assert_eq!(dlog_minor(&x, &set(&[0, 3, 4]), 1, 1).unwrap(), rat(1, 7) / d);
    }

    #[test]
    fn membership_in_x() {
        assert!(check_in_x(&worked_x()).is_empty());
        let x = XMatrix::new(vec![vec![rat(1, 1)]]).unwrap();
        assert_eq!(check_in_x(&x), vec![set(&[2, 3])]);
        let dup = XMatrix::new(vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 3), rat(1, 3)]]).unwrap();
        assert!(check_in_x(&dup).contains(&set(&[0, 3, 4])));
        let dlog = dlog_minor(&dup, &set(&[0, 3, 4]), 1, 1);
        assert_eq!(dlog, Err(Error::VanishingMinor(set(&[0, 3, 4]))));
    }
}
