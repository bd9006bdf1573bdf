//! Exact ground truth: the polynomial series `S(alpha; x)`, its partial
//! derivatives and Gauss-Manin vector, and brute-force enumeration of
//! contingency tables.

use crate::error::{Error, Result};
use crate::gauss_manin::GMVector;
use crate::index::IndexSet;
use crate::minors::{minor, minor_partial, XMatrix};
use crate::params::ParamVector;
use crate::scalar::{factorial, Scalar};

/// A `k x n` matrix of nonnegative exponents, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    k: usize,
    n: usize,
    m: Vec<u64>,
}

impl MultiIndex {
    pub fn new(rows: Vec<Vec<u64>>) -> Self {
        let k = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n), "ragged multi-index");
        Self {
            k,
            n,
            m: rows.concat(),
        }
    }

    /// `m_ij`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.m[(i - 1) * self.n + (j - 1)]
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        (1..=self.n).map(|j| self.get(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (1..=self.k).map(|i| self.get(i, j)).sum()
    }

    pub fn total(&self) -> u64 {
        self.m.iter().sum()
    }

    /// The arguments of the factorials in `Gamma_m(alpha)` (each shifted down
    /// by one from the gamma arguments). `None` when one of them is negative,
    /// i.e. the term vanishes.
    fn factorial_args(&self, alpha: &ParamVector) -> Option<Vec<u64>> {
        let (k, n) = (self.k, self.n);
        let mut args = Vec::with_capacity(k + n + 1 + self.m.len());
        for i in 1..=k {
            args.push(-alpha.get(i) - self.row_sum(i) as i64);
        }
        for j in 1..=n {
            args.push(alpha.get(k + j) - self.col_sum(j) as i64);
        }
        let lower: i64 = (1..=k).map(|i| alpha.get(i)).sum::<i64>() + alpha.get(k + n + 1);
        args.push(lower + self.total() as i64);
        args.extend(self.m.iter().map(|&v| v as i64));
        args.into_iter().map(|a| u64::try_from(a).ok()).collect()
    }

    /// Whether the term of `m` in `S(alpha; x)` is nonzero.
    pub fn within_support(&self, alpha: &ParamVector) -> bool {
        self.factorial_args(alpha).is_some()
    }

    /// `1 / Gamma_m(alpha)`, zero outside the support.
    pub fn inverse_gamma<T: Scalar>(&self, alpha: &ParamVector) -> T {
        match self.factorial_args(alpha) {
            Some(args) => T::one() / args.into_iter().fold(T::one(), |acc, a| acc * factorial::<T>(a)),
            None => T::zero(),
        }
    }
}

/// The terms of `S(alpha; x)` as `(m, 1/Gamma_m)`.
#[derive(Clone, Debug)]
pub struct Series<T> {
    alpha: ParamVector,
    terms: Vec<(MultiIndex, T)>,
}

impl<T: Scalar> Series<T> {
    pub fn new(alpha: &ParamVector) -> Result<Self> {
        alpha.require_statistical()?;
        let shape = alpha.shape();
        let (k, n) = (shape.k(), shape.n());
        let row_cap: Vec<u64> = (1..=k).map(|i| (-alpha.get(i)) as u64).collect();
        let col_cap: Vec<u64> = (1..=n).map(|j| alpha.get(k + j) as u64).collect();
        let mut terms = Vec::new();
        let mut cells = vec![0u64; k * n];
        support_rec(0, k, n, &mut cells, &mut row_cap.clone(), &mut col_cap.clone(), &mut |m| {
            let mi = MultiIndex { k, n, m: m.to_vec() };
            let w: T = mi.inverse_gamma(alpha);
            if !w.is_zero() {
                terms.push((mi, w));
            }
        });
        Ok(Self {
            alpha: alpha.clone(),
            terms,
        })
    }

    pub fn terms(&self) -> &[(MultiIndex, T)] {
        &self.terms
    }

    /// `d^l S / dx_{i1 j1} ... dx_{il jl}` at `x`; each pair at most once.
    pub fn partial(&self, x: &XMatrix<T>, pairs: &[(usize, usize)]) -> Result<T> {
        let shape = self.alpha.shape();
        if x.shape() != shape {
            return Err(Error::InvalidShape {
                k: x.shape().k(),
                n: x.shape().n(),
            });
        }
        for (a, p) in pairs.iter().enumerate() {
            if pairs[..a].contains(p) {
                return Err(Error::RepeatedPair { i: p.0, j: p.1 });
            }
            if p.0 == 0 || p.0 > shape.k() || p.1 == 0 || p.1 > shape.n() {
                return Err(Error::IndexOutOfRange {
                    index: p.0.max(p.1),
                    lo: 1,
                    hi: shape.k().max(shape.n()),
                });
            }
        }
        self.derivative(x, pairs)
    }

    /// Like [`Series::partial`], but a variable may appear several times
    /// (higher derivatives in one variable).
    pub fn derivative(&self, x: &XMatrix<T>, vars: &[(usize, usize)]) -> Result<T> {
        let shape = self.alpha.shape();
        let n = shape.n();
        let mut order = vec![0u64; shape.k() * n];
        for &(i, j) in vars {
            if i == 0 || i > shape.k() || j == 0 || j > n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    lo: 1,
                    hi: shape.k().max(n),
                });
            }
            order[(i - 1) * n + (j - 1)] += 1;
        }
        let mut acc = T::zero();
        'terms: for (m, w) in &self.terms {
            let mut term = w.clone();
            for (i, j) in x.positions() {
                let e = m.get(i, j);
                let d = order[(i - 1) * n + (j - 1)];
                if e < d {
                    continue 'terms;
                }
                for f in e - d + 1..=e {
                    term = term * T::from_u64(f);
                }
                if e > d {
                    term = term * x.get(i, j).pow((e - d) as i64);
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// The Gauss-Manin vector `S-bar(alpha; x)`.
    pub fn gm_vector(&self, x: &XMatrix<T>) -> Result<GMVector<T>> {
        let shape = self.alpha.shape();
        let entries = shape
            .basis()
            .frame
            .iter()
            .map(|j| {
                let (pairs, cols) = frame_derivative(shape.k(), shape.n(), j);
                let den = cols
                    .iter()
                    .fold(T::one(), |acc, &c| acc * self.alpha.scalar(c));
                Ok(minor(x, j) / den * self.partial(x, &pairs)?)
            })
            .collect::<Result<Vec<T>>>()?;
        GMVector::new(shape, entries)
    }
}

impl<T: Scalar> Series<T> {
    /// `dS-bar/dx_ij`, by exact differentiation of both the minors and the
    /// polynomial.
    pub fn gm_vector_derivative(&self, x: &XMatrix<T>, i: usize, j: usize) -> Result<GMVector<T>> {
        let shape = self.alpha.shape();
        let entries = shape
            .basis()
            .frame
            .iter()
            .map(|set| {
                let (mut pairs, cols) = frame_derivative(shape.k(), shape.n(), set);
                let den = cols
                    .iter()
                    .fold(T::one(), |acc, &c| acc * self.alpha.scalar(c));
                let first = minor_partial(x, set, i, j) * self.derivative(x, &pairs)?;
                pairs.push((i, j));
                let second = minor(x, set) * self.derivative(x, &pairs)?;
                Ok((first + second) / den)
            })
            .collect::<Result<Vec<T>>>()?;
        GMVector::new(shape, entries)
    }
}

/// The mixed partial attached to a frame set: rows of `1..=k` missing from
/// `J` paired in ascending order with the middle columns of `J`. Also
/// returns those middle columns as indices into `alpha`.
pub fn frame_derivative(k: usize, n: usize, j: &IndexSet) -> (Vec<(usize, usize)>, Vec<usize>) {
    let rows: Vec<usize> = (1..=k).filter(|i| !j.contains(*i)).collect();
    let cols: Vec<usize> = (k + 1..=k + n).filter(|c| j.contains(*c)).collect();
    debug_assert_eq!(rows.len(), cols.len());
    let pairs = rows.iter().zip(&cols).map(|(&i, &c)| (i, c - k)).collect();
    (pairs, cols)
}

fn support_rec(
    cell: usize,
    k: usize,
    n: usize,
    cells: &mut [u64],
    row_cap: &mut [u64],
    col_cap: &mut [u64],
    emit: &mut impl FnMut(&[u64]),
) {
    if cell == k * n {
        emit(cells);
        return;
    }
    let (i, j) = (cell / n, cell % n);
    let top = row_cap[i].min(col_cap[j]);
    for v in 0..=top {
        cells[cell] = v;
        row_cap[i] -= v;
        col_cap[j] -= v;
        support_rec(cell + 1, k, n, cells, row_cap, col_cap, emit);
        row_cap[i] += v;
        col_cap[j] += v;
    }
    cells[cell] = 0;
}

/// `S(alpha; x)`.
pub fn series_s<T: Scalar>(alpha: &ParamVector, x: &XMatrix<T>) -> Result<T> {
    Series::new(alpha)?.partial(x, &[])
}

/// A mixed partial derivative of `S(alpha; x)`.
pub fn series_partial<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    pairs: &[(usize, usize)],
) -> Result<T> {
    Series::new(alpha)?.partial(x, pairs)
}

/// `S-bar(alpha; x)`.
pub fn gm_vector_s<T: Scalar>(alpha: &ParamVector, x: &XMatrix<T>) -> Result<GMVector<T>> {
    Series::new(alpha)?.gm_vector(x)
}

/// A contingency table, row-major.
pub type Table = Vec<Vec<u64>>;

fn check_margins(rows: &[i64], cols: &[i64]) -> Result<bool> {
    let (a, b): (i64, i64) = (rows.iter().sum(), cols.iter().sum());
    if a != b {
        return Err(Error::MarginMismatch { rows: a, cols: b });
    }
    Ok(rows.iter().chain(cols).all(|&v| v >= 0))
}

/// Calls `f` once for every nonnegative integer table with the given
/// margins, in row-major lexicographic order.
pub fn for_each_table(rows: &[i64], cols: &[i64], mut f: impl FnMut(&Table)) -> Result<()> {
    if !check_margins(rows, cols)? || rows.is_empty() || cols.is_empty() {
        return Ok(());
    }
    let mut row_rem: Vec<u64> = rows.iter().map(|&v| v as u64).collect();
    let mut col_rem: Vec<u64> = cols.iter().map(|&v| v as u64).collect();
    let mut table = vec![vec![0u64; cols.len()]; rows.len()];
    table_rec(0, 0, &mut table, &mut row_rem, &mut col_rem, &mut f);
    Ok(())
}

fn table_rec(
    i: usize,
    j: usize,
    table: &mut Table,
    row_rem: &mut [u64],
    col_rem: &mut [u64],
    f: &mut impl FnMut(&Table),
) {
    let (r1, r2) = (row_rem.len(), col_rem.len());
    if i == r1 {
        f(table);
        return;
    }
    if i == r1 - 1 {
        // The last row is forced by the column remainders.
        if col_rem.iter().sum::<u64>() == row_rem[i] {
            table[i].copy_from_slice(col_rem);
            f(table);
            table[i].iter_mut().for_each(|v| *v = 0);
        }
        return;
    }
    if j == r2 - 1 {
        let v = row_rem[i];
        if v > col_rem[j] {
            return;
        }
        table[i][j] = v;
        col_rem[j] -= v;
        row_rem[i] = 0;
        table_rec(i + 1, 0, table, row_rem, col_rem, f);
        row_rem[i] = v;
        col_rem[j] += v;
        table[i][j] = 0;
        return;
    }
    let later: u64 = col_rem[j + 1..].iter().sum();
    let lo = row_rem[i].saturating_sub(later);
    let hi = row_rem[i].min(col_rem[j]);
    for v in lo..=hi {
        table[i][j] = v;
        row_rem[i] -= v;
        col_rem[j] -= v;
        table_rec(i, j + 1, table, row_rem, col_rem, f);
        row_rem[i] += v;
        col_rem[j] += v;
    }
    table[i][j] = 0;
}

/// All tables with the given margins. Empty when any margin is negative.
pub fn enumerate_tables(rows: &[i64], cols: &[i64]) -> Result<Vec<Table>> {
    let mut out = Vec::new();
    for_each_table(rows, cols, |t| out.push(t.clone()))?;
    Ok(out)
}

fn check_p<T>(rows: &[i64], cols: &[i64], p: &[Vec<T>]) -> Result<()> {
    if p.len() != rows.len() || p.iter().any(|r| r.len() != cols.len()) {
        return Err(Error::ProbabilityShape {
            rows: p.len(),
            cols: p.first().map_or(0, Vec::len),
            expected_rows: rows.len(),
            expected_cols: cols.len(),
        });
    }
    Ok(())
}

fn table_weight<T: Scalar>(t: &Table, p: &[Vec<T>]) -> T {
    let mut w = T::one();
    for (row, prow) in t.iter().zip(p) {
        for (&u, pv) in row.iter().zip(prow) {
            if u > 0 {
                w = w * pv.pow(u as i64) / factorial::<T>(u);
            }
        }
    }
    w
}

/// `Z(beta; p) = sum_u p^u / u!` by enumeration.
pub fn oracle_z<T: Scalar>(rows: &[i64], cols: &[i64], p: &[Vec<T>]) -> Result<T> {
    check_p(rows, cols, p)?;
    let mut z = T::zero();
    for_each_table(rows, cols, |t| z = z.clone() + table_weight(t, p))?;
    Ok(z)
}

/// `E[U_ij]` under the conditional distribution, by enumeration.
pub fn oracle_e<T: Scalar>(rows: &[i64], cols: &[i64], p: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    check_p(rows, cols, p)?;
    let mut z = T::zero();
    let mut acc = vec![vec![T::zero(); cols.len()]; rows.len()];
    for_each_table(rows, cols, |t| {
        let w = table_weight(t, p);
        for (arow, trow) in acc.iter_mut().zip(t) {
            for (a, &u) in arow.iter_mut().zip(trow) {
                if u > 0 {
                    *a = a.clone() + w.clone() * T::from_u64(u);
                }
            }
        }
        z = z.clone() + w;
    })?;
    if z.is_zero() {
        return Err(Error::EmptyFiber);
    }
    Ok(acc
        .into_iter()
        .map(|r| r.into_iter().map(|v| v / z.clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Shape;
    use crate::scalar::{rat, Rat};
    use std::collections::HashMap;

    fn k1n1() -> ParamVector {
        ParamVector::new(Shape::new(1, 1).unwrap(), vec![-2, -1, 1, 2]).unwrap()
    }

    /// Number of tables by dynamic programming over the vector of column
    /// partial sums, independent of the recursive enumerator.
    fn dp_count(rows: &[u64], cols: &[u64]) -> u64 {
        let mut states: HashMap<Vec<u64>, u64> = HashMap::new();
        states.insert(vec![0; cols.len()], 1);
        for &r in rows {
            let mut next = HashMap::new();
            for (state, count) in states {
                let mut fills = vec![Vec::new()];
                for (c, &cap) in cols.iter().enumerate() {
                    let mut grown = Vec::new();
                    for f in fills {
                        let used: u64 = f.iter().sum();
                        for v in 0..=(cap - state[c]).min(r - used) {
                            let mut g = f.clone();
                            g.push(v);
                            grown.push(g);
                        }
                    }
                    fills = grown;
                }
                for f in fills.into_iter().filter(|f| f.iter().sum::<u64>() == r) {
                    let s: Vec<u64> = state.iter().zip(&f).map(|(a, b)| a + b).collect();
                    *next.entry(s).or_insert(0) += count;
                }
            }
            states = next;
        }
        states.get(cols).copied().unwrap_or(0)
    }

    #[test]
    fn zero_x_keeps_only_constant_term() {
        let a = ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap();
        let x = XMatrix::new(vec![vec![rat(0, 1); 2]; 2]).unwrap();
        // 1 / (2! 3! 3! 4! (-2-3+1)!) has a negative last argument, so S = 0.
        assert_eq!(series_s(&a, &x).unwrap(), rat(0, 1));
        let b = ParamVector::new(Shape::new(1, 1).unwrap(), vec![-3, -1, 1, 3]).unwrap();
        let x = XMatrix::new(vec![vec![rat(0, 1)]]).unwrap();
        assert_eq!(series_s(&b, &x).unwrap(), rat(1, 2));
    }

    #[test]
    fn two_term_hand_evaluation() {
        // alpha = (-2,-1,1,2): Gamma_0 = 1! 1! 1! 0! and Gamma_1 = 0! 0! 2! 1!.
        let x = XMatrix::new(vec![vec![rat(1, 1)]]).unwrap();
        assert_eq!(series_s(&k1n1(), &x).unwrap(), rat(1, 1) + rat(1, 2));
        let x = XMatrix::new(vec![vec![rat(1, 3)]]).unwrap();
        let v = gm_vector_s(&k1n1(), &x).unwrap();
        let s = rat(1, 1) + rat(1, 6);
        let ds = rat(1, 2);
        assert_eq!(v.entries(), &[s, rat(1, 3) / rat(1, 1) * ds]);
    }

    #[test]
    fn degree_bound() {
        let a = ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap();
        let s: Series<Rat> = Series::new(&a).unwrap();
        assert!(s.terms().iter().all(|(m, _)| m.total() <= 5));
    }

    #[test]
    fn gm_vector_layout_k2() {
        let a = ParamVector::new(Shape::new(2, 2).unwrap(), vec![-3, -2, -3, 3, 4, 1]).unwrap();
        let x = XMatrix::new(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(1, 7)]]).unwrap();
        let s: Series<Rat> = Series::new(&a).unwrap();
        let v = s.gm_vector(&x).unwrap();
        let d = |p: &[(usize, usize)]| s.partial(&x, p).unwrap();
        let (a3, a4) = (rat(3, 1), rat(4, 1));
        let det = rat(1, 2) * rat(1, 7) - rat(1, 3) * rat(1, 5);
        let expected = [d(&[]),
            rat(1, 5) / a3.clone() * d(&[(2, 1)]),
            rat(1, 7) / a4.clone() * d(&[(2, 2)]),
            -rat(1, 2) / a3.clone() * d(&[(1, 1)]),
            -rat(1, 3) / a4.clone() * d(&[(1, 2)]),
            det / (a3 * a4) * d(&[(1, 1), (2, 2)])];
        assert_eq!(v.entries(), &expected[..]);
    }

    #[test]
    fn partial_rejects_repeats() {
        let x = XMatrix::new(vec![vec![rat(1, 3)]]).unwrap();
        assert_eq!(series_partial(&k1n1(), &x, &[(1, 1), (1, 1)]), Err(Error::RepeatedPair { i: 1, j: 1 }));
    }

    #[test]
    fn permutation_tables() {
        let t = enumerate_tables(&[1, 1], &[1, 1]).unwrap();
        assert_eq!(t, vec![vec![vec![0, 1], vec![1, 0]], vec![vec![1, 0], vec![0, 1]]]);
        assert!(enumerate_tables(&[-1, 3], &[1, 1]).unwrap().is_empty());
        assert!(enumerate_tables(&[1, 2], &[1, 1]).is_err());
    }

    #[test]
    fn enumeration_count_matches_dp() {
        for (r, c) in [
            (vec![2, 3, 3], vec![1, 3, 4]),
            (vec![4, 1, 5, 2], vec![3, 3, 6]),
            (vec![3, 3, 3, 3], vec![2, 4, 1, 5]),
        ] {
            let ri: Vec<i64> = r.iter().map(|&v| v as i64).collect();
            let ci: Vec<i64> = c.iter().map(|&v| v as i64).collect();
            let tables = enumerate_tables(&ri, &ci).unwrap();
            assert_eq!(tables.len() as u64, dp_count(&r, &c));
            for t in &tables {
                for (row, &s) in t.iter().zip(&r) {
                    assert_eq!(row.iter().sum::<u64>(), s);
                }
            }
        }
    }

    #[test]
    fn symmetric_oracle() {
        let p = vec![vec![rat(1, 1); 2]; 2];
        assert_eq!(oracle_z(&[1, 1], &[1, 1], &p).unwrap(), rat(2, 1));
        let e = oracle_e(&[1, 1], &[1, 1], &p).unwrap();
        assert_eq!(e[0][0], rat(1, 2));
    }

    #[test]
    fn row_scaling_is_homogeneous() {
        let rows = [2, 3, 3];
        let cols = [1, 3, 4];
        let p = vec![
            vec![rat(1, 1), rat(1, 2), rat(1, 3)],
            vec![rat(1, 1), rat(1, 5), rat(1, 7)],
            vec![rat(1, 1), rat(1, 1), rat(1, 1)],
        ];
        let z = oracle_z(&rows, &cols, &p).unwrap();
        let lambda = [rat(2, 1), rat(3, 5), rat(7, 2)];
        let scaled: Vec<Vec<Rat>> = p
            .iter()
            .zip(&lambda)
            .map(|(r, l)| r.iter().map(|v| v * l).collect())
            .collect();
        let expected = lambda
            .iter()
            .zip(&rows)
            .fold(z, |acc, (l, &b)| acc * Scalar::pow(l, b));
        assert_eq!(oracle_z(&rows, &cols, &scaled).unwrap(), expected);
        let e = oracle_e(&rows, &cols, &p).unwrap();
        for (row, &b) in e.iter().zip(&rows) {
            assert_eq!(row.iter().fold(rat(0, 1), |a, v| a + v), rat(b, 1));
        }
    }
}
