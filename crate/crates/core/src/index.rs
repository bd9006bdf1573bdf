//! Index sets labelling the cohomology bases: the column structure of the
//! `(k+1) x (k+n+2)` matrix, its `(k+1)`-subsets, and the orderings used for
//! the frames `{J^1, ..., J^r}`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Mul;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `(k, n)` with `k = r1 - 1` rows of variables and `n = r2 - 1` columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    k: usize,
    n: usize,
    rank: usize,
}

impl Shape {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(Error::InvalidShape { k, n });
        }
        Ok(Self {
            k,
            n,
            rank: binomial(k + n, k),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r = C(k+n, k)`, the rank of the cohomology group.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Index of the last column, `k+n+1`.
    pub fn last(&self) -> usize {
        self.k + self.n + 1
    }

    /// Number of columns of the extended matrix, `k+n+2`.
    pub fn width(&self) -> usize {
        self.k + self.n + 2
    }

    pub fn check_index(&self, i: usize, lo: usize) -> Result<()> {
        if i < lo || i > self.last() {
            return Err(Error::IndexOutOfRange {
                index: i,
                lo,
                hi: self.last(),
            });
        }
        Ok(())
    }

    /// Memoized enumerations for this shape.
    pub fn basis(&self) -> Arc<Basis> {
        static MEMO: OnceLock<RwLock<HashMap<Shape, Arc<Basis>>>> = OnceLock::new();
        let memo = MEMO.get_or_init(Default::default);
        if let Some(b) = memo.read().expect("basis memo poisoned").get(self) {
            return b.clone();
        }
        let built = Arc::new(Basis::build(*self));
        memo.write()
            .expect("basis memo poisoned")
            .entry(*self)
            .or_insert(built)
            .clone()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn to_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Sign::Plus => v,
            Sign::Minus => -v,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity((self == Sign::Minus) != (rhs == Sign::Minus))
    }
}

/// A strictly ascending set of column indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(Self(elements))
    }

    /// Builds from elements already known to be strictly ascending.
    pub(crate) fn from_sorted(elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Self(elements)
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Position of `v` in ascending order.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        self.0.iter().filter(|v| other.contains(**v)).count()
    }

    /// Replaces `old` by `new` in place, keeping the position; the result is
    /// an ordered tuple.
    pub fn replace(&self, old: usize, new: usize) -> Result<IndexTuple> {
        let mut t = self.0.clone();
        match t.iter().position(|&v| v == old) {
            Some(p) => t[p] = new,
            None => return Err(Error::Internal(format!("{old} not in {self}"))),
        }
        IndexTuple::new(t)
    }

    pub fn as_tuple(&self) -> IndexTuple {
        IndexTuple(self.0.clone())
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_indices(f, &self.0)
    }
}

fn write_indices(f: &mut fmt::Formatter<'_>, v: &[usize]) -> fmt::Result {
    if v.iter().all(|&x| x < 10) {
        write!(f, "{{")?;
        for x in v {
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    } else {
        let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Distinct column indices in a significant order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(elements: Vec<usize>) -> Result<Self> {
        let mut seen = elements.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateIndex(w[0]));
        }
        Ok(Self(elements))
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    /// Sorts the tuple and returns the parity of the sorting permutation.
    pub fn sort_with_sign(&self) -> (IndexSet, Sign) {
        let v = &self.0;
        let inversions = (0..v.len())
            .flat_map(|i| (i + 1..v.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| v[i] > v[j])
            .count();
        let mut sorted = v.clone();
        sorted.sort_unstable();
        (IndexSet(sorted), Sign::from_parity(inversions % 2 == 1))
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_indices(f, &self.0)
    }
}

/// Sorts `tuple`, returning the set and the sign of the sorting permutation.
pub fn sort_with_sign(tuple: &IndexTuple) -> (IndexSet, Sign) {
    tuple.sort_with_sign()
}

/// An ordered frame obtained by an alignment rule: the defining tuples, the
/// sorted sets and the signs relating them.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedList {
    pub tuples: Vec<IndexTuple>,
    pub sets: Vec<IndexSet>,
    pub signs: Vec<Sign>,
}

impl AlignedList {
    fn from_tuples(tuples: Vec<IndexTuple>) -> Self {
        let (sets, signs) = tuples.iter().map(IndexTuple::sort_with_sign).unzip();
        Self {
            tuples,
            sets,
            signs,
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Per-shape enumerations, computed once.
#[derive(Debug)]
pub struct Basis {
    pub shape: Shape,
    /// All `(k+1)`-subsets of `{0, ..., k+n+1}`, lexicographic.
    pub all: Vec<IndexSet>,
    /// The frame: sets containing 0 and not `k+n+1`, lexicographic.
    pub frame: Vec<IndexSet>,
    /// Sets whose minor depends on `x`.
    pub circ: Vec<IndexSet>,
}

impl Basis {
    fn build(shape: Shape) -> Self {
        let pool: Vec<usize> = (0..shape.width()).collect();
        let all: Vec<IndexSet> = combinations(&pool, shape.k() + 1)
            .into_iter()
            .map(IndexSet::from_sorted)
            .collect();
        let frame = all
            .iter()
            .filter(|j| j.contains(0) && !j.contains(shape.last()))
            .cloned()
            .collect();
        let circ = all.iter().filter(|j| in_j_circ(shape, j)).cloned().collect();
        Self {
            shape,
            all,
            frame,
            circ,
        }
    }

    /// Position of `j` in the frame.
    pub fn frame_position(&self, j: &IndexSet) -> Option<usize> {
        self.frame.binary_search(j).ok()
    }
}

/// All `size`-subsets of `pool` (ascending) in lexicographic order.
pub(crate) fn combinations(pool: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn rec(pool: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let need = size - cur.len();
        for i in start..pool.len() {
            if pool.len() - i < need {
                break;
            }
            cur.push(pool[i]);
            rec(pool, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(pool, size, 0, &mut Vec::with_capacity(size), &mut out);
    out
}

pub fn enumerate_j(shape: Shape) -> Vec<IndexSet> {
    shape.basis().all.clone()
}

pub fn enumerate_j_dot(shape: Shape) -> Vec<IndexSet> {
    shape.basis().frame.clone()
}

/// Sets containing `p` and not `q`, ordered lexicographically by `J - {p}`.
pub fn enumerate_pjq(p: usize, q: usize, shape: Shape) -> Result<Vec<IndexSet>> {
    shape.check_index(p, 0)?;
    shape.check_index(q, 0)?;
    if p == q {
        return Err(Error::EqualPair(p));
    }
    let pool: Vec<usize> = (0..shape.width()).filter(|&v| v != p && v != q).collect();
    Ok(combinations(&pool, shape.k())
        .into_iter()
        .map(|mut rest| {
            rest.push(p);
            rest.sort_unstable();
            IndexSet::from_sorted(rest)
        })
        .collect())
}

/// The frame `{J'^l}` for sets containing 0 and not `i`, aligned to the
/// lexicographic frame: `J'^l = J^l` if `i` is absent, otherwise `i` is
/// replaced by `k+n+1` in place.
pub fn aligned_ij0(i: usize, shape: Shape) -> Result<AlignedList> {
    shape.check_index(i, 1)?;
    let basis = shape.basis();
    let tuples = basis
        .frame
        .iter()
        .map(|j| {
            if j.contains(i) {
                j.replace(i, shape.last())
            } else {
                Ok(j.as_tuple())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignedList::from_tuples(tuples))
}

/// The frame for sets containing `i` and not 0: each tuple of
/// [`aligned_ij0`] with 0 replaced by `i` in place.
pub fn aligned_0ji(i: usize, shape: Shape) -> Result<AlignedList> {
    let base = aligned_ij0(i, shape)?;
    let tuples = base
        .tuples
        .iter()
        .map(|t| {
            let v: Vec<usize> = t
                .elements()
                .iter()
                .map(|&e| if e == 0 { i } else { e })
                .collect();
            IndexTuple::new(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AlignedList::from_tuples(tuples))
}

/// Whether the minor of `j` genuinely depends on `x`: `j` must miss one of
/// `1..=k` and hit one of `k+1..=k+n`.
pub fn in_j_circ(shape: Shape, j: &IndexSet) -> bool {
    let k = shape.k();
    let has_all_units = (1..=k).all(|i| j.contains(i));
    let has_middle = (k + 1..=k + shape.n()).any(|c| j.contains(c));
    !has_all_units && has_middle
}

pub fn enumerate_j_circ(shape: Shape) -> Result<Vec<IndexSet>> {
    let circ = shape.basis().circ.clone();
    let expected = binomial(shape.width(), shape.k() + 1) - shape.width();
    if circ.len() != expected {
        return Err(Error::Internal(format!(
            "|J_circ| = {} but expected {expected}",
            circ.len()
        )));
    }
    Ok(circ)
}
