//! Integer parameter vectors `alpha = (alpha_0, ..., alpha_{k+n+1})` with
//! zero sum, and the unit shifts `delta_i`.

use std::fmt;

use crate::error::{Error, Result};
use crate::index::{IndexSet, Shape};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamVector {
    shape: Shape,
    entries: Vec<i64>,
}

impl ParamVector {
    pub fn new(shape: Shape, entries: Vec<i64>) -> Result<Self> {
        if entries.len() != shape.width() {
            return Err(Error::ParamLength {
                got: entries.len(),
                expected: shape.width(),
            });
        }
        let sum: i64 = entries.iter().sum();
        if sum != 0 {
            return Err(Error::ParamSum(sum));
        }
        Ok(Self { shape, entries })
    }

    /// The starting point of the parameter path,
    /// `(1-r2, -1, ..., -1, 1, ..., 1, r1-1)`.
    pub fn initial(shape: Shape) -> Self {
        let (k, n) = (shape.k() as i64, shape.n() as i64);
        let mut e = vec![-n];
        e.extend(std::iter::repeat_n(-1, shape.k()));
        e.extend(std::iter::repeat_n(1, shape.n()));
        e.push(k);
        Self { shape, entries: e }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> i64 {
        self.entries[i]
    }

    pub fn scalar<T: Scalar>(&self, i: usize) -> T {
        T::from_i64(self.entries[i])
    }

    /// `alpha + step * delta_i`, where `delta_i` is `-1` at slot 0 and `+1`
    /// at slot `i`.
    pub fn shift(&self, i: usize, step: i64) -> Result<Self> {
        self.shape.check_index(i, 1)?;
        let mut e = self.entries.clone();
        e[0] -= step;
        e[i] += step;
        Ok(Self {
            shape: self.shape,
            entries: e,
        })
    }

    /// `alpha^{(i)} = alpha + delta_i`.
    pub fn raised(&self, i: usize) -> Result<Self> {
        self.shift(i, 1)
    }

    /// The dual parameters `-alpha`.
    pub fn negated(&self) -> Self {
        Self {
            shape: self.shape,
            entries: self.entries.iter().map(|v| -v).collect(),
        }
    }

    /// `alpha_J`, the sum of the entries indexed by `j`.
    pub fn alpha_j(&self, j: &IndexSet) -> i64 {
        j.elements().iter().map(|&i| self.entries[i]).sum()
    }

    pub fn require_nonzero(&self) -> Result<()> {
        match self.entries.iter().position(|&v| v == 0) {
            Some(i) => Err(Error::ZeroParameter(i)),
            None => Ok(()),
        }
    }

    pub fn require_nonzero_on(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| self.entries[i] == 0) {
            Some(&i) => Err(Error::ZeroParameter(i)),
            None => Ok(()),
        }
    }

    /// Whether the series in `x` is a finite polynomial: `alpha_i < 0` for
    /// `1 <= i <= k` and `alpha_{k+j} > 0` for `1 <= j <= n`.
    pub fn require_statistical(&self) -> Result<()> {
        let k = self.shape.k();
        for i in 1..=k {
            if self.entries[i] >= 0 {
                return Err(Error::Regime(format!("alpha_{i} = {} is not negative", self.entries[i])));
            }
        }
        for c in k + 1..=k + self.shape.n() {
            if self.entries[c] <= 0 {
                return Err(Error::Regime(format!("alpha_{c} = {} is not positive", self.entries[c])));
            }
        }
        Ok(())
    }
}

/// `alpha_J` as a free function.
pub fn alpha_j(alpha: &ParamVector, j: &IndexSet) -> i64 {
    alpha.alpha_j(j)
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn alpha_j_examples() {
        let s = Shape::new(2, 2).unwrap();
        let a = ParamVector::new(s, vec![-3, -2, -3, 3, 4, 1]).unwrap();
        assert_eq!(a.alpha_j(&set(&[0, 1, 2])), -8);
        assert_eq!(a.alpha_j(&set(&[0, 3, 4])), 4);
        let z = ParamVector::new(s, vec![0, 0, 0, 1, -1, 0]).unwrap();
        assert_eq!(z.alpha_j(&set(&[0, 1, 2])), 0);
    }

    #[test]
    fn rejects_nonzero_sum_and_wrong_length() {
        let s = Shape::new(2, 2).unwrap();
        assert_eq!(
            ParamVector::new(s, vec![-2, -1, 1, 1, 1, 2]),
            Err(Error::ParamSum(2))
        );
        assert!(matches!(
            ParamVector::new(s, vec![0; 5]),
            Err(Error::ParamLength { .. })
        ));
    }

    #[test]
    fn initial_point_and_shifts() {
        let s = Shape::new(2, 2).unwrap();
        let a0 = ParamVector::initial(s);
        assert_eq!(a0.entries(), &[-2, -1, -1, 1, 1, 2]);
        let a1 = a0.raised(3).unwrap();
        assert_eq!(a1.entries(), &[-3, -1, -1, 2, 1, 2]);
        assert_eq!(a1.shift(3, -1).unwrap(), a0);
        assert!(a0.shift(0, 1).is_err());
        assert_eq!(a0.negated().negated(), a0);
    }
}
