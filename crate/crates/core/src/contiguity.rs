//! Contiguity relations: the matrices `c_i(alpha; x)` that carry the
//! Gauss-Manin vector from `alpha` to `alpha + delta_i`.
//!
//! `c_i = C(alpha^(i)) P_i(alpha^(i))^{-1} D_i(x) Q_i(alpha) C(alpha)^{-1}`.
//! The five factors are kept separately so `c_i` can be applied to a vector
//! without forming the product. Downward shifts solve against the assembled
//! matrix; a second inverse built from closed-form factor inverses is kept
//! for cross-checking.

use crate::error::{Error, Result};
use crate::gauss_manin::{Connection, GMVector};
use crate::index::{aligned_0ji, aligned_ij0, IndexSet};
use crate::intersection::{inverse_cpq, matrix_c, matrix_p, matrix_q, pairing_scaled, LabeledMatrix};
use crate::linalg::{dot, Matrix};
use crate::minors::{minor, minor_tuple, MinorTable, XMatrix};
use crate::params::ParamVector;
use crate::scalar::Scalar;

/// The diagonal matrix `D_i(x)` of minor ratios
/// `|x~<_0 J'^l _i>| / |x~<J'^l>|`, rows labelled by the aligned sets
/// containing `i`, columns by the aligned sets containing 0.
pub fn d_matrix<T: Scalar>(x: &XMatrix<T>, i: usize) -> Result<LabeledMatrix<T>> {
    d_matrix_with(x, i, |t| minor_tuple(x, t))
}

/// [`d_matrix`] with minors read from a precomputed table.
pub fn d_matrix_from_table<T: Scalar>(
    x: &XMatrix<T>,
    minors: &MinorTable<T>,
    i: usize,
) -> Result<LabeledMatrix<T>> {
    d_matrix_with(x, i, |t| minors.get_tuple(t))
}

fn d_matrix_with<T: Scalar>(
    x: &XMatrix<T>,
    i: usize,
    minor_of: impl Fn(&crate::index::IndexTuple) -> T,
) -> Result<LabeledMatrix<T>> {
    let shape = x.shape();
    let from = aligned_ij0(i, shape)?;
    let to = aligned_0ji(i, shape)?;
    let mut diag = Vec::with_capacity(from.len());
    for (src, dst) in from.tuples.iter().zip(&to.tuples) {
        let den = minor_of(src);
        if den.is_zero() {
            return Err(Error::VanishingMinor(src.sort_with_sign().0));
        }
        let num = minor_of(dst);
        if num.is_zero() {
            return Err(Error::VanishingMinor(dst.sort_with_sign().0));
        }
        diag.push(num / den);
    }
    Ok(LabeledMatrix::new(to.sets, from.sets, Matrix::diagonal(diag)))
}

/// The factors of `c_i(alpha; x)` together with their closed-form inverses.
#[derive(Clone, Debug)]
pub struct Contiguity<T> {
    alpha: ParamVector,
    index: usize,
    c_raised: LabeledMatrix<T>,
    p_inv: LabeledMatrix<T>,
    d: Vec<T>,
    q: LabeledMatrix<T>,
    c_inv: LabeledMatrix<T>,
}

impl<T: Scalar> Contiguity<T> {
    pub fn new(alpha: &ParamVector, x: &XMatrix<T>, i: usize) -> Result<Self> {
        let d = d_matrix(x, i)?;
        Self::with_d(alpha, i, d)
    }

    /// As [`Contiguity::new`], with minors taken from a precomputed table.
    pub fn with_minors(alpha: &ParamVector, x: &XMatrix<T>, minors: &MinorTable<T>, i: usize) -> Result<Self> {
        Self::with_d(alpha, i, d_matrix_from_table(x, minors, i)?)
    }

    /// Builds the factors from a precomputed `D_i(x)`.
    pub fn with_d(alpha: &ParamVector, i: usize, d: LabeledMatrix<T>) -> Result<Self> {
        let shape = alpha.shape();
        if d.matrix.rows() != shape.rank() {
            return Err(Error::Internal("D_i of the wrong size".into()));
        }
        alpha.require_nonzero()?;
        let raised = alpha.raised(i)?;
        raised.require_nonzero()?;
        let last = shape.last();

        let p_aligned = aligned_0ji(i, shape)?;
        let p_inv = inverse_cpq::<T>(&raised, i, 0, 0, last)?
            .select_cols(&p_aligned.sets, &p_aligned.signs)?;
        let q = matrix_q(alpha, i)?;
        if p_inv.col_labels != d.row_labels || d.col_labels != q.row_labels {
            return Err(Error::LabelMismatch);
        }
        let diag = (0..d.matrix.rows()).map(|a| d.matrix[(a, a)].clone()).collect();
        Ok(Self {
            alpha: alpha.clone(),
            index: i,
            c_raised: matrix_c(&raised)?,
            p_inv,
            d: diag,
            q,
            c_inv: inverse_cpq(alpha, 0, last, 0, last)?,
        })
    }

    pub fn alpha(&self) -> &ParamVector {
        &self.alpha
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `c_i(alpha; x) v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        let w = self.c_inv.matrix.mul_vec(v);
        let w = self.q.matrix.mul_vec(&w);
        let w: Vec<T> = w.into_iter().zip(&self.d).map(|(a, b)| a * b.clone()).collect();
        let w = self.p_inv.matrix.mul_vec(&w);
        self.c_raised.matrix.mul_vec(&w)
    }

    /// `c_i(alpha; x)^{-1} v`, using `P_i(alpha^(i))`, `Q_i(alpha)^{-1}` and
    /// `C(alpha^(i))^{-1}` in closed form.
    pub fn apply_inverse(&self, v: &[T]) -> Result<Vec<T>> {
        let (c_raised_inv, p, q_inv, c) = self.inverse_factors()?;
        let w = c_raised_inv.matrix.mul_vec(v);
        let w = p.matrix.mul_vec(&w);
        let w: Vec<T> = w.into_iter().zip(&self.d).map(|(a, b)| a / b.clone()).collect();
        let w = q_inv.matrix.mul_vec(&w);
        Ok(c.matrix.mul_vec(&w))
    }

    #[allow(clippy::type_complexity)]
    fn inverse_factors(
        &self,
    ) -> Result<(LabeledMatrix<T>, LabeledMatrix<T>, LabeledMatrix<T>, LabeledMatrix<T>)> {
        let shape = self.alpha.shape();
        let last = shape.last();
        let i = self.index;
        let raised = self.alpha.raised(i)?;
        let q_aligned = aligned_ij0(i, shape)?;
        let q_inv = inverse_cpq::<T>(&self.alpha, 0, i, 0, last)?
            .select_cols(&q_aligned.sets, &q_aligned.signs)?;
        Ok((
            inverse_cpq(&raised, 0, last, 0, last)?,
            matrix_p(&raised, i)?,
            q_inv,
            matrix_c(&self.alpha)?,
        ))
    }

    /// The full matrix `c_i(alpha; x)`.
    pub fn matrix(&self) -> Result<LabeledMatrix<T>> {
        let d = LabeledMatrix::new(
            self.p_inv.col_labels.clone(),
            self.q.row_labels.clone(),
            Matrix::diagonal(self.d.clone()),
        );
        self.c_raised
            .mul(&self.p_inv)?
            .mul(&d)?
            .mul(&self.q)?
            .mul(&self.c_inv)
    }

    /// The full matrix `c_i(alpha; x)^{-1}`.
    pub fn inverse_matrix(&self) -> Result<LabeledMatrix<T>> {
        let (c_raised_inv, p, q_inv, c) = self.inverse_factors()?;
        let d_inv = LabeledMatrix::new(
            q_inv.col_labels.clone(),
            p.row_labels.clone(),
            Matrix::diagonal(self.d.iter().map(|v| T::one() / v.clone()).collect()),
        );
        c.mul(&q_inv)?.mul(&d_inv)?.mul(&p)?.mul(&c_raised_inv)
    }
}

/// `c_i(alpha; x)`.
pub fn contiguity_matrix<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    i: usize,
) -> Result<LabeledMatrix<T>> {
    Contiguity::new(alpha, x, i)?.matrix()
}

/// The Gauss-Manin vector of `S(alpha + delta_i; x)` from that of
/// `S(alpha; x)`.
pub fn shift_up_series<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    i: usize,
    s: &GMVector<T>,
) -> Result<GMVector<T>> {
    let c = Contiguity::new(alpha, x, i)?;
    shift_up_with(&c, s)
}

pub(crate) fn shift_up_with<T: Scalar>(c: &Contiguity<T>, s: &GMVector<T>) -> Result<GMVector<T>> {
    let alpha = c.alpha();
    let i = c.index();
    let mut out = c.apply(s.entries());
    if i > alpha.shape().k() {
        let a = alpha.get(i) + 1;
        if a == 0 {
            return Err(Error::ShiftPole { index: i });
        }
        let f = T::one() / T::from_i64(a);
        out.iter_mut().for_each(|v| *v = v.clone() * f.clone());
    }
    GMVector::new(alpha.shape(), out)
}

/// The Gauss-Manin vector of `S(alpha - delta_i; x)` from that of
/// `S(alpha; x)`, through `c_i(alpha - delta_i; x)^{-1}`.
pub fn shift_down_series<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    i: usize,
    s: &GMVector<T>,
) -> Result<GMVector<T>> {
    let lowered = alpha.shift(i, -1)?;
    let c = Contiguity::new(&lowered, x, i)?;
    shift_down_with(&c, s)
}

/// `c` must be built at `alpha - delta_i`.
pub(crate) fn shift_down_with<T: Scalar>(c: &Contiguity<T>, s: &GMVector<T>) -> Result<GMVector<T>> {
    let lowered = c.alpha();
    let i = c.index();
    // Exact elimination on the assembled c_i; the closed-form inverse in
    // `apply_inverse` stays an independent cross-check.
    let mut out = c.matrix()?.matrix.solve(s.entries())?;
    if i > lowered.shape().k() {
        let f = T::from_i64(lowered.get(i) + 1);
        out.iter_mut().for_each(|v| *v = v.clone() * f.clone());
    }
    GMVector::new(lowered.shape(), out)
}

/// The row action `w -> w c_i(alpha; x)^{-1}` written without a frame:
/// the sum over `J` containing `i` and not 0 of
/// `I(phi, phi<J>) / I(phi<_iJ_0>, phi<J>) |x~<_iJ_0>| / |x~<J>| phi<J>`,
/// with the pairings at `alpha` and `phi<J>` expanded at `alpha^(i)`.
pub fn contiguity_inverse_frame_free<T: Scalar>(
    alpha: &ParamVector,
    x: &XMatrix<T>,
    i: usize,
    phi: &GMVector<T>,
) -> Result<GMVector<T>> {
    let shape = alpha.shape();
    let raised = alpha.raised(i)?;
    let target: Connection<T> = Connection::new(&raised)?;
    let frame = shape.basis().frame.clone();
    let sets = crate::index::enumerate_pjq(i, 0, shape)?;
    let mut out = vec![T::zero(); frame.len()];
    for j in &sets {
        let swapped = IndexSet::new(
            j.elements().iter().map(|&e| if e == i { 0 } else { e }).collect(),
        )?;
        let column = frame
            .iter()
            .map(|f| pairing_scaled(alpha, f, j))
            .collect::<Result<Vec<T>>>()?;
        let num = dot(phi.entries(), &column);
        if num.is_zero() {
            continue;
        }
        let den: T = pairing_scaled(alpha, &swapped, j)?;
        let mj = minor(x, j);
        if den.is_zero() || mj.is_zero() {
            return Err(Error::VanishingMinor(j.clone()));
        }
        let coeff = num / den * minor(x, &swapped) / mj;
        for (o, v) in out.iter_mut().zip(target.v_j(j)?) {
            *o = o.clone() + coeff.clone() * v;
        }
    }
    GMVector::new(shape, out)
}
