//! The holonomic gradient pipeline for two-way contingency tables: map the
//! problem to `(alpha, x)`, walk a parameter path from an easy starting
//! point with contiguity shifts, and read off `Z`, the expectations and
//! their derivatives.

use std::collections::HashMap;
use std::time::Instant;

use crate::contiguity::{d_matrix_from_table, shift_down_with, shift_up_with, Contiguity};
use crate::error::{Error, Result};
use crate::gauss_manin::{Connection, GMVector};
use crate::index::{IndexSet, Shape};
use crate::intersection::LabeledMatrix;
use crate::minors::{check_in_x, MinorTable, XMatrix};
use crate::params::ParamVector;
use crate::scalar::{factorial, Rat, Scalar};
use crate::series::{gm_vector_s, oracle_e, oracle_z};

/// Marginal sums and cell probabilities of a two-way table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableProblem {
    row_sums: Vec<i64>,
    col_sums: Vec<i64>,
    p: Vec<Vec<Rat>>,
}

impl TableProblem {
    pub fn new(row_sums: Vec<i64>, col_sums: Vec<i64>, p: Vec<Vec<Rat>>) -> Result<Self> {
        if row_sums.iter().chain(&col_sums).any(|&v| v < 0) {
            return Err(Error::NegativeMarginal);
        }
        let (a, b): (i64, i64) = (row_sums.iter().sum(), col_sums.iter().sum());
        if a != b {
            return Err(Error::MarginMismatch { rows: a, cols: b });
        }
        if row_sums.is_empty()
            || col_sums.is_empty()
            || p.len() != row_sums.len()
            || p.iter().any(|r| r.len() != col_sums.len())
        {
            return Err(Error::ProbabilityShape {
                rows: p.len(),
                cols: p.first().map_or(0, Vec::len),
                expected_rows: row_sums.len(),
                expected_cols: col_sums.len(),
            });
        }
        for (i, row) in p.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v <= Rat::from_integer(0.into()) {
                    return Err(Error::NonPositiveProbability { i, j });
                }
            }
        }
        Ok(Self { row_sums, col_sums, p })
    }

    pub fn row_sums(&self) -> &[i64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[i64] {
        &self.col_sums
    }

    pub fn probabilities(&self) -> &[Vec<Rat>] {
        &self.p
    }

    pub fn r1(&self) -> usize {
        self.row_sums.len()
    }

    pub fn r2(&self) -> usize {
        self.col_sums.len()
    }

    /// The problem with rows and columns reordered: row `a` of the result is
    /// row `rows[a]` of `self`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        Self::new(
            rows.iter().map(|&i| self.row_sums[i]).collect(),
            cols.iter().map(|&j| self.col_sums[j]).collect(),
            rows.iter()
                .map(|&i| cols.iter().map(|&j| self.p[i][j].clone()).collect())
                .collect(),
        )
    }

    /// Rows and columns with a zero marginal removed, with the kept indices.
    fn stripped(&self) -> (Vec<usize>, Vec<usize>, Option<Self>) {
        let rows: Vec<usize> = (0..self.r1()).filter(|&i| self.row_sums[i] > 0).collect();
        let cols: Vec<usize> = (0..self.r2()).filter(|&j| self.col_sums[j] > 0).collect();
        if rows.is_empty() || cols.is_empty() {
            return (rows, cols, None);
        }
        let reduced = self.permuted(&rows, &cols).expect("a sub-table of a valid problem is valid");
        (rows, cols, Some(reduced))
    }
}

/// The hypergeometric data of a table problem:
/// `Z(beta; p) = prefactor * S(alpha; x)` with `prefactor = p^{u0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MappedProblem {
    pub alpha: ParamVector,
    pub x: XMatrix<Rat>,
    pub u0: Vec<Vec<i64>>,
    pub prefactor: Rat,
}

/// Maps a problem with at least two rows and columns and positive margins.
pub fn map_problem(problem: &TableProblem) -> Result<MappedProblem> {
    let (r1, r2) = (problem.r1(), problem.r2());
    let shape = Shape::new(r1.saturating_sub(1), r2.saturating_sub(1))?;
    let (b1, b2) = (problem.row_sums(), problem.col_sums());
    if b1.iter().chain(b2).any(|&v| v <= 0) {
        return Err(Error::Regime("marginal sums must be positive".into()));
    }
    let mut alpha = vec![-b1[r1 - 1]];
    alpha.extend(b1[..r1 - 1].iter().map(|v| -v));
    alpha.extend(&b2[1..]);
    alpha.push(b2[0]);
    let alpha = ParamVector::new(shape, alpha)?;

    let p = problem.probabilities();
    let x = XMatrix::new(
        (0..r1 - 1)
            .map(|i| {
                (0..r2 - 1)
                    .map(|j| {
                        p[i][j + 1].clone() * p[r1 - 1][0].clone()
                            / (p[i][0].clone() * p[r1 - 1][j + 1].clone())
                    })
                    .collect()
            })
            .collect(),
    )?;

    let mut u0 = vec![vec![0i64; r2]; r1];
    for i in 0..r1 - 1 {
        u0[i][0] = b1[i];
    }
    u0[r1 - 1][0] = b2[0] - b1[..r1 - 1].iter().sum::<i64>();
    u0[r1 - 1][1..].copy_from_slice(&b2[1..]);
    let prefactor = power_product(p, &u0);
    Ok(MappedProblem {
        alpha,
        x,
        u0,
        prefactor,
    })
}

fn power_product<T: Scalar>(p: &[Vec<T>], u: &[Vec<i64>]) -> T {
    let mut acc = T::one();
    for (prow, urow) in p.iter().zip(u) {
        for (pv, &e) in prow.iter().zip(urow) {
            if e != 0 {
                acc = acc * pv.pow(e);
            }
        }
    }
    acc
}

/// One unit move along the parameter path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub index: usize,
    /// `+1` for `alpha + delta_i`, `-1` for `alpha - delta_i`.
    pub direction: i8,
    pub alpha_after: ParamVector,
}

/// A path of unit shifts from the starting point to `target`: raise the
/// middle indices, move the last index, then lower the indices `1..=k`.
/// Every intermediate vector is checked to have no zero entry.
pub fn build_path(target: &ParamVector) -> Result<Vec<PathStep>> {
    target.require_statistical()?;
    let shape = target.shape();
    let (k, n, last) = (shape.k(), shape.n(), shape.last());
    let mut moves: Vec<(usize, i8)> = Vec::new();
    let start = ParamVector::initial(shape);
    let mut push = |i: usize, from: i64, to: i64| {
        let dir = if to >= from { 1 } else { -1 };
        moves.extend(std::iter::repeat_n((i, dir), (to - from).unsigned_abs() as usize));
    };
    for c in k + 1..=k + n {
        push(c, start.get(c), target.get(c));
    }
    push(last, start.get(last), target.get(last));
    for i in 1..=k {
        push(i, start.get(i), target.get(i));
    }

    let mut alpha = start;
    let mut steps = Vec::with_capacity(moves.len());
    for (step, (index, direction)) in moves.into_iter().enumerate() {
        alpha = alpha.shift(index, direction as i64)?;
        if alpha.require_nonzero().is_err() {
            return Err(Error::PathZeroEntry {
                step: step + 1,
                index,
                alpha: alpha.entries().to_vec(),
            });
        }
        steps.push(PathStep {
            index,
            direction,
            alpha_after: alpha.clone(),
        });
    }
    if alpha != *target {
        return Err(Error::Internal(format!("path ends at {alpha}, not {target}")));
    }
    Ok(steps)
}

/// Frame position of `_a J-dot _{k+b}`: `{0, 1, ..., k}` with `a` replaced
/// by `k+b`.
fn s_ab_position(shape: Shape, a: usize, b: usize) -> usize {
    let k = shape.k();
    let set = IndexSet::new((0..=k).map(|v| if v == a { k + b } else { v }).collect())
        .expect("replacement keeps elements distinct");
    shape.basis().frame_position(&set).expect("the set contains 0 and not the last index")
}

/// `(l_ab)_ij`: the exponent change of `p_ij` in `x_ab`, 0-based cells.
fn ell(r1: usize, a: usize, b: usize, i: usize, j: usize) -> i64 {
    let mut v = 0;
    if (i, j) == (a - 1, b) || (i, j) == (r1 - 1, 0) {
        v += 1;
    }
    if (i, j) == (a - 1, 0) || (i, j) == (r1 - 1, b) {
        v -= 1;
    }
    v
}

fn sign_pow(e: usize) -> i64 {
    if e.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `E[U_ij] = (u0)_ij + (-1)^k / S sum_{a,b} (-1)^a (l_ab)_ij alpha_{k+b} S_ab`.
pub fn expectations<T: Scalar>(
    sbar: &GMVector<T>,
    alpha: &ParamVector,
    u0: &[Vec<i64>],
) -> Result<Vec<Vec<T>>> {
    let shape = alpha.shape();
    let (k, n) = (shape.k(), shape.n());
    let (r1, r2) = (k + 1, n + 1);
    let s = sbar.entries()[0].clone();
    if s.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let mut out: Vec<Vec<T>> = u0
        .iter()
        .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
        .collect();
    let mut acc = vec![vec![T::zero(); r2]; r1];
    for a in 1..=k {
        for b in 1..=n {
            let term = T::from_i64(sign_pow(a) * alpha.get(k + b)) * sbar.entries()[s_ab_position(shape, a, b)].clone();
            for (i, row) in acc.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    let l = ell(r1, a, b, i, j);
                    if l != 0 {
                        *cell = cell.clone() + T::from_i64(l) * term.clone();
                    }
                }
            }
        }
    }
    let f = T::from_i64(sign_pow(k)) / s;
    for (orow, arow) in out.iter_mut().zip(acc) {
        for (o, a) in orow.iter_mut().zip(arow) {
            *o = o.clone() + f.clone() * a;
        }
    }
    Ok(out)
}

/// `dE[U_ij] / dx_{i'j'}`, indexed `[i][j][i'-1][j'-1]`. `psi` holds
/// `Psi_{i'j'}` row-major over `(i', j')`.
pub fn expectation_gradients<T: Scalar>(
    sbar: &GMVector<T>,
    psi: &[LabeledMatrix<T>],
    alpha: &ParamVector,
    x: &XMatrix<T>,
) -> Result<Vec<Vec<Vec<Vec<T>>>>> {
    let shape = alpha.shape();
    let (k, n) = (shape.k(), shape.n());
    let (r1, r2) = (k + 1, n + 1);
    if psi.len() != k * n {
        return Err(Error::Internal(format!("{} connection matrices for {k}x{n} variables", psi.len())));
    }
    let s = sbar.entries()[0].clone();
    if s.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let entry = |a: usize, b: usize| sbar.entries()[s_ab_position(shape, a, b)].clone();
    let mut out = vec![vec![vec![vec![T::zero(); n]; k]; r2]; r1];
    for ip in 1..=k {
        for jp in 1..=n {
            let xv = x.get(ip, jp);
            if xv.is_zero() {
                return Err(Error::ZeroVariable { i: ip, j: jp });
            }
            let moved = sbar.left_mul(&psi[(ip - 1) * n + (jp - 1)])?;
            let ds = T::from_i64(sign_pow(k - ip) * alpha.get(k + jp)) / xv.clone() * entry(ip, jp);
            for a in 1..=k {
                for b in 1..=n {
                    let pos = s_ab_position(shape, a, b);
                    let inner = s.clone() * moved.entries()[pos].clone() - ds.clone() * entry(a, b);
                    let term = T::from_i64(sign_pow(a) * alpha.get(k + b)) * inner;
                    for (i, plane) in out.iter_mut().enumerate() {
                        for (j, block) in plane.iter_mut().enumerate() {
                            let l = ell(r1, a, b, i, j);
                            if l != 0 {
                                let cell = &mut block[ip - 1][jp - 1];
                                *cell = cell.clone() + T::from_i64(l) * term.clone();
                            }
                        }
                    }
                }
            }
        }
    }
    let f = T::from_i64(sign_pow(k)) / (s.clone() * s);
    for cell in out.iter_mut().flatten().flatten().flatten() {
        *cell = cell.clone() * f.clone();
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Cross-check `Z` and the expectations against table enumeration.
    pub oracle: bool,
    /// Skip the connection matrices and gradients.
    pub skip_gradients: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport<T> {
    pub z: T,
    pub expectations: Vec<Vec<T>>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics<T> {
    /// Path length.
    pub e: usize,
    pub path: Vec<PathStep>,
    /// `alpha` and `x` of the reduced problem; absent in the closed-form case.
    pub alpha: Option<ParamVector>,
    pub x: Option<XMatrix<T>>,
    /// Final Gauss-Manin vector, up to the factor `exp(ln_scale)`.
    pub sbar: Option<GMVector<T>>,
    /// Natural log of the factor divided out of `sbar` to keep floats in
    /// range. Always 0 for exact arithmetic.
    pub ln_scale: f64,
    /// Original row and column indices that survive zero-margin stripping.
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    pub millis: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult<T> {
    pub z: T,
    /// `ln |Z|`, finite even when `z` over- or underflows in floating point.
    pub ln_z: f64,
    pub expectations: Vec<Vec<T>>,
    /// `dE[U_ij]/dx_{i'j'}` indexed `[i][j][i'-1][j'-1]`, with `(i, j)` over
    /// the original cells and `(i', j')` over the variables of the reduced
    /// problem.
    pub gradients: Vec<Vec<Vec<Vec<T>>>>,
    pub oracle: Option<OracleReport<T>>,
    pub diagnostics: Diagnostics<T>,
}

/// Evaluates in exact rational arithmetic.
pub fn evaluate(problem: &TableProblem, options: EvalOptions) -> Result<EvalResult<Rat>> {
    evaluate_in::<Rat>(problem, options)
}

/// Evaluates in the scalar field `T`; `f64` gives the float backend.
pub fn evaluate_in<T: Scalar>(problem: &TableProblem, options: EvalOptions) -> Result<EvalResult<T>> {
    let started = Instant::now();
    let (kept_rows, kept_cols, reduced) = problem.stripped();
    let (r1, r2) = (problem.r1(), problem.r2());
    let p: Vec<Vec<T>> = problem
        .probabilities()
        .iter()
        .map(|r| r.iter().map(T::from_rat).collect())
        .collect();

    let mut result = match reduced {
        Some(red) if red.r1() >= 2 && red.r2() >= 2 => evaluate_reduced::<T>(&red, options)?,
        other => single_table::<T>(other.as_ref()),
    };

    // Re-embed into the original cell grid.
    let (k, n) = (
        result.gradients.first().and_then(|r| r.first()).map_or(0, Vec::len),
        result
            .gradients
            .first()
            .and_then(|r| r.first())
            .and_then(|r| r.first())
            .map_or(0, Vec::len),
    );
    let mut e = vec![vec![T::zero(); r2]; r1];
    let mut g = vec![vec![vec![vec![T::zero(); n]; k]; r2]; r1];
    for (a, &i) in kept_rows.iter().enumerate() {
        for (b, &j) in kept_cols.iter().enumerate() {
            e[i][j] = result.expectations[a][b].clone();
            g[i][j] = result.gradients[a][b].clone();
        }
    }
    result.expectations = e;
    result.gradients = g;
    result.diagnostics.kept_rows = kept_rows;
    result.diagnostics.kept_cols = kept_cols;

    if options.oracle {
        let z = oracle_z(problem.row_sums(), problem.col_sums(), &p)?;
        let ex = oracle_e(problem.row_sums(), problem.col_sums(), &p)?;
        let tol = 1e-9;
        let matches = z.approx_eq(&result.z, tol)
            && ex
                .iter()
                .flatten()
                .zip(result.expectations.iter().flatten())
                .all(|(a, b)| a.approx_eq(b, tol) || (a.to_f64() - b.to_f64()).abs() < tol);
        if !matches {
            return Err(Error::OracleMismatch(format!(
                "pipeline Z = {:?}, enumeration Z = {:?}",
                result.z, z
            )));
        }
        result.oracle = Some(OracleReport {
            z,
            expectations: ex,
            matches,
        });
    }
    result.diagnostics.millis = started.elapsed().as_millis();
    Ok(result)
}

/// The case of a single feasible table (one row or one column remains).
fn single_table<T: Scalar>(reduced: Option<&TableProblem>) -> EvalResult<T> {
    let (z, table) = match reduced {
        None => (T::one(), Vec::new()),
        Some(red) => {
            let table: Vec<Vec<i64>> = if red.r1() == 1 {
                vec![red.col_sums().to_vec()]
            } else {
                red.row_sums().iter().map(|&v| vec![v]).collect()
            };
            let mut z = T::one();
            for (prow, urow) in red.probabilities().iter().zip(&table) {
                for (pv, &u) in prow.iter().zip(urow) {
                    z = z * T::from_rat(pv).pow(u) / factorial::<T>(u as u64);
                }
            }
            (z, table)
        }
    };
    let expectations = table
        .iter()
        .map(|r| r.iter().map(|&v| T::from_i64(v)).collect())
        .collect();
    let gradients = table.iter().map(|r| vec![Vec::new(); r.len()]).collect();
    EvalResult {
        ln_z: z.ln_abs(),
        z,
        expectations,
        gradients,
        oracle: None,
        diagnostics: Diagnostics {
            e: 0,
            path: Vec::new(),
            alpha: None,
            x: None,
            sbar: None,
            ln_scale: 0.0,
            kept_rows: Vec::new(),
            kept_cols: Vec::new(),
            millis: 0,
        },
    }
}

/// Divides `v` by its largest magnitude and returns the log of the factor.
/// Only used for inexact fields, where the entries would otherwise leave
/// the binary64 range on long paths.
fn renormalize<T: Scalar>(v: &mut GMVector<T>) -> f64 {
    let m = v
        .entries()
        .iter()
        .map(|e| e.to_f64().abs())
        .fold(0.0, f64::max);
    if m == 0.0 || !m.is_finite() {
        return 0.0;
    }
    *v = v.scale(&T::from_rat(&Rat::from_float(1.0 / m).expect("finite")));
    m.ln()
}

fn evaluate_reduced<T: Scalar>(problem: &TableProblem, options: EvalOptions) -> Result<EvalResult<T>> {
    let mapped = map_problem(problem)?;
    let alpha = mapped.alpha.clone();
    let x: XMatrix<T> = mapped.x.map(T::from_rat);
    let vanishing = check_in_x(&mapped.x);
    if !vanishing.is_empty() {
        return Err(Error::NotInX(vanishing));
    }
    let path = build_path(&alpha)?;
    let minors = MinorTable::new(&x);

    let start = ParamVector::initial(alpha.shape());
    let mut sbar = gm_vector_s(&start, &x)?;
    let mut ln_scale = 0.0;
    let mut d_cache: HashMap<usize, LabeledMatrix<T>> = HashMap::new();
    let mut before = start;
    for step in &path {
        let i = step.index;
        if let std::collections::hash_map::Entry::Vacant(e) = d_cache.entry(i) {
            e.insert(d_matrix_from_table(&x, &minors, i)?);
        }
        let d = d_cache[&i].clone();
        sbar = if step.direction > 0 {
            shift_up_with(&Contiguity::with_d(&before, i, d)?, &sbar)?
        } else {
            shift_down_with(&Contiguity::with_d(&step.alpha_after, i, d)?, &sbar)?
        };
        if !T::EXACT {
            ln_scale += renormalize(&mut sbar);
        }
        before = step.alpha_after.clone();
    }

    let p: Vec<Vec<T>> = problem
        .probabilities()
        .iter()
        .map(|r| r.iter().map(T::from_rat).collect())
        .collect();
    let prefactor: T = power_product(&p, &mapped.u0);
    let first = sbar.entries()[0].clone();
    let ln_z = prefactor.ln_abs() + first.ln_abs() + ln_scale;
    let z = if T::EXACT {
        prefactor * first
    } else {
        prefactor * first * T::from_rat(&Rat::from_float(ln_scale.exp()).unwrap_or_default())
    };
    let expectations = expectations(&sbar, &alpha, &mapped.u0)?;
    let gradients = if options.skip_gradients {
        let (k, n) = (alpha.shape().k(), alpha.shape().n());
        vec![vec![vec![vec![T::zero(); n]; k]; problem.r2()]; problem.r1()]
    } else {
        let mut conn: Connection<T> = Connection::new(&alpha)?;
        let psi = x
            .positions()
            .map(|(i, j)| conn.psi(&x, i, j))
            .collect::<Result<Vec<_>>>()?;
        expectation_gradients(&sbar, &psi, &alpha, &x)?
    };
    Ok(EvalResult {
        z,
        ln_z,
        expectations,
        gradients,
        oracle: None,
        diagnostics: Diagnostics {
            e: path.len(),
            path,
            alpha: Some(alpha),
            x: Some(x),
            sbar: Some(sbar),
            ln_scale,
            kept_rows: Vec::new(),
            kept_cols: Vec::new(),
            millis: 0,
        },
    })
}
