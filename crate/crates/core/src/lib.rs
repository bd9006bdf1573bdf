//! Exact evaluation of the normalizing constant of the two-way contingency
//! table distribution by the holonomic gradient method, built on the
//! Gauss-Manin connection and contiguity relations of the hypergeometric
//! function of type `(k+1, k+n+2)`.
//!
//! The pipeline works over any [`Scalar`] field. [`Rat`] (arbitrary
//! precision rationals) is the default and gives exact results; `f64` is an
//! opt-in fast path.

pub mod contiguity;
pub mod engine;
pub mod error;
pub mod gauss_manin;
pub mod index;
pub mod intersection;
pub mod linalg;
pub mod minors;
pub mod params;
pub mod scalar;
pub mod series;

pub use contiguity::{
    contiguity_inverse_frame_free, contiguity_matrix, d_matrix, shift_down_series, shift_up_series,
    Contiguity,
};
pub use engine::{
    build_path, evaluate, evaluate_in, expectation_gradients, expectations, map_problem,
    EvalOptions, EvalResult, MappedProblem, PathStep, TableProblem,
};
pub use error::{Error, Result};
pub use gauss_manin::{apply_connection_frame_free, m_j, psi_coefficient, v_j, Connection, GMVector};
pub use index::{
    aligned_0ji, aligned_ij0, enumerate_j, enumerate_j_circ, enumerate_j_dot, enumerate_pjq,
    IndexSet, IndexTuple, Shape, Sign,
};
pub use intersection::{
    inverse_cpq, matrix_c, matrix_cpq, matrix_p, matrix_q, pairing_scaled, LabeledMatrix,
};
pub use linalg::Matrix;
pub use minors::{build_xtilde, check_in_x, dlog_minor, minor, minor_tuple, XMatrix};
pub use params::ParamVector;
pub use scalar::{Rat, Scalar};
pub use series::{
    enumerate_tables, gm_vector_s, oracle_e, oracle_z, series_partial, series_s, MultiIndex, Series,
};
