//! The result document and the text forms of numbers in it.

use hgm_core::gauss_manin::Connection;
use hgm_core::scalar::{format_rat, Rat};
use hgm_core::{Contiguity, EvalResult, LabeledMatrix, Scalar};
use num::{BigInt, Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Text form of a scalar in the result document: `"num/den"` for exact
/// values, the shortest round-tripping decimal for floats.
pub trait Render: Scalar {
    fn render(&self) -> String;
    /// `Some` when the value is exact.
    fn exact(&self) -> Option<&Rat>;
}

impl Render for Rat {
    fn render(&self) -> String {
        format_rat(self)
    }
    fn exact(&self) -> Option<&Rat> {
        Some(self)
    }
}

impl Render for f64 {
    fn render(&self) -> String {
        format!("{self:e}")
    }
    fn exact(&self) -> Option<&Rat> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    /// `null` for the float backend.
    pub z_exact: Option<String>,
    pub z_decimal: String,
    pub expectations: Vec<Vec<String>>,
    /// `[i][j][i'][j']` = `dE[U_ij]/dx_{i'+1, j'+1}`.
    pub gradients: Vec<Vec<Vec<Vec<String>>>>,
    pub diagnostics: DiagnosticsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pfaffian: Option<Vec<PsiDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contiguity: Option<MatrixDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    pub e: usize,
    pub path: Vec<StepDoc>,
    pub millis: u64,
    pub backend: String,
    pub alpha: Option<Vec<i64>>,
    pub x: Option<Vec<Vec<String>>>,
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDoc {
    pub index: usize,
    pub direction: i8,
    pub alpha: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDoc {
    #[serde(rename = "match")]
    pub matches: bool,
    pub z: String,
    pub expectations: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiDoc {
    pub i: usize,
    pub j: usize,
    #[serde(flatten)]
    pub matrix: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<i64>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

fn render_matrix<T: Render>(rows: &[Vec<T>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(Render::render).collect()).collect()
}

fn matrix_doc<T: Render>(m: &LabeledMatrix<T>) -> MatrixDoc {
    MatrixDoc {
        index: None,
        alpha: None,
        row_labels: m.row_labels.iter().map(ToString::to_string).collect(),
        col_labels: m.col_labels.iter().map(ToString::to_string).collect(),
        entries: render_matrix(&m.matrix.to_rows()),
    }
}

/// What to add beyond the core result.
#[derive(Debug, Clone, Copy, Default)]
pub struct Extras {
    pub digits: usize,
    pub pfaffian: bool,
    pub contiguity: Option<usize>,
}

pub fn build_document<T: Render>(result: &EvalResult<T>, extras: Extras) -> Result<ResultDocument, CliError> {
    let d = &result.diagnostics;
    let z_decimal = match result.z.exact() {
        Some(r) => round_significant(r, extras.digits),
        None => float_decimal(result.z.to_f64(), result.ln_z, extras.digits),
    };
    let mut doc = ResultDocument {
        z_exact: result.z.exact().map(format_rat),
        z_decimal,
        expectations: render_matrix(&result.expectations),
        gradients: result
            .gradients
            .iter()
            .map(|row| row.iter().map(|cell| render_matrix(cell)).collect())
            .collect(),
        diagnostics: DiagnosticsDoc {
            e: d.e,
            path: d
                .path
                .iter()
                .map(|s| StepDoc {
                    index: s.index,
                    direction: s.direction,
                    alpha: s.alpha_after.entries().to_vec(),
                })
                .collect(),
            millis: d.millis as u64,
            backend: if T::EXACT { "exact" } else { "float" }.into(),
            alpha: d.alpha.as_ref().map(|a| a.entries().to_vec()),
            x: d.x.as_ref().map(|x| render_matrix(&x.matrix().to_rows())),
            kept_rows: d.kept_rows.clone(),
            kept_cols: d.kept_cols.clone(),
        },
        oracle: result.oracle.as_ref().map(|o| OracleDoc {
            matches: o.matches,
            z: o.z.render(),
            expectations: render_matrix(&o.expectations),
        }),
        pfaffian: None,
        contiguity: None,
    };

    if extras.pfaffian {
        let mut blocks = Vec::new();
        if let (Some(alpha), Some(x)) = (&d.alpha, &d.x) {
            let mut conn: Connection<T> = Connection::new(alpha)?;
            for (i, j) in x.positions() {
                blocks.push(PsiDoc {
                    i,
                    j,
                    matrix: matrix_doc(&conn.psi(x, i, j)?),
                });
            }
        }
        doc.pfaffian = Some(blocks);
    }
    if let Some(i) = extras.contiguity {
        let (Some(alpha), Some(x)) = (&d.alpha, &d.x) else {
            return Err(CliError::Parse {
                location: "--emit-contiguity".into(),
                message: "the problem reduces to a single table; there is no contiguity matrix".into(),
            });
        };
        if i == 0 || i > alpha.shape().last() {
            return Err(CliError::Parse {
                location: "--emit-contiguity".into(),
                message: format!("index {i} is outside 1..={}", alpha.shape().last()),
            });
        }
        let c = Contiguity::new(alpha, x, i)?.matrix()?;
        let mut m = matrix_doc(&c);
        m.index = Some(i);
        m.alpha = Some(alpha.entries().to_vec());
        doc.contiguity = Some(m);
    }
    Ok(doc)
}

fn pow10(e: i64) -> Rat {
    let p = num::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Rat::from_integer(p)
    } else {
        Rat::new(BigInt::one(), p)
    }
}

/// `r` correctly rounded (half to even) to `digits` significant digits, in
/// scientific notation such as `-1.25e-3`.
pub fn round_significant(r: &Rat, digits: usize) -> String {
    let digits = digits.max(1);
    if Zero::is_zero(r) {
        return "0".into();
    }
    let a = r.abs();
    let mut e = (a.ln_abs() / std::f64::consts::LN_10).floor() as i64;
    while a < pow10(e) {
        e -= 1;
    }
    while a >= pow10(e + 1) {
        e += 1;
    }
    let scaled = a * pow10(digits as i64 - 1 - e);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let twice = rem * 2u32;
    let mut m = match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Greater => q + 1u32,
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Equal if q.is_odd() => q + 1u32,
        std::cmp::Ordering::Equal => q,
    };
    if m == num::pow(BigInt::from(10), digits) {
        m /= 10u32;
        e += 1;
    }
    let s = m.to_string();
    let sign = if r.is_negative() { "-" } else { "" };
    if s.len() == 1 {
        format!("{sign}{s}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &s[..1], &s[1..])
    }
}

/// Decimal form of a float result. Falls back to `ln |Z|` when `Z` itself
/// is outside the binary64 range.
fn float_decimal(z: f64, ln_z: f64, digits: usize) -> String {
    let digits = digits.clamp(1, 17);
    if z.is_finite() && z != 0.0 {
        let r = Rat::from_float(z).expect("finite");
        return round_significant(&r, digits);
    }
    if !ln_z.is_finite() {
        return format!("{z}");
    }
    let l = ln_z / std::f64::consts::LN_10;
    let e = l.floor();
    let mantissa = 10f64.powf(l - e);
    format!("{:.*}e{}", digits.min(15) - 1, mantissa, e as i64)
}
