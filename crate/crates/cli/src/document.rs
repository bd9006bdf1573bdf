//! The input problem document and its lossless conversion to a
//! [`TableProblem`].

use hgm_core::scalar::Rat;
use hgm_core::TableProblem;
use num::BigInt;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

/// `{"row_sums": [...], "col_sums": [...], "probabilities": [[...], ...]}`.
///
/// Probabilities are strings holding either a decimal (`"0.125"`, `"2.5e-3"`)
/// or an exact fraction (`"1/8"`). JSON integers are accepted too; JSON
/// numbers with a fractional part are rejected because they have already
/// been rounded to binary by the time they reach us.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub row_sums: Vec<i64>,
    pub col_sums: Vec<i64>,
    pub probabilities: Vec<Vec<Value>>,
}

impl ProblemDocument {
    pub fn from_value(value: Value, location: &str) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Parse {
            location: location.to_string(),
            message: e.to_string(),
        })
    }

    pub fn to_problem(&self, location: &str) -> Result<TableProblem, CliError> {
        let (r1, r2) = (self.row_sums.len(), self.col_sums.len());
        if self.probabilities.len() != r1 || r1 == 0 {
            return Err(CliError::Parse {
                location: format!("{location}probabilities"),
                message: format!("expected {r1} rows, found {}", self.probabilities.len()),
            });
        }
        let mut p = Vec::with_capacity(r1);
        for (i, row) in self.probabilities.iter().enumerate() {
            if row.len() != r2 {
                return Err(CliError::Parse {
                    location: format!("{location}probabilities[{i}]"),
                    message: format!("expected {r2} entries, found {}", row.len()),
                });
            }
            let mut prow = Vec::with_capacity(r2);
            for (j, v) in row.iter().enumerate() {
                let parsed = match v {
                    Value::String(s) => parse_exact(s),
                    Value::Number(n) if n.is_i64() => n.as_i64().map(|v| Rat::from_integer(v.into())),
                    _ => None,
                };
                let value = parsed.ok_or_else(|| CliError::Parse {
                    location: format!("{location}probabilities[{i}][{j}]"),
                    message: format!("not an exact number: {v}; use a decimal or \"num/den\" string"),
                })?;
                prow.push(value);
            }
            p.push(prow);
        }
        TableProblem::new(self.row_sums.clone(), self.col_sums.clone(), p).map_err(CliError::Math)
    }
}

/// Parses `"num/den"`, an integer, or a decimal with optional exponent into
/// an exact rational.
pub fn parse_exact(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.contains('/') {
        return hgm_core::scalar::parse_rat(s);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rat::from_integer(all * num::pow(ten, scale as usize))
    } else {
        Rat::new(all, num::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    Some(value)
}
