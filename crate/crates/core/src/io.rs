//! JSON polytope files.
//!
//! ```json
//! {"type": "H", "A": [[-1, 0], [0, "1/2"]], "a": [1, "0.5"]}
//! {"type": "V", "B": [[1, -1, 0], [0, 0, 1]]}
//! ```
//!
//! `B` lists the points as columns (d rows, l columns). Entries may be JSON
//! integers, decimal strings or `"p/q"` strings; plain JSON floats are read
//! through their shortest decimal rendering.

use std::fs;
use std::path::Path;

use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::polytope::{HPolytope, VPolytope};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolytopeFile {
    H(HPolytope),
    V(VPolytope),
}

fn number(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::InvalidNumber(other.to_string())),
    }
}

fn vector(v: &Value, what: &str) -> Result<Vec<Rational>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidPolytope(format!("{what} must be an array")))?
        .iter()
        .map(number)
        .collect()
}

fn matrix(v: &Value, what: &str) -> Result<Vec<Vec<Rational>>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidPolytope(format!("{what} must be an array of rows")))?
        .iter()
        .map(|row| vector(row, what))
        .collect()
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::InvalidPolytope(format!("missing field {key:?}")))
}

pub fn parse_polytope(text: &str) -> Result<PolytopeFile> {
    let v: Value = serde_json::from_str(text)?;
    let kind = field(&v, "type")?
        .as_str()
        .ok_or_else(|| Error::InvalidPolytope("\"type\" must be \"H\" or \"V\"".into()))?;
    match kind {
        "H" => {
            let a_mat = matrix(field(&v, "A")?, "A")?;
            let rhs = vector(field(&v, "a")?, "a")?;
            Ok(PolytopeFile::H(HPolytope::new(a_mat, rhs)?))
        }
        "V" => Ok(PolytopeFile::V(VPolytope::from_columns(&matrix(field(&v, "B")?, "B")?)?)),
        other => Err(Error::InvalidPolytope(format!("unknown type {other:?}, expected \"H\" or \"V\""))),
    }
}

pub fn read_polytope(path: &Path) -> Result<PolytopeFile> {
    parse_polytope(&fs::read_to_string(path)?)
}

pub fn read_h(path: &Path) -> Result<HPolytope> {
    match read_polytope(path)? {
        PolytopeFile::H(p) => Ok(p),
        PolytopeFile::V(_) => Err(Error::InvalidPolytope(format!("{} holds a V-polytope, expected H", path.display()))),
    }
}

pub fn read_v(path: &Path) -> Result<VPolytope> {
    match read_polytope(path)? {
        PolytopeFile::V(q) => Ok(q),
        PolytopeFile::H(_) => Err(Error::InvalidPolytope(format!("{} holds an H-polytope, expected V", path.display()))),
    }
}

/// Integers stay JSON numbers, everything else becomes a `"p/q"` string.
pub fn rational_to_json(r: &Rational) -> Value {
    if r.denom().is_one() {
        if let Ok(i) = r.numer().to_string().parse::<i64>() {
            return json!(i);
        }
    }
    json!(format_rational(r))
}

fn row_json(row: &[Rational]) -> Value {
    Value::Array(row.iter().map(rational_to_json).collect())
}

pub fn h_to_json(p: &HPolytope) -> Value {
    json!({
        "type": "H",
        "A": p.matrix().iter().map(|r| row_json(r)).collect::<Vec<_>>(),
        "a": row_json(p.rhs()),
    })
}

pub fn v_to_json(q: &VPolytope) -> Value {
    json!({
        "type": "V",
        "B": q.columns_matrix().iter().map(|r| row_json(r)).collect::<Vec<_>>(),
    })
}
