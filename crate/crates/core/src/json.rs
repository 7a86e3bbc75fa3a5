//! JSON encodings: rationals as `"p/q"` strings, matrices as nested arrays.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, IntegerMatrix, RationalMatrix, SquaredMagnitude};
use crate::lattice::{Lattice, Sublattice};

#[derive(Serialize, Deserialize)]
struct LatticeDoc {
    ambient_dim: usize,
    basis: Vec<Vec<RationalText>>,
}

/// Rational written either as a string or as a JSON integer.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RationalText {
    Text(String),
    Int(i64),
}

#[derive(Serialize, Deserialize)]
struct SublatticeDoc {
    coords: Vec<Vec<i64>>,
}

pub fn rational_matrix_to_strings(m: &RationalMatrix) -> Vec<Vec<String>> {
    m.iter_rows().map(|r| r.iter().map(format_rational).collect()).collect()
}

pub fn lattice_to_value(l: &Lattice) -> Value {
    json!({
        "ambient_dim": l.ambient_dim(),
        "basis": rational_matrix_to_strings(l.basis()),
    })
}

pub fn lattice_from_value(v: &Value) -> Result<Lattice> {
    let doc: LatticeDoc =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("lattice JSON: {e}")))?;
    let rows = doc
        .basis
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| match x {
                    RationalText::Text(s) => parse_rational(&s),
                    RationalText::Int(i) => Ok(BigInt::from(i).into()),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let basis = RationalMatrix::from_rows(&rows)?;
    if basis.cols() != doc.ambient_dim {
        return Err(Error::Parse(format!(
            "basis rows have {} entries but ambient_dim is {}",
            basis.cols(),
            doc.ambient_dim
        )));
    }
    Lattice::new(basis)
}

pub fn lattice_from_str(s: &str) -> Result<Lattice> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("lattice JSON: {e}")))?;
    lattice_from_value(&v)
}

pub fn integer_matrix_to_i64(m: &IntegerMatrix) -> Result<Vec<Vec<i64>>> {
    m.to_i64_rows()
        .ok_or_else(|| Error::capacity("integer entry does not fit in a 64-bit JSON number"))
}

pub fn sublattice_to_value(s: &Sublattice) -> Result<Value> {
    Ok(json!({ "coords": integer_matrix_to_i64(s.coords())? }))
}

/// Parses `{ "coords": [[...]] }` relative to `host`.
pub fn sublattice_from_value(host: &Lattice, v: &Value) -> Result<Sublattice> {
    let doc: SublatticeDoc =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("sublattice JSON: {e}")))?;
    let rows: Vec<Vec<BigInt>> = doc.coords.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
    host.sublattice(&IntegerMatrix::from_rows(&rows)?)
}

pub(crate) fn serialize_integer_matrix<S: Serializer>(m: &IntegerMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Value>> = m
        .iter_rows()
        .map(|r| {
            r.iter()
                .map(|x| match x.to_i64() {
                    Some(i) => Value::from(i),
                    None => Value::from(x.to_string()),
                })
                .collect()
        })
        .collect();
    rows.serialize(s)
}

pub(crate) fn serialize_squared<S: Serializer>(m: &SquaredMagnitude, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&m.to_string())
}
