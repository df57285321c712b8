//! JSON forms of field elements, lattices, scenes, bodies and reports.
//!
//! Numbers are exact strings: a field element is `{"r": "p/q", "s": "p/q"}`
//! with `s` omitted when zero. Lattice bases are lists of columns; other
//! matrices are lists of rows. `D` is declared once per document.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::constructor::{CommensurableTrace, Construction, DenseTrace, IntermediateTrace, Trace};
use crate::field::{format_rational, parse_rational, FieldElement, FieldError, QuadField, Rational};
use crate::geometry::{Body, Frame, GeometryError, HalfOpenBox};
use crate::lattice::{Lattice, LatticeError};
use crate::matrix::Matrix;
use crate::nofd::UnboundednessWitness;
use crate::structure::ClosureDecomposition;
use crate::verifier::PackingReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

pub fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))
}

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    v.get(key).ok_or_else(|| schema(format!("missing field \"{key}\"")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, IoError> {
    v.as_array().ok_or_else(|| schema(format!("{what} must be an array")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize, IoError> {
    v.as_u64()
        .and_then(|x| usize::try_from(x).ok())
        .ok_or_else(|| schema(format!("{what} must be a nonnegative integer")))
}

fn rational_from_json(v: &Value) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(BigInt::from(n.as_i64().unwrap()))),
        _ => Err(FieldError::MalformedRational(v.to_string()).into()),
    }
}

pub fn integer_to_json(n: &BigInt) -> Value {
    n.to_i64().map_or_else(|| Value::String(n.to_string()), Value::from)
}

fn integers_to_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(integer_to_json).collect())
}

pub fn rational_to_json(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn field_element_to_json(x: &FieldElement) -> Value {
    let mut obj = Map::new();
    obj.insert("r".into(), rational_to_json(x.rational_part()));
    if !x.is_rational() {
        obj.insert("s".into(), rational_to_json(x.irrational_part()));
    }
    Value::Object(obj)
}

/// Accepts `{"r", "s"}` objects, and bare rationals (`"p/q"` or integers).
pub fn field_element_from_json(v: &Value, field: &QuadField) -> Result<FieldElement, IoError> {
    match v {
        Value::Object(obj) => {
            let r = obj.get("r").map(rational_from_json).transpose()?.unwrap_or_default();
            let s = obj.get("s").map(rational_from_json).transpose()?.unwrap_or_default();
            Ok(field.element(r, s)?)
        }
        _ => Ok(FieldElement::from_rational(rational_from_json(v)?)),
    }
}

fn vector_to_json(v: &[FieldElement]) -> Value {
    Value::Array(v.iter().map(field_element_to_json).collect())
}

fn vectors_to_json(vs: &[Vec<FieldElement>]) -> Value {
    Value::Array(vs.iter().map(|v| vector_to_json(v)).collect())
}

fn vector_from_json(v: &Value, field: &QuadField, what: &str) -> Result<Vec<FieldElement>, IoError> {
    as_array(v, what)?
        .iter()
        .map(|x| field_element_from_json(x, field))
        .collect()
}

pub fn matrix_rows_to_json(m: &Matrix) -> Value {
    vectors_to_json(&m.row_vecs())
}

pub fn matrix_columns_to_json(m: &Matrix) -> Value {
    vectors_to_json(&m.columns())
}

pub fn matrix_from_rows_json(v: &Value, field: &QuadField, dim: usize) -> Result<Matrix, IoError> {
    let rows = as_array(v, "matrix")?
        .iter()
        .map(|r| vector_from_json(r, field, "matrix row"))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(IoError::Dimension(format!("expected a {dim}×{dim} matrix")));
    }
    Ok(Matrix::from_rows(rows))
}

pub fn lattice_to_json(lat: &Lattice) -> Value {
    json!({ "dim": lat.dim(), "basis": matrix_columns_to_json(lat.basis()) })
}

/// `dim` defaults to the length of the first column when absent.
pub fn lattice_from_json(v: &Value, field: &QuadField, dim: Option<usize>) -> Result<Lattice, IoError> {
    let cols = as_array(get(v, "basis")?, "basis")?
        .iter()
        .map(|c| vector_from_json(c, field, "basis column"))
        .collect::<Result<Vec<_>, _>>()?;
    let own = v.get("dim").map(|x| as_usize(x, "dim")).transpose()?;
    let d = match (dim, own) {
        (Some(a), Some(b)) if a != b => {
            return Err(IoError::Dimension(format!("lattice dim {b} in a {a}-dimensional scene")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => cols.first().map_or(0, Vec::len),
    };
    if let Some(c) = cols.iter().find(|c| c.len() != d) {
        return Err(IoError::Dimension(format!(
            "basis column of length {} in dimension {d}",
            c.len()
        )));
    }
    if cols.len() != d {
        return Err(IoError::Dimension(format!(
            "{} basis columns in dimension {d}",
            cols.len()
        )));
    }
    Ok(Lattice::from_columns(d, &cols)?)
}

/// Reads `"D"` (integer or null/absent).
pub fn field_from_json(v: &Value) -> Result<QuadField, IoError> {
    match v.get("D") {
        None | Some(Value::Null) => Ok(QuadField::rational()),
        Some(Value::Number(n)) => {
            let d = n.as_u64().ok_or(FieldError::BadRadicand(0))?;
            Ok(QuadField::new(d)?)
        }
        Some(other) => Err(schema(format!("\"D\" must be an integer or null, got {other}"))),
    }
}

fn field_to_json(field: Option<u64>) -> Value {
    field.map_or(Value::Null, Value::from)
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub d: usize,
    pub field: QuadField,
    pub l: Lattice,
    pub m: Lattice,
    pub search_cap: Option<u64>,
}

pub fn parse_scene(text: &str) -> Result<Scene, IoError> {
    let v = parse_json(text)?;
    scene_from_json(&v)
}

pub fn scene_from_json(v: &Value) -> Result<Scene, IoError> {
    let d = as_usize(get(v, "d")?, "d")?;
    if d == 0 {
        return Err(IoError::Dimension("d must be positive".into()));
    }
    let field = field_from_json(v)?;
    let l = lattice_from_json(get(v, "L")?, &field, Some(d))?;
    let m = lattice_from_json(get(v, "M")?, &field, Some(d))?;
    let search_cap = v.get("cap").map(|c| as_usize(c, "cap").map(|x| x as u64)).transpose()?;
    Ok(Scene {
        d,
        field,
        l,
        m,
        search_cap,
    })
}

pub fn scene_to_json(scene: &Scene) -> Value {
    let mut v = json!({
        "d": scene.d,
        "D": field_to_json(scene.field.radicand()),
        "L": { "basis": matrix_columns_to_json(scene.l.basis()) },
        "M": { "basis": matrix_columns_to_json(scene.m.basis()) },
    });
    if let Some(cap) = scene.search_cap {
        v["cap"] = Value::from(cap);
    }
    v
}

fn box_to_json(b: &HalfOpenBox) -> Value {
    json!({ "lo": vector_to_json(b.lo()), "hi": vector_to_json(b.hi()) })
}

fn boxes_to_json(bs: &[HalfOpenBox]) -> Value {
    Value::Array(bs.iter().map(box_to_json).collect())
}

/// First radicand among the given elements.
pub fn radicand_of<'a>(xs: impl IntoIterator<Item = &'a FieldElement>) -> Option<u64> {
    xs.into_iter().find_map(FieldElement::radicand)
}

pub fn body_to_json(body: &Body) -> Value {
    let entries = body
        .boxes()
        .iter()
        .flat_map(|b| b.lo().iter().chain(b.hi()))
        .chain(body.transform_to_original().entries());
    json!({
        "dim": body.dim(),
        "D": field_to_json(radicand_of(entries)),
        "frame": body.frame().name(),
        "transform_to_original": matrix_rows_to_json(body.transform_to_original()),
        "boxes": boxes_to_json(body.boxes()),
        "volume": field_element_to_json(&body.volume_original()),
    })
}

/// `field` overrides a missing `"D"` in the document.
pub fn body_from_json(v: &Value, fallback: &QuadField) -> Result<Body, IoError> {
    let field = match v.get("D") {
        None | Some(Value::Null) => *fallback,
        _ => field_from_json(v)?,
    };
    let dim = as_usize(get(v, "dim")?, "dim")?;
    let frame = match v.get("frame").and_then(Value::as_str) {
        None | Some("original") => Frame::Original,
        Some("canonical") => Frame::Canonical,
        Some(other) => return Err(schema(format!("unknown frame \"{other}\""))),
    };
    let transform = match v.get("transform_to_original") {
        Some(t) => matrix_from_rows_json(t, &field, dim)?,
        None => Matrix::identity(dim),
    };
    let mut boxes = Vec::new();
    for (i, b) in as_array(get(v, "boxes")?, "boxes")?.iter().enumerate() {
        let lo = vector_from_json(get(b, "lo")?, &field, "lo")?;
        let hi = vector_from_json(get(b, "hi")?, &field, "hi")?;
        if lo.len() != dim || hi.len() != dim {
            return Err(IoError::Dimension(format!("box {i} is not {dim}-dimensional")));
        }
        boxes.push(HalfOpenBox::new(lo, hi).ok_or(GeometryError::EmptyBox(i))?);
    }
    Ok(Body::new(dim, boxes, frame, transform)?)
}

pub fn decomposition_to_json(dec: &ClosureDecomposition) -> Value {
    json!({
        "case": dec.case_tag.name(),
        "m": dec.m,
        "n": dec.n,
        "T": matrix_rows_to_json(&dec.t),
        "W": matrix_columns_to_json(&dec.w_basis),
    })
}

fn dense_trace_to_json(t: &DenseTrace) -> Value {
    json!({
        "N": t.n_grid,
        "side": rational_to_json(&t.side),
        "margin": rational_to_json(&t.margin),
        "small_cells": boxes_to_json(&t.small_cells),
        "large_cells": boxes_to_json(&t.large_cells),
        "shifts_l": Value::Array(t.shifts_l.iter().map(|v| integers_to_json(v)).collect()),
        "shifts_m": Value::Array(t.shifts_m.iter().map(|v| integers_to_json(v)).collect()),
        "M_basis": matrix_columns_to_json(&t.m_basis),
    })
}

fn integer_points_to_json(ps: &[Vec<BigInt>]) -> Value {
    Value::Array(ps.iter().map(|p| integers_to_json(p)).collect())
}

fn commensurable_trace_to_json(t: &CommensurableTrace) -> Value {
    json!({
        "H": lattice_to_json(&t.h_basis),
        "group_order": integer_to_json(&t.group_order),
        "g_reps": integer_points_to_json(&t.g_reps),
        "h_reps": integer_points_to_json(&t.h_reps),
        "e_points": integer_points_to_json(&t.e_points),
    })
}

fn intermediate_trace_to_json(t: &IntermediateTrace) -> Value {
    json!({
        "m": t.m,
        "n": t.n,
        "L1": lattice_to_json(&t.l1),
        "L2": lattice_to_json(&t.l2),
        "M1": lattice_to_json(&t.m1),
        "M2": lattice_to_json(&t.m2),
        "det_L1": integer_to_json(&t.det_l1),
        "det_M1": integer_to_json(&t.det_m1),
        "L2_prime": lattice_to_json(&t.l2_prime),
        "M2_prime": lattice_to_json(&t.m2_prime),
        "J1": vectors_to_json(&t.j1),
        "K1": vectors_to_json(&t.k1),
        "J2": vectors_to_json(&t.j2),
        "K2": vectors_to_json(&t.k2),
        "pairing_l": t.pairing_l,
        "pairing_m": t.pairing_m,
        "translates": vectors_to_json(&t.translates),
        "E": construction_to_json(&t.e),
    })
}

pub fn trace_to_json(trace: &Trace) -> Value {
    let mut v = match trace {
        Trace::Dense(t) => dense_trace_to_json(t),
        Trace::Commensurable(t) => commensurable_trace_to_json(t),
        Trace::Intermediate(t) => intermediate_trace_to_json(t),
    };
    v["case"] = Value::from(trace.case_tag().name());
    v
}

pub fn construction_to_json(c: &Construction) -> Value {
    let mut trace = trace_to_json(&c.trace);
    trace["working_frame"] = matrix_rows_to_json(&c.working_frame);
    json!({
        "F": body_to_json(&c.body),
        "trace": trace,
        "volumes": {
            "F": field_element_to_json(&c.volumes.body),
            "L": field_element_to_json(&c.volumes.covolume_l),
            "M": field_element_to_json(&c.volumes.covolume_m),
        },
    })
}

pub fn report_to_json(r: &PackingReport) -> Value {
    json!({
        "is_packing": r.is_packing,
        "is_tiling": r.is_tiling,
        "body_volume": field_element_to_json(&r.body_volume),
        "lattice_covolume": field_element_to_json(&r.lattice_covolume),
        "violations": r.violations.iter().map(|v| json!({
            "boxes": [v.first, v.second],
            "lambda": integers_to_json(&v.coefficients),
        })).collect::<Vec<_>>(),
    })
}

pub fn witness_to_json(w: &UnboundednessWitness) -> Value {
    json!({
        "r": rational_to_json(&w.r),
        "R": rational_to_json(&w.big_r),
        "count_n": integer_to_json(&w.count_n),
        "count_m": integer_to_json(&w.count_m),
    })
}
