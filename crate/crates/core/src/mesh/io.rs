//! Mesh file format.
//!
//! JSON object with keys:
//!   "vertices"       array of [x, y]
//!   "triangles"      array of [i, j, k]
//!   "boundary_loops" array of vertex-index arrays
//!   "alpha"          array, one value per vertex
//!   "beta"           object mapping boundary vertex index -> value
//!   "metric"         "euclidean" | {"conformal": "poincare"}
//!   "metric_scale"   optional positive number, omitted when 1
//!
//! All reals are IEEE-754 doubles in decimal.

use super::{ConformalKind, MeshError, Metric, WeightedMesh};
use crate::scalar::{cast, Real};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub fn mesh_to_json<T: Real>(mesh: &WeightedMesh<T>) -> Value {
    let f = |x: T| x.to_f64().expect("scalar -> f64");
    let vertices: Vec<Value> = mesh.vertices().iter().map(|p| json!([f(p[0]), f(p[1])])).collect();
    let triangles: Vec<Value> =
        mesh.triangles().iter().map(|t| json!([t[0], t[1], t[2]])).collect();
    let loops: Vec<Value> = mesh.boundary_loops().iter().map(|l| json!(l)).collect();
    let alpha: Vec<Value> = mesh.alpha().iter().map(|&a| json!(f(a))).collect();
    let mut beta = Map::new();
    for (v, &b) in mesh.beta().iter().enumerate() {
        if mesh.is_boundary_vertex(v) {
            beta.insert(v.to_string(), json!(f(b)));
        }
    }
    let metric = match mesh.metric() {
        Metric::Euclidean => json!("euclidean"),
        Metric::Conformal(ConformalKind::Poincare) => json!({"conformal": "poincare"}),
    };
    let mut obj = Map::new();
    obj.insert("vertices".into(), Value::Array(vertices));
    obj.insert("triangles".into(), Value::Array(triangles));
    obj.insert("boundary_loops".into(), Value::Array(loops));
    obj.insert("alpha".into(), Value::Array(alpha));
    obj.insert("beta".into(), Value::Object(beta));
    obj.insert("metric".into(), metric);
    let scale = f(mesh.metric_scale());
    if scale != 1.0 {
        obj.insert("metric_scale".into(), json!(scale));
    }
    Value::Object(obj)
}

pub fn mesh_from_json<T: Real>(text: &str) -> Result<WeightedMesh<T>, MeshError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| MeshError::Json(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| MeshError::Json("expected object".into()))?;
    let get = |key: &str| obj.get(key).ok_or_else(|| MeshError::Json(format!("missing {key}")));

    let vertices: Vec<[T; 2]> = as_array(get("vertices")?)?
        .iter()
        .map(|p| {
            let pair = as_array(p)?;
            if pair.len() != 2 {
                return Err(MeshError::Json("vertex must be [x, y]".into()));
            }
            Ok([cast::<T>(as_f64(&pair[0])?), cast::<T>(as_f64(&pair[1])?)])
        })
        .collect::<Result<_, _>>()?;

    let triangles: Vec<[usize; 3]> = as_array(get("triangles")?)?
        .iter()
        .map(|t| {
            let tri = as_array(t)?;
            if tri.len() != 3 {
                return Err(MeshError::Json("triangle must be [i, j, k]".into()));
            }
            Ok([as_usize(&tri[0])?, as_usize(&tri[1])?, as_usize(&tri[2])?])
        })
        .collect::<Result<_, _>>()?;

    let loops: Vec<Vec<usize>> = as_array(get("boundary_loops")?)?
        .iter()
        .map(|l| as_array(l)?.iter().map(as_usize).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;

    let alpha: Vec<T> = as_array(get("alpha")?)?
        .iter()
        .map(|a| Ok(cast::<T>(as_f64(a)?)))
        .collect::<Result<_, _>>()?;

    let mut beta = vec![T::zero(); vertices.len()];
    let beta_obj = get("beta")?
        .as_object()
        .ok_or_else(|| MeshError::Json("beta must be an object".into()))?;
    for (k, v) in beta_obj {
        let idx: usize =
            k.parse().map_err(|_| MeshError::Json(format!("bad beta key {k}")))?;
        if idx >= vertices.len() {
            return Err(MeshError::Json(format!("beta key {idx} out of range")));
        }
        beta[idx] = cast::<T>(as_f64(v)?);
    }

    let metric = parse_metric(get("metric")?)?;
    let scale = match obj.get("metric_scale") {
        None => T::one(),
        Some(v) => cast::<T>(as_f64(v)?),
    };

    WeightedMesh::from_parts_with_scale(
        vertices,
        triangles,
        Some(loops),
        alpha,
        beta,
        metric,
        scale,
    )
}

/// Hex digest of the canonical JSON encoding; identifies a mesh in reports.
pub fn mesh_hash<T: Real>(mesh: &WeightedMesh<T>) -> String {
    let text = mesh_to_json(mesh).to_string();
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn parse_metric(v: &Value) -> Result<Metric, MeshError> {
    match v {
        Value::String(s) if s == "euclidean" => Ok(Metric::Euclidean),
        Value::Object(m) => match m.get("conformal").and_then(|c| c.as_str()) {
            Some("poincare") => Ok(Metric::Conformal(ConformalKind::Poincare)),
            _ => Err(MeshError::Json("unknown conformal metric".into())),
        },
        _ => Err(MeshError::Json("unknown metric".into())),
    }
}

fn as_array(v: &Value) -> Result<&Vec<Value>, MeshError> {
    v.as_array().ok_or_else(|| MeshError::Json("expected array".into()))
}

fn as_f64(v: &Value) -> Result<f64, MeshError> {
    v.as_f64().ok_or_else(|| MeshError::Json("expected number".into()))
}

fn as_usize(v: &Value) -> Result<usize, MeshError> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| MeshError::Json("expected index".into()))
}
