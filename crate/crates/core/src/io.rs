//! JSON interchange for maps, fields, certificates, refutations and orbits.
//!
//! Exact numbers are written as decimal strings (`"-3/2"`); complex numbers as
//! `[re, im]` pairs of doubles.

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::automorphism::{HenonForm, JungWord, PolyMap};
use crate::conjugacy::{ConjugacyCertificate, Refutation, ResidualReport};
use crate::error::{Error, Result};
use crate::field::{Field, FieldSpec};
use crate::periodic::{PeriodicOrbit, SpectrumEntry};

/// `{"field": "Q" | {"minpoly": [...], "root": k}, "x": "...", "y": "..."}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapJson {
    #[serde(default = "rationals_json")]
    pub field: Value,
    pub x: String,
    pub y: String,
}

fn rationals_json() -> Value {
    Value::String("Q".into())
}

fn integer(v: &Value) -> Result<BigInt> {
    let text = match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        other => return Err(Error::InvalidField(format!("minimal polynomial coefficient {other} is not an integer"))),
    };
    text.parse().map_err(|_| Error::InvalidField(format!("minimal polynomial coefficient {text:?} is not an integer")))
}

pub fn field_from_json(v: &Value) -> Result<Field> {
    match v {
        Value::String(s) if s == "Q" => Ok(FieldSpec::rationals()),
        Value::Object(o) => {
            let minpoly = o
                .get("minpoly")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidField("missing \"minpoly\" array".into()))?
                .iter()
                .map(integer)
                .collect::<Result<Vec<_>>>()?;
            let root = match o.get("root") {
                None | Some(Value::Null) => None,
                Some(r) => Some(r.as_u64().ok_or_else(|| Error::InvalidField("\"root\" must be a nonnegative integer".into()))? as usize),
            };
            FieldSpec::extension(minpoly, root)
        }
        other => Err(Error::InvalidField(format!("expected \"Q\" or an object, got {other}"))),
    }
}

pub fn field_to_json(field: &Field) -> Value {
    match field.minpoly() {
        None => rationals_json(),
        Some(p) => json!({
            "minpoly": p.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "root": field.root_index(),
        }),
    }
}

impl MapJson {
    pub fn from_map(f: &PolyMap) -> Self {
        MapJson { field: field_to_json(f.field()), x: f.p().to_string(), y: f.q().to_string() }
    }

    pub fn to_map(&self) -> Result<PolyMap> {
        let field = field_from_json(&self.field)?;
        PolyMap::parse(&self.x, &self.y, &field)
    }
}

pub fn parse_map(text: &str) -> Result<PolyMap> {
    let m: MapJson = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("map JSON: {e}")))?;
    m.to_map()
}

pub fn map_to_json(f: &PolyMap) -> Value {
    serde_json::to_value(MapJson::from_map(f)).expect("map JSON is always serializable")
}

pub fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn jung_word_json(w: &JungWord) -> Value {
    Value::Array(
        w.factors
            .iter()
            .map(|f| {
                let m = f.to_map();
                json!({ "kind": format!("{:?}", f.kind()).to_lowercase(), "x": m.p().to_string(), "y": m.q().to_string() })
            })
            .collect(),
    )
}

pub fn henon_form_json(h: &HenonForm) -> Value {
    json!({
        "field": field_to_json(h.field()),
        "factors": h.factors.iter().map(|f| json!({ "a": f.a.to_string(), "p": f.p.to_string(), "degree": f.degree() })).collect::<Vec<_>>(),
        "conjugator": map_to_json(&h.conjugator),
        "lambda1": h.lambda1(),
        "jacobian": h.jacobian().to_string(),
    })
}

pub fn certificate_json(cert: &ConjugacyCertificate, dedup_class_size: usize) -> Value {
    json!({
        "psi": map_to_json(&cert.psi),
        "field": field_to_json(cert.field()),
        "verified": cert.checked_identity,
        "dedup_class_size": dedup_class_size,
        "degree": cert.psi.degree(),
        "automorphism_witness": jung_word_json(&cert.automorphism_witness),
    })
}

pub fn refutation_json(r: &Refutation) -> Value {
    json!({ "reason": r.reason, "numeric": r.is_numeric(), "data": r.data })
}

pub fn residual_json(r: &ResidualReport) -> Value {
    json!({ "route": r.route, "variable": r.variable, "eliminant": r.eliminant })
}

pub fn orbit_json(o: &PeriodicOrbit) -> Value {
    json!({
        "period": o.period,
        "points": o.points.iter().map(|&(x, y)| json!([complex_json(x), complex_json(y)])).collect::<Vec<_>>(),
        "multipliers": [complex_json(o.multipliers.0), complex_json(o.multipliers.1)],
        "kind": o.kind,
        "residual": o.residual,
        "multiplicity": o.multiplicity,
    })
}

pub fn spectrum_json(s: &[SpectrumEntry]) -> Value {
    Value::Array(
        s.iter()
            .map(|e| json!({ "period": e.period, "multipliers": [complex_json(e.multipliers.0), complex_json(e.multipliers.1)] }))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_round_trip() {
        let text = r#"{"field": {"minpoly": ["-2", 0, 1], "root": 0}, "x": "t*y", "y": "x + 1/2*y^3"}"#;
        let f = parse_map(text).unwrap();
        assert_eq!(f.field().minpoly().unwrap().len(), 3);
        let back: MapJson = serde_json::from_value(map_to_json(&f)).unwrap();
        assert_eq!(back.to_map().unwrap(), f);
        assert_eq!(map_to_json(&f)["field"]["minpoly"], json!(["-2", "0", "1"]));
    }

    #[test]
    fn default_field_is_rationals() {
        let f = parse_map(r#"{"x": "y", "y": "x + y^2"}"#).unwrap();
        assert!(f.field().is_rationals());
        assert_eq!(map_to_json(&f)["field"], json!("Q"));
    }

    #[test]
    fn malformed_fields_are_rejected() {
        assert!(parse_map(r#"{"field": "R", "x": "y", "y": "x"}"#).is_err());
        assert!(parse_map(r#"{"field": {"minpoly": [1.5, 1]}, "x": "y", "y": "x"}"#).is_err());
        assert!(parse_map(r#"{"field": {"minpoly": [-1, 0, 1]}, "x": "y", "y": "x"}"#).is_err());
    }
}
