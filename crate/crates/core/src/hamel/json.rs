//! JSON form of a Hamel function.
//!
//! ```json
//! {
//!   "basis": [{"label": "e1", "embedding": 1.0}, {"label": "e2", "embedding": 1.4142135623730951}],
//!   "assignments": {"e2": "1/1"},
//!   "scale": 6.283185307179586
//! }
//! ```
//!
//! `scale` is optional and defaults to 1. The canonical form lists
//! assignments in basis order, omits zero assignments, writes every rational
//! as `p/q`, and omits a unit scale.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::{AdditiveMap, HamelBasisSpec, HamelFunction, Symbol};
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolDoc {
    label: String,
    embedding: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    basis: Vec<SymbolDoc>,
    #[serde(default)]
    assignments: BTreeMap<String, String>,
    #[serde(default)]
    scale: Option<f64>,
}

/// Assignments in basis order.
#[derive(Debug, Clone, PartialEq)]
struct OrderedAssignments(Vec<(String, Rational)>);

impl Serialize for OrderedAssignments {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (label, q) in &self.0 {
            map.serialize_entry(label, q)?;
        }
        map.end()
    }
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

/// A validated Hamel function in its canonical document shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamelDocument {
    basis: Vec<SymbolDoc>,
    assignments: OrderedAssignments,
    #[serde(skip_serializing_if = "is_unit")]
    scale: f64,
}

impl HamelDocument {
    /// Parses and validates. Errors name the offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let symbols = raw
            .basis
            .iter()
            .map(|s| Symbol {
                label: s.label.clone(),
                embedding: s.embedding,
            })
            .collect();
        let basis = HamelBasisSpec::new(symbols)?;
        let mut values: Vec<Option<Rational>> = vec![None; basis.len()];
        for (label, text) in &raw.assignments {
            let i = basis
                .index_of(label)
                .ok_or_else(|| Error::UnknownSymbol(format!("assignments.{label}")))?;
            let q: Rational = text.parse().map_err(|e| match e {
                Error::InvalidRational { input, reason } => Error::InvalidRational {
                    input,
                    reason: format!("assignments.{label}: {reason}"),
                },
                other => other,
            })?;
            values[i] = Some(q);
        }
        let scale = raw.scale.unwrap_or(1.0);
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::InvalidInput(format!(
                "scale must be finite and nonzero, got {scale}"
            )));
        }
        let assignments = values
            .into_iter()
            .enumerate()
            .filter_map(|(i, q)| {
                q.filter(|q| !q.is_zero())
                    .map(|q| (basis.symbols()[i].label.clone(), q))
            })
            .collect();
        Ok(HamelDocument {
            basis: raw.basis,
            assignments: OrderedAssignments(assignments),
            scale,
        })
    }

    pub fn from_function(f: &HamelFunction) -> Self {
        let basis = f
            .basis
            .symbols()
            .iter()
            .map(|s| SymbolDoc {
                label: s.label.clone(),
                embedding: s.embedding,
            })
            .collect();
        let assignments = f
            .map
            .assignments()
            .map(|(i, q)| (f.basis.symbols()[i].label.clone(), q.clone()))
            .collect();
        HamelDocument {
            basis,
            assignments: OrderedAssignments(assignments),
            scale: f.scale,
        }
    }

    pub fn to_function(&self) -> Result<HamelFunction> {
        let symbols = self
            .basis
            .iter()
            .map(|s| Symbol {
                label: s.label.clone(),
                embedding: s.embedding,
            })
            .collect();
        let basis = Arc::new(HamelBasisSpec::new(symbols)?);
        let mut pairs = Vec::new();
        for (label, q) in &self.assignments.0 {
            let i = basis
                .index_of(label)
                .ok_or_else(|| Error::UnknownSymbol(label.clone()))?;
            pairs.push((i, q.clone()));
        }
        let map = AdditiveMap::new(basis.len(), pairs)?;
        HamelFunction::new(basis, map, self.scale)
    }

    /// Pretty-printed canonical JSON with a trailing newline.
    pub fn canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamel::{ExactEvaluator, QVector};

    const WILD: &str = r#"{"basis": [{"label": "e1", "embedding": 1.0},
        {"label": "e2", "embedding": 1.4142135623730951}],
        "assignments": {"e2": "1/1"}}"#;

    #[test]
    fn parse_and_evaluate() {
        let f = HamelDocument::parse(WILD).unwrap().to_function().unwrap();
        assert_eq!(f.scale, 1.0);
        assert_eq!(f.map.evaluate(&QVector::unit(1)).unwrap(), Rational::one());
        assert_eq!(f.map.evaluate(&QVector::unit(0)).unwrap(), Rational::zero());
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let messy = r#"{"assignments": {"b": "2/4", "a": "0", "c": "-3"}, "scale": 1,
            "basis": [{"embedding": 1.0, "label": "c"}, {"label": "b", "embedding": 2.5}, {"label": "a", "embedding": 0.1}]}"#;
        let doc = HamelDocument::parse(messy).unwrap();
        let once = doc.canonical_json();
        let twice = HamelDocument::parse(&once).unwrap().canonical_json();
        assert_eq!(once, twice);
        let v: serde_json::Value = serde_json::from_str(&once).unwrap();
        assert_eq!(v["assignments"], serde_json::json!({"c": "-3/1", "b": "1/2"}));
        assert!(once.find("\"c\": \"-3/1\"").unwrap() < once.find("\"b\": \"1/2\"").unwrap());
        assert!(v.get("scale").is_none());
        let f = doc.to_function().unwrap();
        assert_eq!(HamelDocument::from_function(&f).canonical_json(), once);
    }

    #[test]
    fn scale_survives_round_trip() {
        let text = r#"{"basis": [{"label": "e1", "embedding": 1.0}], "assignments": {"e1": "1/7"}, "scale": 6.283185307179586}"#;
        let once = HamelDocument::parse(text).unwrap().canonical_json();
        assert!(once.contains("\"scale\": 6.283185307179586"));
        assert_eq!(HamelDocument::parse(&once).unwrap().canonical_json(), once);
    }

    #[test]
    fn validation_errors() {
        let dup =
            r#"{"basis": [{"label": "e1", "embedding": 1.0}, {"label": "e1", "embedding": 2.0}], "assignments": {}}"#;
        let e = HamelDocument::parse(dup).unwrap_err();
        assert!(e.to_string().contains("duplicate label e1"), "{e}");

        let zero_den = r#"{"basis": [{"label": "e1", "embedding": 1.0}], "assignments": {"e1": "2/0"}}"#;
        let e = HamelDocument::parse(zero_den).unwrap_err();
        assert!(e.to_string().contains("denominator must be positive"), "{e}");

        let unknown = r#"{"basis": [{"label": "e1", "embedding": 1.0}], "assignments": {"e9": "1"}}"#;
        assert!(matches!(HamelDocument::parse(unknown), Err(Error::UnknownSymbol(_))));

        let e = HamelDocument::parse("{\"basis\": [}").unwrap_err();
        assert!(e.to_string().contains("line 1"), "{e}");
    }
}
