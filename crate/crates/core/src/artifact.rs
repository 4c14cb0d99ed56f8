//! JSON artifact envelope shared by every report.
//!
//! Every artifact is a single JSON object
//! `{"schema": "geoblock/v1", "kind": <kind>, "data": <payload>}`.
//! Payloads are the serde forms of the domain types; re-parsing `data`
//! with [`Artifact::decode`] recovers them.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::blocking::{DisjointFamily, LightRay, Verification};
use crate::entropy::{CountingReport, GrowthSeries, ManeEstimate};
use crate::{Error, Result};

pub const SCHEMA_ID: &str = "geoblock/v1";

/// Artifact kinds written by the command-line front end.
pub const KINDS: &[&str] = &[
    "enumerate",
    "block",
    "verify",
    "classify",
    "growth",
    "entropy",
    "scan",
    "error",
];

#[derive(Serialize)]
struct Envelope<'a, T: ?Sized> {
    schema: &'a str,
    kind: &'a str,
    data: &'a T,
}

/// Serializes `data` under the v1 envelope as pretty JSON with a trailing newline.
pub fn envelope<T: Serialize + ?Sized>(kind: &str, data: &T) -> Result<String> {
    let env = Envelope { schema: SCHEMA_ID, kind, data };
    let mut text = serde_json::to_string_pretty(&env)
        .map_err(|e| Error::Invalid(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub schema: String,
    pub kind: String,
    pub data: Value,
}

impl Artifact {
    /// Parses an artifact and checks the schema identifier and kind.
    pub fn parse(text: &str) -> Result<Self> {
        let art: Artifact = serde_json::from_str(text)
            .map_err(|e| Error::Invalid(format!("corrupt artifact: {e}")))?;
        if art.schema != SCHEMA_ID {
            return Err(Error::Invalid(format!(
                "unsupported schema `{}` (expected `{SCHEMA_ID}`)",
                art.schema
            )));
        }
        if !KINDS.contains(&art.kind.as_str()) {
            return Err(Error::Invalid(format!("unknown artifact kind `{}`", art.kind)));
        }
        Ok(art)
    }

    pub fn decode<T: DeserializeOwned>(&self) -> Result<T> {
        T::deserialize(&self.data)
            .map_err(|e| Error::Invalid(format!("`{}` payload does not decode: {e}", self.kind)))
    }
}

/// Payload of an `enumerate` artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerateData {
    pub space: String,
    pub source: String,
    pub target: String,
    pub horizon: f64,
    /// All geodesic segments rather than light rays only.
    pub geodesics: bool,
    pub count: usize,
    pub rays: Vec<LightRay>,
    /// Set when a numerically found census is a continuum of loops.
    pub continuum: Option<Continuum>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Continuum {
    pub length: f64,
    pub hits: usize,
    pub scanned: usize,
}

/// Payload of `block` and `verify` artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockData<P> {
    pub space: String,
    pub horizon: f64,
    pub m_t: usize,
    pub verification: Verification<P>,
    /// Pairwise interior-disjoint rays, a lower bound for `b(x, y)`.
    pub lower_bound: Option<DisjointFamily>,
    /// Blockers witnessing at least one hit.
    pub realized: Option<Vec<P>>,
}

impl<P> BlockData<P> {
    /// Number of blockers used by the certificate.
    pub fn upper_bound(&self) -> Option<usize> {
        self.verification.certificate().map(|c| c.used_blockers().len())
    }
}

/// Payload of an `entropy` artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyData {
    pub space: String,
    pub series: GrowthSeries,
    pub estimate: ManeEstimate,
    /// Exponential growth rate from an independent spectral computation.
    pub oracle_rate: Option<f64>,
    pub oracle_entropy: Option<f64>,
    pub counting: Option<CountingReport>,
}

/// Payload of an `error` artifact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorData {
    pub code: String,
    pub message: String,
}

impl From<&Error> for ErrorData {
    fn from(e: &Error) -> Self {
        Self { code: e.code().to_string(), message: e.to_string() }
    }
}

/// JSON Schema (draft 2020-12) for the v1 envelope and its shared pieces.
pub fn json_schema() -> &'static str {
    SCHEMA_TEXT
}

const SCHEMA_TEXT: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "$id": "geoblock/v1",
  "title": "geoblock artifact",
  "type": "object",
  "required": ["schema", "kind", "data"],
  "additionalProperties": false,
  "properties": {
    "schema": { "const": "geoblock/v1" },
    "kind": {
      "enum": ["enumerate", "block", "verify", "classify", "growth", "entropy", "scan", "error"]
    },
    "data": { "type": ["object", "array"] }
  },
  "$defs": {
    "ray": {
      "type": "object",
      "required": ["id", "space", "source", "target", "length", "path"],
      "properties": {
        "id": { "type": "string" },
        "space": { "type": "string" },
        "source": { "type": "string" },
        "target": { "type": "string" },
        "length": { "type": "number" },
        "length_sq": { "type": ["string", "null"], "description": "exact squared length p/q" },
        "path": {
          "type": "object",
          "required": ["kind"],
          "properties": {
            "kind": { "enum": ["exact-segment", "tree-path", "sampled-path"] },
            "start": { "type": "array", "items": { "type": "string" } },
            "end": { "type": "array", "items": { "type": "string" } },
            "pieces": { "type": "array" },
            "samples": {
              "type": "array",
              "items": {
                "type": "object",
                "required": ["t", "point"],
                "properties": {
                  "t": { "type": "number" },
                  "point": { "type": "array", "items": { "type": "number" } }
                }
              }
            }
          }
        }
      }
    },
    "hit": {
      "type": "object",
      "required": ["ray_id", "blocker", "t"],
      "properties": {
        "ray_id": { "type": "string" },
        "blocker": { "type": "integer", "minimum": 0 },
        "t": { "type": "number", "exclusiveMinimum": 0 },
        "fraction": { "type": ["string", "null"], "description": "exact hit parameter t / length as p/q" }
      }
    },
    "verification": {
      "type": "object",
      "required": ["outcome"],
      "properties": {
        "outcome": { "enum": ["certified", "failed"] },
        "space": { "type": "string" },
        "source": { "type": "string" },
        "target": { "type": "string" },
        "horizon": { "type": ["number", "null"] },
        "blockers": { "type": "array" },
        "blocker_labels": { "type": "array", "items": { "type": "string" } },
        "hits": { "type": "array", "items": { "$ref": "#/$defs/hit" } },
        "tolerance": { "type": "number" },
        "ray": { "$ref": "#/$defs/ray", "description": "failure witness with its full path" },
        "blockers_tested": { "type": "integer" }
      }
    },
    "growth_row": {
      "type": "object",
      "required": ["T", "n", "m"],
      "properties": {
        "T": { "type": "number" },
        "n": { "type": "integer", "minimum": 0 },
        "m": { "type": "integer", "minimum": 0 }
      }
    },
    "error": {
      "type": "object",
      "required": ["code", "message"],
      "properties": {
        "code": { "type": "string" },
        "message": { "type": "string" }
      }
    }
  }
}
"##;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trip() {
        let text = envelope("growth", &vec![1u32, 2, 3]).unwrap();
        assert!(text.ends_with("}\n"));
        let art = Artifact::parse(&text).unwrap();
        assert_eq!(art.kind, "growth");
        assert_eq!(art.decode::<Vec<u32>>().unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn rejects_foreign_schema_and_kind() {
        assert!(Artifact::parse(r#"{"schema":"other","kind":"block","data":{}}"#).is_err());
        assert!(Artifact::parse(r#"{"schema":"geoblock/v1","kind":"nope","data":{}}"#).is_err());
        assert!(Artifact::parse("{").is_err());
    }

    #[test]
    fn schema_is_json() {
        let v: Value = serde_json::from_str(json_schema()).unwrap();
        assert_eq!(v["$id"], "geoblock/v1");
    }
}
