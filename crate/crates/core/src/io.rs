//! JSON configuration documents.
//!
//! ```json
//! {
//!   "eyes": [{"center": [0.0, 0.0], "height": 1.0}, {"center": [1.0, 0.0], "height": 1.0}],
//!   "beads": [{"center": [0.5, 0.8660254037844386], "height": 1.0}, ...],
//!   "metadata": {"label": "family", "theta": 1.0471975511965976}
//! }
//! ```
//!
//! Bead order is the necklace's cycle order. Numbers are written with the
//! shortest representation that reads back to the same double.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::geom::{GeomError, Horoball, Tolerances};
use crate::necklace::{EyePair, Necklace, NecklaceError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Necklace(#[from] NecklaceError),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: [f64; 2],
    pub height: f64,
}

impl BallSpec {
    pub fn of(b: &Horoball) -> Self {
        Self {
            center: [b.center().x, b.center().y],
            height: b.height(),
        }
    }

    pub fn horoball(&self) -> Result<Horoball, GeomError> {
        Horoball::at(self.center[0], self.center[1], self.height)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    pub eyes: [BallSpec; 2],
    pub beads: Vec<BallSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Metadata>,
}

impl ConfigDocument {
    pub fn from_parts(beads: &[Horoball], eyes: &EyePair, metadata: Option<Metadata>) -> Self {
        Self {
            eyes: [BallSpec::of(eyes.c1()), BallSpec::of(eyes.c2())],
            beads: beads.iter().map(BallSpec::of).collect(),
            metadata,
        }
    }

    /// Parses and validates a document, reporting schema problems with
    /// JSON-pointer paths.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let value: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
        let root = value
            .as_object()
            .ok_or_else(|| schema("", "expected an object"))?;
        check_keys(root, "", &["eyes", "beads", "metadata"])?;

        let eyes = root.get("eyes").ok_or_else(|| schema("/eyes", "missing"))?;
        let eyes = eyes
            .as_array()
            .ok_or_else(|| schema("/eyes", "expected an array"))?;
        if eyes.len() != 2 {
            return Err(schema(
                "/eyes",
                format!("expected exactly 2 eyes, found {}", eyes.len()),
            ));
        }
        let eyes = [ball(&eyes[0], "/eyes/0")?, ball(&eyes[1], "/eyes/1")?];

        let beads = root
            .get("beads")
            .ok_or_else(|| schema("/beads", "missing"))?;
        let beads = beads
            .as_array()
            .ok_or_else(|| schema("/beads", "expected an array"))?
            .iter()
            .enumerate()
            .map(|(i, b)| ball(b, &format!("/beads/{i}")))
            .collect::<Result<Vec<_>, _>>()?;

        let metadata = match root.get("metadata") {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => {
                check_keys(m, "/metadata", &["label", "theta"])?;
                let label = match m.get("label") {
                    None | Some(Value::Null) => None,
                    Some(Value::String(s)) => Some(s.clone()),
                    Some(_) => return Err(schema("/metadata/label", "expected a string")),
                };
                let theta = match m.get("theta") {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(number(v, "/metadata/theta")?),
                };
                Some(Metadata { label, theta })
            }
            Some(_) => return Err(schema("/metadata", "expected an object")),
        };
        Ok(Self {
            eyes,
            beads,
            metadata,
        })
    }

    /// Canonical text: pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents always serialize");
        s.push('\n');
        s
    }

    pub fn eye_pair(&self, tol: &Tolerances) -> Result<EyePair, IoError> {
        Ok(EyePair::new(
            self.eyes[0].horoball()?,
            self.eyes[1].horoball()?,
            tol,
        )?)
    }

    pub fn horoballs(&self) -> Result<Vec<Horoball>, IoError> {
        Ok(self
            .beads
            .iter()
            .map(BallSpec::horoball)
            .collect::<Result<Vec<_>, _>>()?)
    }

    pub fn necklace(&self) -> Result<Necklace, IoError> {
        Ok(Necklace::new(self.horoballs()?)?)
    }
}

fn check_keys(obj: &Map<String, Value>, at: &str, allowed: &[&str]) -> Result<(), IoError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{at}/{k}"), "unexpected key")),
        None => Ok(()),
    }
}

fn number(v: &Value, at: &str) -> Result<f64, IoError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(at, "expected a finite number"))
}

fn ball(v: &Value, at: &str) -> Result<BallSpec, IoError> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(at, "expected an object"))?;
    check_keys(obj, at, &["center", "height"])?;
    let center = obj
        .get("center")
        .ok_or_else(|| schema(format!("{at}/center"), "missing"))?;
    let center = center
        .as_array()
        .ok_or_else(|| schema(format!("{at}/center"), "expected an array"))?;
    if center.len() != 2 {
        return Err(schema(
            format!("{at}/center"),
            format!("expected 2 coordinates, found {}", center.len()),
        ));
    }
    let x = number(&center[0], &format!("{at}/center/0"))?;
    let y = number(&center[1], &format!("{at}/center/1"))?;
    let height = obj
        .get("height")
        .ok_or_else(|| schema(format!("{at}/height"), "missing"))?;
    let height = number(height, &format!("{at}/height"))?;
    Ok(BallSpec {
        center: [x, y],
        height,
    })
}

/// Reads a document from a file, or from standard input when `path` is `-`.
pub fn load(path: &str) -> Result<ConfigDocument, IoError> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|source| IoError::Io {
                path: "<stdin>".into(),
                source,
            })?;
        s
    } else {
        fs::read_to_string(path).map_err(|source| IoError::Io {
            path: path.into(),
            source,
        })?
    };
    ConfigDocument::parse(&text)
}

pub fn save(doc: &ConfigDocument, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, doc.to_json()).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}
