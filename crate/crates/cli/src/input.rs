//! Polytope and lattice input files.

use std::fmt;
use std::path::Path;

use delzant_core::linalg::{parse_rational, RatVector, Rational};
use delzant_core::polytope::{
    normalize_h_rep_logged, HPolytope, NormalizationAction, PolytopeError,
};
use serde_json::Value;
use thiserror::Error;

/// Where in an input file a problem was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    /// Line and column of a JSON syntax error (1-based).
    Text { line: usize, column: usize },
    /// Path of a field, like `facets[2].offset`.
    Field(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Text { line, column } => write!(f, "line {line}, column {column}"),
            Self::Field(path) => write!(f, "{path}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{location}: {message}")]
    Invalid { location: Location, message: String },
    #[error("invalid polytope: {0}")]
    Polytope(#[from] PolytopeError),
}

impl ParseError {
    fn field(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            location: Location::Field(path.into()),
            message: message.into(),
        }
    }

    pub fn location(&self) -> Option<&Location> {
        match self {
            Self::Invalid { location, .. } => Some(location),
            _ => None,
        }
    }
}

/// A parsed polytope file.
#[derive(Clone, Debug)]
pub struct PolytopeInput {
    pub polytope: HPolytope,
    pub normalization: Vec<NormalizationAction>,
    /// Rational basis rows of a torus lattice, when the file names one.
    pub lattice: Option<Vec<RatVector>>,
}

pub fn read_polytope_file(path: &Path) -> Result<PolytopeInput, ParseError> {
    parse_polytope(&read(path)?)
}

/// Parses `{"dim": n, "facets": [{"normal": [...], "offset": "p/q"}, ...],
/// "lattice": [[...], ...]}`. Each facet reads `<x, normal> >= offset`.
pub fn parse_polytope(text: &str) -> Result<PolytopeInput, ParseError> {
    let doc = parse_json(text)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ParseError::field("$", "expected an object"))?;
    let dim = obj
        .get("dim")
        .ok_or_else(|| ParseError::field("dim", "missing field"))?;
    let dim = dim
        .as_u64()
        .filter(|d| *d > 0)
        .ok_or_else(|| ParseError::field("dim", "expected a positive integer"))?
        as usize;
    let facets = obj
        .get("facets")
        .ok_or_else(|| ParseError::field("facets", "missing field"))?
        .as_array()
        .ok_or_else(|| ParseError::field("facets", "expected an array"))?;
    if facets.is_empty() {
        return Err(ParseError::field("facets", "no facets given"));
    }

    let mut raw = Vec::with_capacity(facets.len());
    for (i, f) in facets.iter().enumerate() {
        let at = format!("facets[{i}]");
        let f = f
            .as_object()
            .ok_or_else(|| ParseError::field(&at, "expected an object"))?;
        let normal = f
            .get("normal")
            .ok_or_else(|| ParseError::field(format!("{at}.normal"), "missing field"))?;
        let normal = rational_row(normal, &format!("{at}.normal"), dim)?;
        let offset = f
            .get("offset")
            .ok_or_else(|| ParseError::field(format!("{at}.offset"), "missing field"))?;
        let offset = rational(offset, &format!("{at}.offset"))?;
        raw.push((normal, offset));
    }

    let lattice = match obj.get("lattice") {
        None | Some(Value::Null) => None,
        Some(v) => Some(lattice_rows(v, "lattice", dim)?),
    };

    let (polytope, normalization) = normalize_h_rep_logged(&raw)?;
    Ok(PolytopeInput {
        polytope,
        normalization,
        lattice,
    })
}

/// Reads a lattice file: either an array of basis rows or an object with a
/// `lattice` field holding one.
pub fn read_lattice_file(path: &Path, dim: usize) -> Result<Vec<RatVector>, ParseError> {
    parse_lattice(&read(path)?, dim)
}

pub fn parse_lattice(text: &str, dim: usize) -> Result<Vec<RatVector>, ParseError> {
    let doc = parse_json(text)?;
    match &doc {
        Value::Object(obj) => {
            let v = obj
                .get("lattice")
                .ok_or_else(|| ParseError::field("lattice", "missing field"))?;
            lattice_rows(v, "lattice", dim)
        }
        _ => lattice_rows(&doc, "$", dim),
    }
}

fn read(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        file: path.display().to_string(),
        source,
    })
}

fn parse_json(text: &str) -> Result<Value, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError::Invalid {
        location: Location::Text {
            line: e.line(),
            column: e.column(),
        },
        message: e.to_string(),
    })
}

fn lattice_rows(v: &Value, at: &str, dim: usize) -> Result<Vec<RatVector>, ParseError> {
    let rows = v
        .as_array()
        .ok_or_else(|| ParseError::field(at, "expected an array of rows"))?;
    if rows.len() != dim {
        return Err(ParseError::field(
            at,
            format!("expected {dim} rows, found {}", rows.len()),
        ));
    }
    rows.iter()
        .enumerate()
        .map(|(i, r)| rational_row(r, &format!("{at}[{i}]"), dim))
        .collect()
}

fn rational_row(v: &Value, at: &str, dim: usize) -> Result<RatVector, ParseError> {
    let entries = v
        .as_array()
        .ok_or_else(|| ParseError::field(at, "expected an array"))?;
    if entries.len() != dim {
        return Err(ParseError::field(
            at,
            format!("expected {dim} entries, found {}", entries.len()),
        ));
    }
    entries
        .iter()
        .enumerate()
        .map(|(j, e)| rational(e, &format!("{at}[{j}]")))
        .collect()
}

/// An integer JSON number or a string `"p/q"` / `"p"`.
fn rational(v: &Value, at: &str) -> Result<Rational, ParseError> {
    match v {
        Value::String(s) => {
            parse_rational(s).ok_or_else(|| ParseError::field(at, format!("not a rational: {s:?}")))
        }
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).ok_or_else(|| ParseError::field(at, "not an integer"))
        }
        Value::Number(n) => Err(ParseError::field(
            at,
            format!("{n} is not exact; write it as a string \"p/q\""),
        )),
        _ => Err(ParseError::field(
            at,
            "expected an integer or a rational string",
        )),
    }
}
