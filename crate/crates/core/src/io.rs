//! File formats: code, state and hypercube JSON documents, and the plain-text
//! code listing.
//!
//! Writers emit compact JSON with a fixed key order and words in lexicographic
//! order, so equal objects serialize to identical bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ame::{AmeError, AmeState};
use crate::codes::{Code, CodeError};
use crate::field::{FieldError, FieldSpec};
use crate::latin::{HypercubeSet, LatinError, LatinHypercube};

pub const HYPERCUBE_ORDER: &str = "row-major, first index slowest";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ame(#[from] AmeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub m: u32,
    pub modulus: Vec<u32>,
}

impl From<&FieldSpec> for FieldDescriptor {
    fn from(f: &FieldSpec) -> Self {
        FieldDescriptor {
            p: f.p,
            m: f.m,
            modulus: f.modulus.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDocument {
    pub d: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
    pub words: Vec<Vec<u32>>,
}

impl CodeDocument {
    pub fn new(code: &Code, field: Option<&FieldSpec>) -> Self {
        CodeDocument {
            d: code.d(),
            n: code.n(),
            field: field.map(FieldDescriptor::from),
            words: code.to_rows(),
        }
    }

    /// The code, and the field it was built over if one is recorded.
    pub fn into_code(self) -> Result<(Code, Option<FieldSpec>), IoError> {
        let field = self
            .field
            .map(|f| FieldSpec::validated(f.p, f.m, f.modulus))
            .transpose()?;
        if let Some(f) = &field {
            if f.d != self.d {
                return Err(IoError::Invalid(format!(
                    "field GF({}) does not match alphabet size {}",
                    f.d, self.d
                )));
            }
        }
        Ok((Code::new(self.d, self.n, &self.words)?, field))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDocument {
    pub n: usize,
    pub d: u32,
    pub kets: Vec<Vec<u32>>,
}

impl StateDocument {
    pub fn new(state: &AmeState) -> Self {
        StateDocument {
            n: state.n(),
            d: state.d(),
            kets: state.as_code().to_rows(),
        }
    }

    pub fn into_state(self) -> Result<AmeState, IoError> {
        Ok(AmeState::new(self.n, self.d, &self.kets)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercubeDocument {
    pub k: usize,
    pub d: u32,
    pub values: Vec<u32>,
    #[serde(default = "default_order")]
    pub order: String,
}

fn default_order() -> String {
    HYPERCUBE_ORDER.to_string()
}

impl HypercubeDocument {
    pub fn new(cube: &LatinHypercube) -> Self {
        HypercubeDocument {
            k: cube.k(),
            d: cube.d(),
            values: cube.values().iter().map(|&v| v as u32).collect(),
            order: default_order(),
        }
    }

    pub fn into_cube(self) -> Result<LatinHypercube, IoError> {
        if self.order != HYPERCUBE_ORDER {
            return Err(IoError::Invalid(format!(
                "unsupported order '{}'",
                self.order
            )));
        }
        Ok(LatinHypercube::new(self.k, self.d, self.values)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercubeSetDocument {
    pub k: usize,
    pub d: u32,
    pub cubes: Vec<HypercubeDocument>,
}

impl HypercubeSetDocument {
    pub fn new(set: &HypercubeSet) -> Self {
        HypercubeSetDocument {
            k: set.k,
            d: set.d,
            cubes: set.cubes.iter().map(HypercubeDocument::new).collect(),
        }
    }

    pub fn into_set(self) -> Result<HypercubeSet, IoError> {
        let cubes = self
            .cubes
            .into_iter()
            .map(HypercubeDocument::into_cube)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HypercubeSet::new(self.k, self.d, cubes)?)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("documents always serialize")
}

/// Reads a code from JSON or from the plain-text listing, by first character.
pub fn parse_code(text: &str) -> Result<(Code, Option<FieldSpec>), IoError> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str::<CodeDocument>(text)?.into_code()
    } else {
        Ok((parse_code_text(text)?, None))
    }
}

pub fn parse_state(text: &str) -> Result<AmeState, IoError> {
    serde_json::from_str::<StateDocument>(text)?.into_state()
}

/// Accepts a set document or a single hypercube document.
pub fn parse_hypercubes(text: &str) -> Result<HypercubeSet, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("cubes").is_some() {
        serde_json::from_value::<HypercubeSetDocument>(value)?.into_set()
    } else {
        let cube = serde_json::from_value::<HypercubeDocument>(value)?.into_cube()?;
        Ok(HypercubeSet::new(cube.k(), cube.d(), vec![cube])?)
    }
}

/// Plain-text listing: a header line `n d`, then one word per line as
/// space-separated symbols.
pub fn parse_code_text(text: &str) -> Result<Code, IoError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| IoError::Invalid("empty code listing".into()))?;
    let nums = |line: &str| -> Result<Vec<u32>, IoError> {
        line.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| IoError::Invalid(format!("not a number: '{t}'")))
            })
            .collect()
    };
    let head = nums(header)?;
    let [n, d] = head[..] else {
        return Err(IoError::Invalid("header must be 'n d'".into()));
    };
    let words = lines.map(nums).collect::<Result<Vec<_>, _>>()?;
    Ok(Code::new(d, n as usize, &words)?)
}

pub fn write_code_text(code: &Code) -> String {
    let mut out = format!("{} {}\n", code.n(), code.d());
    for w in code.words() {
        let line: Vec<String> = w.iter().map(u16::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
