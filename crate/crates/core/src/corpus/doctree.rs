//! JSON ingestion of [`DocTree`]s.
//!
//! Object key order is kept and duplicate keys are rejected. Numbers and
//! booleans become text leaves holding their literal source form, so `1.50`
//! stays `"1.50"`. `null` has no token representation and is rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::codec::{is_valid_name, DocTree, Value};

#[derive(Debug, Error)]
pub enum DocTreeError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    JsonSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("invalid field name {0:?}")]
    InvalidFieldName(String),
    #[error("unsupported JSON value: {0}")]
    UnsupportedValue(&'static str),
    #[error("document root must be a JSON object")]
    RootNotObject,
    #[error("array under {0:?} contains an array")]
    NestedArray(String),
}

fn syntax(err: serde_json::Error) -> DocTreeError {
    DocTreeError::JsonSyntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Object entries in source order, duplicates included.
struct RawPairs(Vec<(String, Box<RawValue>)>);

impl<'de> Deserialize<'de> for RawPairs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairsVisitor;
        impl<'de> Visitor<'de> for PairsVisitor {
            type Value = RawPairs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<RawPairs, A::Error> {
                let mut pairs = Vec::new();
                while let Some(entry) = map.next_entry::<String, Box<RawValue>>()? {
                    pairs.push(entry);
                }
                Ok(RawPairs(pairs))
            }
        }
        deserializer.deserialize_map(PairsVisitor)
    }
}

pub fn load_doctree(path: &Path) -> Result<DocTree, DocTreeError> {
    let text = std::fs::read_to_string(path).map_err(|source| DocTreeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_doctree(&text)
}

pub fn parse_doctree(json: &str) -> Result<DocTree, DocTreeError> {
    let raw: Box<RawValue> = serde_json::from_str(json).map_err(syntax)?;
    parse_raw_doctree(&raw)
}

/// Same as [`parse_doctree`] for a value already split out of a larger
/// document (a JSONL record field, for instance).
pub fn parse_raw_doctree(raw: &RawValue) -> Result<DocTree, DocTreeError> {
    match convert(raw, "")? {
        Value::Object(fields) => Ok(DocTree { fields }),
        _ => Err(DocTreeError::RootNotObject),
    }
}

fn convert(raw: &RawValue, key: &str) -> Result<Value, DocTreeError> {
    let text = raw.get().trim();
    match text.as_bytes().first() {
        Some(b'{') => {
            let RawPairs(pairs) = serde_json::from_str(text).map_err(syntax)?;
            let mut fields: Vec<(String, Value)> = Vec::with_capacity(pairs.len());
            for (k, v) in pairs {
                if !is_valid_name(&k) {
                    return Err(DocTreeError::InvalidFieldName(k));
                }
                if fields.iter().any(|(seen, _)| *seen == k) {
                    return Err(DocTreeError::DuplicateKey(k));
                }
                let value = convert(&v, &k)?;
                fields.push((k, value));
            }
            Ok(Value::Object(fields))
        }
        Some(b'[') => {
            let items: Vec<Box<RawValue>> = serde_json::from_str(text).map_err(syntax)?;
            let items = items
                .iter()
                .map(|item| match convert(item, key)? {
                    Value::Array(_) => Err(DocTreeError::NestedArray(key.to_string())),
                    v => Ok(v),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Array(items))
        }
        Some(b'"') => Ok(Value::Text(serde_json::from_str(text).map_err(syntax)?)),
        Some(b'n') => Err(DocTreeError::UnsupportedValue("null")),
        Some(_) => Ok(Value::Text(text.to_string())),
        None => Err(DocTreeError::UnsupportedValue("empty value")),
    }
}
