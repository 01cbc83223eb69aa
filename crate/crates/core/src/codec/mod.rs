//! Structured documents and their flat token-sequence form.
//!
//! A [`DocTree`] is an ordered JSON-like object. [`encode`] serializes it
//! depth first: every pair `(k, v)` becomes `[START_k] … [END_k]`, arrays
//! become one group per element, and text leaves that name a registered class
//! become a single class token such as `[memo]`. [`decode`] is the inverse and
//! accepts any sequence at all; anything it cannot place is reported as a
//! [`RecoveryEvent`] instead of an error.
//!
//! Arrays are written as repeated same-key groups, so a one-element array is
//! indistinguishable from a scalar. The exact inverse law is therefore
//! `decode(encode(t)) == canonicalize(t)`.

mod decode;
mod encode;
mod token;
mod vocab;

use std::collections::HashSet;
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use thiserror::Error;

pub use decode::{decode, RecoveryEvent};
pub use encode::{encode, encoded_len};
pub use token::{parse_surface, TokenItem, TokenSeq};
pub use vocab::{Task, Vocab, VocabError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("invalid field name {0:?}")]
    InvalidFieldName(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("array under {0:?} contains an array")]
    NestedArray(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("field {0:?} is not registered in the vocabulary")]
    UnregisteredField(String),
    #[error("sequence of {actual} tokens exceeds the limit of {limit}")]
    SequenceTooLong { limit: usize, actual: usize },
    #[error("invalid field name {0:?}")]
    InvalidFieldName(String),
    #[error("prompt {0:?} is not registered in the vocabulary")]
    UnregisteredPrompt(String),
    #[error("task {0:?} requires a question argument")]
    MissingArgument(String),
    #[error("task {0:?} does not take an argument")]
    UnexpectedArgument(String),
    #[error(transparent)]
    InvalidTree(#[from] TreeError),
}

/// True if `name` can be embedded in a special token: `[A-Za-z0-9_.-]+`.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Object(Vec<(String, Value)>),
    Array(Vec<Value>),
    Text(String),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// Root of a structured document. The root is always an object.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocTree {
    pub fields: Vec<(String, Value)>,
}

impl DocTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<K: Into<String>>(pairs: impl IntoIterator<Item = (K, Value)>) -> Self {
        DocTree {
            fields: pairs.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Checks key uniqueness, field-name syntax and the no-nested-arrays rule.
    pub fn validate(&self) -> Result<(), TreeError> {
        validate_pairs(&self.fields)
    }

    /// Visits every field name in document order.
    pub fn for_each_field<'a>(&'a self, mut f: impl FnMut(&'a str)) {
        fn walk<'a>(v: &'a Value, f: &mut impl FnMut(&'a str)) {
            match v {
                Value::Object(pairs) => {
                    for (k, v) in pairs {
                        f(k);
                        walk(v, f);
                    }
                }
                Value::Array(items) => items.iter().for_each(|item| walk(item, f)),
                Value::Text(_) => {}
            }
        }
        for (k, v) in &self.fields {
            f(k);
            walk(v, &mut f);
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("DocTree serialization is infallible")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("DocTree serialization is infallible")
    }
}

fn validate_pairs(pairs: &[(String, Value)]) -> Result<(), TreeError> {
    let mut seen = HashSet::with_capacity(pairs.len());
    for (k, v) in pairs {
        if !is_valid_name(k) {
            return Err(TreeError::InvalidFieldName(k.clone()));
        }
        if !seen.insert(k.as_str()) {
            return Err(TreeError::DuplicateKey(k.clone()));
        }
        match v {
            Value::Object(inner) => validate_pairs(inner)?,
            Value::Array(items) => {
                for item in items {
                    match item {
                        Value::Array(_) => return Err(TreeError::NestedArray(k.clone())),
                        Value::Object(inner) => validate_pairs(inner)?,
                        Value::Text(_) => {}
                    }
                }
            }
            Value::Text(_) => {}
        }
    }
    Ok(())
}

/// Normal form of a tree with respect to the token grammar.
///
/// Single-element arrays collapse into their element, empty arrays are
/// dropped together with their key, and empty nested objects become empty
/// text (both serialize to an empty `[START_k][END_k]` group). The root stays
/// an object. Idempotent.
pub fn canonicalize(tree: &DocTree) -> DocTree {
    DocTree {
        fields: canonical_pairs(&tree.fields),
    }
}

fn canonical_pairs(pairs: &[(String, Value)]) -> Vec<(String, Value)> {
    pairs
        .iter()
        .filter_map(|(k, v)| canonical_value(v).map(|v| (k.clone(), v)))
        .collect()
}

fn canonical_value(v: &Value) -> Option<Value> {
    match v {
        Value::Text(s) => Some(Value::Text(s.clone())),
        Value::Object(pairs) => {
            let pairs = canonical_pairs(pairs);
            if pairs.is_empty() {
                Some(Value::Text(String::new()))
            } else {
                Some(Value::Object(pairs))
            }
        }
        Value::Array(items) => {
            let mut items: Vec<Value> = items.iter().filter_map(canonical_value).collect();
            match items.len() {
                0 => None,
                1 => items.pop(),
                _ => Some(Value::Array(items)),
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Text(s) => serializer.serialize_str(s),
            Value::Array(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Value::Object(pairs) => serialize_pairs(pairs, serializer),
        }
    }
}

impl Serialize for DocTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serialize_pairs(&self.fields, serializer)
    }
}

fn serialize_pairs<S: Serializer>(
    pairs: &[(String, Value)],
    serializer: S,
) -> Result<S::Ok, S::Error> {
    let mut map = serializer.serialize_map(Some(pairs.len()))?;
    for (k, v) in pairs {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

impl fmt::Display for DocTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json_string())
    }
}
