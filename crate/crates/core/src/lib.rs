//! Tooling for OCR-free document understanding pipelines.
//!
//! - [`codec`] maps structured documents to and from flat sequences of
//!   `[START_field]` / `[END_field]` delimited tokens, recovering what it can
//!   from malformed model output.
//! - [`metrics`] scores predictions: tree edit distance and its normalized
//!   form, ANLS, and classification accuracy.
//! - [`synthdog`] renders seeded synthetic document images together with
//!   reading-order ground truth.
//! - [`corpus`] loads text corpora, asset pools, JSON documents and dataset
//!   manifests.
//! - [`cli`] wires everything into the `docforge` command.

pub mod cli;
pub mod codec;
pub mod corpus;
pub mod metrics;
pub mod synthdog;

pub use codec::{
    canonicalize, decode, encode, DocTree, RecoveryEvent, TokenItem, TokenSeq, Value, Vocab,
};
pub use metrics::{anls, levenshtein, nted, ted, LabeledTree, MetricReport};
