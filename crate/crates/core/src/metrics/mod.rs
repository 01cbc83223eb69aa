//! Evaluation metrics.
//!
//! Tree edit distance uses unit insert/delete/relabel costs. nTED divides it
//! by the ground-truth node count (which equals the cost of building the
//! ground truth from nothing) and reports a percentage, lower is better.
//! ANLS uses the usual 0.5 threshold unless told otherwise.

mod report;
mod string;
mod ted;
mod tree;

use thiserror::Error;

use crate::codec::{DocTree, Value};

pub use report::{MetricReport, SampleScore};
pub use string::{anls, levenshtein, nls};
pub use ted::{ted, ted_nodes};
pub use tree::{tree_of, LabeledTree, TreeNode, ROOT_LABEL};

pub const DEFAULT_TAU: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("ground truth tree is empty")]
    EmptyGroundTruth,
    #[error("no gold answers given")]
    NoGoldAnswers,
    #[error("{preds} predictions for {gts} ground truths")]
    LengthMismatch { preds: usize, gts: usize },
    #[error("ground truth {0} has no text value at the class key")]
    MalformedGroundTruth(usize),
}

/// nTED over labeled trees, as a percentage.
pub fn nted_trees(pred: &LabeledTree, gt: &LabeledTree) -> Result<f64, MetricError> {
    let n = gt.node_count();
    if n == 0 {
        return Err(MetricError::EmptyGroundTruth);
    }
    Ok(ted(pred, gt) as f64 / n as f64 * 100.0)
}

/// nTED between two documents, as a percentage.
pub fn nted(pred: &DocTree, gt: &DocTree) -> Result<f64, MetricError> {
    nted_trees(&tree_of(pred), &tree_of(gt))
}

/// Fraction of samples whose text value at `key` equals the ground truth's.
pub fn classification_accuracy(
    preds: &[DocTree],
    gts: &[DocTree],
    key: &str,
) -> Result<f64, MetricError> {
    let hits = classification_hits(preds, gts, key)?;
    if hits.is_empty() {
        return Ok(0.0);
    }
    Ok(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
}

/// Per-sample correctness behind [`classification_accuracy`].
pub fn classification_hits(
    preds: &[DocTree],
    gts: &[DocTree],
    key: &str,
) -> Result<Vec<bool>, MetricError> {
    if preds.len() != gts.len() {
        return Err(MetricError::LengthMismatch {
            preds: preds.len(),
            gts: gts.len(),
        });
    }
    preds
        .iter()
        .zip(gts)
        .enumerate()
        .map(|(i, (p, g))| {
            let expected = g
                .get(key)
                .and_then(Value::as_text)
                .ok_or(MetricError::MalformedGroundTruth(i))?;
            Ok(p.get(key).and_then(Value::as_text) == Some(expected))
        })
        .collect()
}
