use std::fmt;

use crate::codec::{DocTree, Value};

/// Label of the synthetic root that [`tree_of`] puts above every document.
pub const ROOT_LABEL: &str = "<root>";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub label: String,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        TreeNode {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, children: Vec<TreeNode>) -> Self {
        TreeNode {
            label: label.into(),
            children,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(TreeNode::node_count).sum::<usize>()
    }
}

impl fmt::Display for TreeNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Ordered labeled tree, possibly empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabeledTree {
    Empty,
    Node(TreeNode),
}

impl LabeledTree {
    pub fn node_count(&self) -> usize {
        match self {
            LabeledTree::Empty => 0,
            LabeledTree::Node(n) => n.node_count(),
        }
    }

    pub fn root(&self) -> Option<&TreeNode> {
        match self {
            LabeledTree::Empty => None,
            LabeledTree::Node(n) => Some(n),
        }
    }
}

impl From<TreeNode> for LabeledTree {
    fn from(n: TreeNode) -> Self {
        LabeledTree::Node(n)
    }
}

/// Tree view of a document: `<root>` on top, one node per key (repeated for
/// array elements) and one leaf per text value.
pub fn tree_of(doc: &DocTree) -> LabeledTree {
    let mut children = Vec::new();
    push_pairs(&doc.fields, &mut children);
    LabeledTree::Node(TreeNode::new(ROOT_LABEL, children))
}

fn push_pairs(pairs: &[(String, Value)], out: &mut Vec<TreeNode>) {
    for (key, value) in pairs {
        match value {
            Value::Array(items) => {
                for item in items {
                    out.push(key_node(key, item));
                }
            }
            other => out.push(key_node(key, other)),
        }
    }
}

fn key_node(key: &str, value: &Value) -> TreeNode {
    let mut children = Vec::new();
    match value {
        Value::Object(pairs) => push_pairs(pairs, &mut children),
        Value::Text(s) => children.push(TreeNode::leaf(s.clone())),
        // Arrays never nest inside arrays.
        Value::Array(items) => {
            for item in items {
                children.push(key_node(key, item));
            }
        }
    }
    TreeNode::new(key, children)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_doc_is_bare_root() {
        let t = tree_of(&DocTree::new());
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.root().unwrap().label, ROOT_LABEL);
    }

    #[test]
    fn class_doc() {
        let t = tree_of(&DocTree::from_pairs([("class", Value::text("memo"))]));
        assert_eq!(t.root().unwrap().to_string(), "<root>(class(memo))");
        assert_eq!(t.node_count(), 3);
    }

    #[test]
    fn arrays_repeat_key_nodes() {
        let el = |s: &str| Value::Object(vec![("nm".into(), Value::text(s))]);
        let doc = DocTree::from_pairs([("menu", Value::Array(vec![el("A"), el("B")]))]);
        let t = tree_of(&doc);
        assert_eq!(t.node_count(), 7);
        assert_eq!(
            t.root().unwrap().to_string(),
            "<root>(menu(nm(A)) menu(nm(B)))"
        );
    }
}
