//! Zhang-Shasha ordered tree edit distance with unit costs.

use std::collections::HashMap;

use super::tree::{LabeledTree, TreeNode};

/// Postorder flattening: interned labels and leftmost-leaf descendants.
struct Flat {
    labels: Vec<u32>,
    lmd: Vec<usize>,
    keyroots: Vec<usize>,
}

impl Flat {
    fn new<'a>(root: &'a TreeNode, interner: &mut HashMap<&'a str, u32>) -> Self {
        let mut flat = Flat {
            labels: Vec::new(),
            lmd: Vec::new(),
            keyroots: Vec::new(),
        };
        flat.visit(root, interner);
        // A node is a keyroot if no later node in postorder shares its
        // leftmost leaf; the root always is.
        let n = flat.labels.len();
        let mut seen = vec![false; n];
        for i in (0..n).rev() {
            let l = flat.lmd[i];
            if !seen[l] {
                seen[l] = true;
                flat.keyroots.push(i);
            }
        }
        flat.keyroots.reverse();
        flat
    }

    /// Returns the postorder index of the node's leftmost leaf.
    fn visit<'a>(&mut self, node: &'a TreeNode, interner: &mut HashMap<&'a str, u32>) -> usize {
        let mut leftmost = None;
        for child in &node.children {
            let l = self.visit(child, interner);
            leftmost.get_or_insert(l);
        }
        let next = interner.len() as u32;
        let id = *interner.entry(node.label.as_str()).or_insert(next);
        let index = self.labels.len();
        let lmd = leftmost.unwrap_or(index);
        self.labels.push(id);
        self.lmd.push(lmd);
        lmd
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

/// Minimum number of node insertions, deletions and relabelings turning
/// `a` into `b`.
pub fn ted(a: &LabeledTree, b: &LabeledTree) -> usize {
    match (a.root(), b.root()) {
        (None, _) => b.node_count(),
        (_, None) => a.node_count(),
        (Some(a), Some(b)) => ted_nodes(a, b),
    }
}

pub fn ted_nodes(a: &TreeNode, b: &TreeNode) -> usize {
    let mut interner = HashMap::new();
    let a = Flat::new(a, &mut interner);
    let b = Flat::new(b, &mut interner);
    let (n, m) = (a.len(), b.len());

    let mut tree_dist = vec![0usize; n * m];
    let mut forest = vec![0usize; (n + 1) * (m + 1)];
    let width = m + 1;

    for &i in &a.keyroots {
        for &j in &b.keyroots {
            let (li, lj) = (a.lmd[i], b.lmd[j]);
            let rows = i - li + 2;
            let cols = j - lj + 2;
            forest[0] = 0;
            for x in 1..rows {
                forest[x * width] = x;
            }
            for (y, cell) in forest.iter_mut().enumerate().take(cols).skip(1) {
                *cell = y;
            }
            for x in 1..rows {
                let i1 = li + x - 1;
                for y in 1..cols {
                    let j1 = lj + y - 1;
                    let delete = forest[(x - 1) * width + y] + 1;
                    let insert = forest[x * width + y - 1] + 1;
                    let best = if a.lmd[i1] == li && b.lmd[j1] == lj {
                        let relabel = usize::from(a.labels[i1] != b.labels[j1]);
                        let d = delete
                            .min(insert)
                            .min(forest[(x - 1) * width + y - 1] + relabel);
                        tree_dist[i1 * m + j1] = d;
                        d
                    } else {
                        let p = a.lmd[i1] - li;
                        let q = b.lmd[j1] - lj;
                        delete
                            .min(insert)
                            .min(forest[p * width + q] + tree_dist[i1 * m + j1])
                    };
                    forest[x * width + y] = best;
                }
            }
        }
    }
    tree_dist[(n - 1) * m + (m - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(label: &str, children: Vec<TreeNode>) -> TreeNode {
        TreeNode::new(label, children)
    }
    fn l(label: &str) -> TreeNode {
        TreeNode::leaf(label)
    }

    #[test]
    fn identity_and_empty() {
        let a = t("a", vec![l("b"), t("c", vec![l("d")])]);
        assert_eq!(ted_nodes(&a, &a), 0);
        assert_eq!(ted(&LabeledTree::Empty, &a.clone().into()), 4);
        assert_eq!(ted(&a.clone().into(), &LabeledTree::Empty), 4);
        assert_eq!(ted(&LabeledTree::Empty, &LabeledTree::Empty), 0);
    }

    #[test]
    fn classic_example() {
        // f(d(a c(b)) e) vs f(c(d(a b)) e): distance 2 under unit costs.
        let a = t("f", vec![t("d", vec![l("a"), t("c", vec![l("b")])]), l("e")]);
        let b = t("f", vec![t("c", vec![t("d", vec![l("a"), l("b")])]), l("e")]);
        assert_eq!(ted_nodes(&a, &b), 2);
        assert_eq!(ted_nodes(&b, &a), 2);
    }

    #[test]
    fn single_relabel_and_delete() {
        let a = t("r", vec![l("x"), l("y")]);
        let b = t("r", vec![l("x"), l("z")]);
        assert_eq!(ted_nodes(&a, &b), 1);
        let c = t("r", vec![l("x")]);
        assert_eq!(ted_nodes(&a, &c), 1);
        // Deleting an inner node lifts its children.
        let d = t("r", vec![t("m", vec![l("x"), l("y")])]);
        assert_eq!(ted_nodes(&d, &a), 1);
    }
}
