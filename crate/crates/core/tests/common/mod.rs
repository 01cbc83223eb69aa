//! Oracles and random generators shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use docforge::codec::{DocTree, TokenItem, TokenSeq, Value, Vocab};
use docforge::metrics::{LabeledTree, TreeNode};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Random documents

pub const CLASS_LABELS: [&str; 3] = ["memo", "letter", "invoice"];

pub fn name_pool() -> Vec<String> {
    [
        "menu", "nm", "price", "cnt", "total", "sub_total", "tax", "store", "addr", "tel", "date",
        "item.name", "item-id", "x", "y", "class", "header", "line", "qty", "unit",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

pub fn pool_vocab() -> Vocab {
    Vocab::new(name_pool(), CLASS_LABELS.map(String::from).to_vec(), vec!["parse_receipt".to_string()], 0).expect("pool vocabulary")
}

#[derive(Debug, Clone)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Bound on key and text nodes (the `<root>` node excluded).
    pub max_nodes: usize,
    pub max_array: usize,
    pub names: Vec<String>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 5,
            max_nodes: 40,
            max_array: 4,
            names: name_pool(),
        }
    }
}

/// Text with awkward characters: brackets, backslashes, inner and outer
/// spaces, non-ASCII, token look-alikes, class labels.
pub fn random_text(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0 => CLASS_LABELS.choose(rng).unwrap().to_string(),
        1 => String::new(),
        2 => "[START_menu] not a token [END_x]".to_string(),
        _ => {
            const ALPHABET: &[char] = &[
                'a', 'b', 'c', 'x', 'y', 'z', '0', '1', '9', ' ', ' ', '[', ']', '\\', 'é', '漢', '-', '_', '.',
            ];
            let len = rng.gen_range(1..=12);
            (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
        }
    }
}

fn random_object(rng: &mut ChaCha8Rng, p: &TreeParams, depth: usize, budget: &mut usize) -> Vec<(String, Value)> {
    let mut names: Vec<&String> = p.names.iter().collect();
    names.shuffle(rng);
    let width = rng.gen_range(0..=4);
    let mut pairs = Vec::new();
    for name in names.into_iter().take(width) {
        if *budget < 2 {
            break;
        }
        *budget -= 1;
        let value = random_value(rng, p, depth, budget, true);
        pairs.push((name.clone(), value));
    }
    pairs
}

fn random_value(rng: &mut ChaCha8Rng, p: &TreeParams, depth: usize, budget: &mut usize, allow_array: bool) -> Value {
    let roll: f64 = rng.gen();
    if allow_array && roll < 0.2 && *budget >= 2 {
        let len = rng.gen_range(0..=p.max_array);
        let items = (0..len)
            .map(|_| random_value(rng, p, depth, budget, false))
            .collect();
        Value::Array(items)
    } else if depth < p.max_depth && roll < 0.55 && *budget >= 2 {
        Value::Object(random_object(rng, p, depth + 1, budget))
    } else {
        *budget = budget.saturating_sub(1);
        Value::Text(random_text(rng))
    }
}

/// Depth counts nested objects; the top level is depth 1.
pub fn random_doctree(rng: &mut ChaCha8Rng, p: &TreeParams) -> DocTree {
    loop {
        let mut budget = p.max_nodes;
        let tree = DocTree {
            fields: random_object(rng, p, 1, &mut budget),
        };
        let nodes = docforge::metrics::tree_of(&tree).node_count() - 1;
        if nodes <= p.max_nodes && depth_of(&tree.fields) <= p.max_depth {
            return tree;
        }
    }
}

pub fn depth_of(pairs: &[(String, Value)]) -> usize {
    fn value_depth(v: &Value) -> usize {
        match v {
            Value::Text(_) => 0,
            Value::Object(pairs) => depth_of(pairs),
            Value::Array(items) => items.iter().map(value_depth).max().unwrap_or(0),
        }
    }
    if pairs.is_empty() {
        return 1;
    }
    1 + pairs.iter().map(|(_, v)| value_depth(v)).max().unwrap_or(0)
}

/// Arbitrary, mostly malformed token sequences.
pub fn random_token_seq(rng: &mut ChaCha8Rng, max_len: usize) -> TokenSeq {
    let names = name_pool();
    let len = rng.gen_range(0..=max_len);
    let items = (0..len)
        .map(|_| match rng.gen_range(0..20) {
            0..=5 => TokenItem::FieldStart(names.choose(rng).unwrap().clone()),
            6..=11 => TokenItem::FieldEnd(names.choose(rng).unwrap().clone()),
            12 => TokenItem::FieldStart("bad name".into()),
            13 => TokenItem::FieldEnd(String::new()),
            14 => TokenItem::ClassToken(CLASS_LABELS.choose(rng).unwrap().to_string()),
            15 => TokenItem::PromptToken("parse_receipt".into()),
            _ => TokenItem::Text(random_text(rng)),
        })
        .collect();
    TokenSeq(items)
}

// ---------------------------------------------------------------------------
// Recovery oracle over well-formed sequences

/// A field group of a well-formed sequence with its delimiter positions.
#[derive(Debug, Clone)]
pub struct Group {
    pub name: String,
    pub start: usize,
    pub end: usize,
    pub texts: Vec<String>,
    pub children: Vec<Group>,
}

/// Parses a well-formed sequence (every START closed by its END, no text
/// at top level) into groups.
pub fn parse_groups(seq: &TokenSeq) -> Vec<Group> {
    fn parse_level(items: &[TokenItem], pos: &mut usize, closing: Option<&str>) -> (Vec<String>, Vec<Group>) {
        let (mut texts, mut groups) = (Vec::new(), Vec::new());
        while *pos < items.len() {
            match &items[*pos] {
                TokenItem::FieldStart(name) => {
                    let start = *pos;
                    *pos += 1;
                    let (t, c) = parse_level(items, pos, Some(name));
                    groups.push(Group {
                        name: name.clone(),
                        start,
                        end: *pos,
                        texts: t,
                        children: c,
                    });
                    *pos += 1;
                }
                TokenItem::FieldEnd(name) => {
                    assert_eq!(Some(name.as_str()), closing, "not well-formed at {}", *pos);
                    return (texts, groups);
                }
                TokenItem::Text(t) | TokenItem::ClassToken(t) => {
                    texts.push(t.clone());
                    *pos += 1;
                }
                TokenItem::PromptToken(_) => panic!("prompt token in target sequence"),
            }
        }
        assert!(closing.is_none(), "unterminated group");
        (texts, groups)
    }
    let mut pos = 0;
    let (texts, groups) = parse_level(seq.items(), &mut pos, None);
    assert!(texts.is_empty(), "text outside fields");
    groups
}

/// Groups to a document: groups sharing a name merge into an array at the
/// first one's place; a group without subgroups is the space-joined text.
pub fn groups_to_pairs(groups: &[Group]) -> Vec<(String, Value)> {
    let mut order: Vec<String> = Vec::new();
    let mut values: HashMap<String, Vec<Value>> = HashMap::new();
    for g in groups {
        let value = if g.children.is_empty() {
            Value::Text(g.texts.join(" "))
        } else {
            Value::Object(groups_to_pairs(&g.children))
        };
        if !values.contains_key(&g.name) {
            order.push(g.name.clone());
        }
        values.entry(g.name.clone()).or_default().push(value);
    }
    order
        .into_iter()
        .map(|name| {
            let mut vs = values.remove(&name).unwrap();
            let v = if vs.len() == 1 { vs.pop().unwrap() } else { Value::Array(vs) };
            (name, v)
        })
        .collect()
}

/// What decoding should give after deleting the `[END_*]` at position
/// `end_pos` of a well-formed sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct LossExpectation {
    pub tree: DocTree,
    pub lost_name: String,
    pub lost_start: usize,
    /// Position, in the shortened sequence, of the item that closes the
    /// lost field's parent (or the sequence length at top level).
    pub lost_end: usize,
}

/// Absorption rule: the field whose END is missing swallows the sibling
/// groups that follow it. If its parent has the same name, the parent's END
/// closes it instead and the parent is left open, and so on upwards. The
/// topmost field of that same-name chain is lost, with everything after its
/// START up to where its own parent closes.
pub fn expected_after_end_deletion(seq: &TokenSeq, end_pos: usize) -> LossExpectation {
    let groups = parse_groups(seq);
    let new_len = seq.len() - 1;

    // Path from the top level down to the group closed at `end_pos`.
    fn path_to(groups: &[Group], end_pos: usize, path: &mut Vec<usize>) -> bool {
        for (i, g) in groups.iter().enumerate() {
            path.push(i);
            if g.end == end_pos || path_to(&g.children, end_pos, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::new();
    assert!(path_to(&groups, end_pos, &mut path), "no group ends at {end_pos}");

    let chain_names: Vec<String> = {
        let mut level = &groups;
        path.iter()
            .map(|&i| {
                let g = &level[i];
                level = &g.children;
                g.name.clone()
            })
            .collect()
    };
    let name = chain_names.last().unwrap().clone();
    let mut top = path.len() - 1;
    while top > 0 && chain_names[top - 1] == name {
        top -= 1;
    }

    // Cut the chain top and its later siblings.
    let mut pruned = groups.clone();
    let (lost_start, lost_end) = {
        let mut level = &mut pruned;
        let mut parent_end = None;
        for &i in &path[..top] {
            parent_end = Some(level[i].end);
            level = &mut level[i].children;
        }
        let idx = path[top];
        let start = level[idx].start;
        level.truncate(idx);
        let end = match parent_end {
            Some(e) => e - 1,
            None => new_len,
        };
        (start, end)
    };
    LossExpectation {
        tree: DocTree {
            fields: groups_to_pairs(&pruned),
        },
        lost_name: name,
        lost_start,
        lost_end,
    }
}

// ---------------------------------------------------------------------------
// Tree edit distance oracle

/// Plain ordered labeled tree for the oracle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ONode {
    pub label: String,
    pub children: Vec<ONode>,
}

impl ONode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ONode::size).sum::<usize>()
    }

    pub fn to_tree_node(&self) -> TreeNode {
        TreeNode::new(self.label.clone(), self.children.iter().map(ONode::to_tree_node).collect())
    }

    pub fn from_tree_node(n: &TreeNode) -> ONode {
        ONode {
            label: n.label.clone(),
            children: n.children.iter().map(ONode::from_tree_node).collect(),
        }
    }
}

pub fn forest_of(t: &LabeledTree) -> Vec<ONode> {
    t.root().map(ONode::from_tree_node).into_iter().collect()
}

pub fn labeled(forest: &[ONode]) -> LabeledTree {
    match forest {
        [] => LabeledTree::Empty,
        [root] => LabeledTree::Node(root.to_tree_node()),
        _ => panic!("not a tree"),
    }
}

fn forest_key(forest: &[ONode], out: &mut String) {
    for n in forest {
        out.push_str(&n.label.len().to_string());
        out.push(':');
        out.push_str(&n.label);
        out.push('(');
        forest_key(&n.children, out);
        out.push(')');
    }
}

struct ForestInfo {
    size: u32,
    /// Label id of the rightmost root.
    label: u32,
    /// The forest with its rightmost root deleted (children promoted).
    without_root: u32,
    /// The forest without the rightmost root's whole subtree.
    without_tree: u32,
    /// The children of the rightmost root.
    children: u32,
}

/// Unit-cost edit distance between ordered forests by the textbook
/// recursion on rightmost roots v, w:
///
/// d(F, G) = min(d(F - v, G) + 1, d(F, G - w) + 1,
///               d(F - T(v), G - T(w)) + d(kids(v), kids(w)) + [l(v) != l(w)])
///
/// Forests are interned so every derived forest gets a smaller id than the
/// forest it came from; filling a dense table in id order then respects
/// every dependency.
pub struct ForestOracle {
    ids: HashMap<String, u32>,
    labels: HashMap<String, u32>,
    info: Vec<ForestInfo>,
    table: Vec<u8>,
    solved: usize,
}

impl Default for ForestOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl ForestOracle {
    pub fn new() -> Self {
        let mut ids = HashMap::new();
        ids.insert(String::new(), 0);
        ForestOracle {
            ids,
            labels: HashMap::new(),
            info: vec![ForestInfo {
                size: 0,
                label: u32::MAX,
                without_root: 0,
                without_tree: 0,
                children: 0,
            }],
            table: Vec::new(),
            solved: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.info.len()
    }

    pub fn intern(&mut self, forest: &[ONode]) -> u32 {
        let mut key = String::new();
        forest_key(forest, &mut key);
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let (last, init) = forest.split_last().expect("empty forest is pre-interned");
        let mut promoted = init.to_vec();
        promoted.extend(last.children.iter().cloned());
        let without_root = self.intern(&promoted);
        let without_tree = self.intern(init);
        let children = self.intern(&last.children);
        let next = self.labels.len() as u32;
        let label = *self.labels.entry(last.label.clone()).or_insert(next);
        let size = forest.iter().map(ONode::size).sum::<usize>() as u32;
        let id = self.info.len() as u32;
        self.info.push(ForestInfo {
            size,
            label,
            without_root,
            without_tree,
            children,
        });
        self.ids.insert(key, id);
        id
    }

    /// Fills the distance table for every interned forest pair.
    pub fn solve(&mut self) {
        let n = self.info.len();
        assert!(n < 1 << 16, "oracle table too large");
        let max_size = self.info.iter().map(|f| f.size).max().unwrap_or(0);
        assert!(2 * max_size < 256, "distances must fit in u8");
        self.table = vec![0u8; n * n];
        for f in 0..n {
            for g in 0..n {
                let (a, b) = (&self.info[f], &self.info[g]);
                let d = if a.size == 0 {
                    b.size
                } else if b.size == 0 {
                    a.size
                } else {
                    let at = |x: u32, y: u32| self.table[x as usize * n + y as usize] as u32;
                    let delete = at(a.without_root, g as u32) + 1;
                    let insert = at(f as u32, b.without_root) + 1;
                    let matched = at(a.without_tree, b.without_tree)
                        + at(a.children, b.children)
                        + u32::from(a.label != b.label);
                    delete.min(insert).min(matched)
                };
                self.table[f * n + g] = d as u8;
            }
        }
        self.solved = n;
    }

    pub fn distance(&self, f: u32, g: u32) -> usize {
        assert!((f as usize) < self.solved && (g as usize) < self.solved, "call solve() first");
        self.table[f as usize * self.solved + g as usize] as usize
    }

    /// One-off distance between two trees.
    pub fn tree_distance(a: &LabeledTree, b: &LabeledTree) -> usize {
        let mut oracle = ForestOracle::new();
        let fa = oracle.intern(&forest_of(a));
        let fb = oracle.intern(&forest_of(b));
        oracle.solve();
        oracle.distance(fa, fb)
    }
}

/// Every ordered tree with `1..=max_nodes` nodes over `alphabet`.
pub fn all_trees(max_nodes: usize, alphabet: &[&str]) -> Vec<ONode> {
    // forests[n]: all forests with exactly n nodes.
    let mut forests: Vec<Vec<Vec<ONode>>> = vec![vec![Vec::new()]];
    let mut trees: Vec<Vec<ONode>> = vec![Vec::new()];
    for n in 1..=max_nodes {
        let trees_n: Vec<ONode> = alphabet
            .iter()
            .flat_map(|l| {
                forests[n - 1].iter().map(move |kids| ONode {
                    label: l.to_string(),
                    children: kids.clone(),
                })
            })
            .collect();
        trees.push(trees_n);
        let mut forests_n = Vec::new();
        for first in 1..=n {
            for t in &trees[first] {
                for rest in &forests[n - first] {
                    let mut f = vec![t.clone()];
                    f.extend(rest.iter().cloned());
                    forests_n.push(f);
                }
            }
        }
        forests.push(forests_n);
    }
    trees.into_iter().flatten().collect()
}

/// Random tree: each new node becomes the last child of a random earlier
/// node.
pub fn random_tree(rng: &mut ChaCha8Rng, nodes: usize, alphabet: &[&str]) -> LabeledTree {
    if nodes == 0 {
        return LabeledTree::Empty;
    }
    let labels: Vec<String> = (0..nodes).map(|_| alphabet.choose(rng).unwrap().to_string()).collect();
    let mut parent = vec![usize::MAX; nodes];
    for (i, p) in parent.iter_mut().enumerate().skip(1) {
        *p = rng.gen_range(0..i);
    }
    fn build(i: usize, labels: &[String], parent: &[usize]) -> TreeNode {
        let kids = (i + 1..labels.len())
            .filter(|&j| parent[j] == i)
            .map(|j| build(j, labels, parent))
            .collect();
        TreeNode::new(labels[i].clone(), kids)
    }
    LabeledTree::Node(build(0, &labels, &parent))
}

// ---------------------------------------------------------------------------
// Levenshtein oracle

/// Edit distance by memoized recursion over suffixes.
pub fn levenshtein_oracle(a: &str, b: &str) -> usize {
    fn go(i: usize, j: usize, a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&d) = memo.get(&(i, j)) {
            return d;
        }
        let d = (go(i + 1, j, a, b, memo) + 1)
            .min(go(i, j + 1, a, b, memo) + 1)
            .min(go(i + 1, j + 1, a, b, memo) + usize::from(a[i] != b[j]));
        memo.insert((i, j), d);
        d
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(0, 0, &a, &b, &mut HashMap::new())
}

pub fn random_string(rng: &mut ChaCha8Rng, max_len: usize) -> String {
    const ALPHABET: &[char] = &['a', 'b', 'c', 'd', 'A', 'B', ' ', 'é', 'ß', '1'];
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

// ---------------------------------------------------------------------------
// Generator checks

use docforge::synthdog::{Annotation, Homography, Point, RenderPlan};

fn inside_convex(quad: &[Point; 4], p: Point, tolerance: f64) -> bool {
    (0..4).all(|i| {
        let (a, b) = (quad[i], quad[(i + 1) % 4]);
        let (ex, ey) = (b.x - a.x, b.y - a.y);
        let len = ex.hypot(ey);
        // Positive inside for clockwise winding with y down.
        let cross = (ex * (p.y - a.y) - ey * (p.x - a.x)) / len;
        cross >= -tolerance
    })
}

/// Checks one rendered sample. Returns a description of the first broken
/// property.
pub fn check_annotation(plan: &RenderPlan, ann: &Annotation, vocab: &Vocab) -> Result<(), String> {
    let (w, h) = (plan.canvas.0 as f64, plan.canvas.1 as f64);
    let hom = plan.homography();
    let inv: Homography = hom.inverse().ok_or("singular document map")?;

    // Text consistency and codec.
    let words: Vec<&str> = ann.words.iter().map(|w| w.text.as_str()).collect();
    let split: Vec<&str> = if ann.text.is_empty() { Vec::new() } else { ann.text.split(' ').collect() };
    if words != split {
        return Err("word texts do not spell the reading-order text".into());
    }
    let target = docforge::codec::encode(&ann.gt_parse, vocab).map_err(|e| e.to_string())?;
    if target != ann.target {
        return Err("target differs from encode(gt_parse)".into());
    }
    if ann.gt_parse.get("text_sequence").and_then(Value::as_text) != Some(ann.text.as_str()) {
        return Err("gt_parse does not hold the reading-order text".into());
    }

    // Containment.
    for (i, word) in ann.words.iter().enumerate() {
        for &[x, y] in &word.quad {
            if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
                return Err(format!("word {i} vertex ({x}, {y}) outside the image"));
            }
            if !inside_convex(&plan.quad, Point::new(x, y), 1.0) {
                return Err(format!("word {i} vertex ({x}, {y}) outside the document quad"));
            }
        }
    }

    // Region overlap.
    for (i, a) in plan.regions.iter().enumerate() {
        for b in &plan.regions[i + 1..] {
            if a.rect.intersection_area(&b.rect) > 0.0 {
                return Err("text regions overlap".into());
            }
        }
    }

    // Reading order from the quads alone: back to document space, assign
    // each word to the region containing it and the line band holding its
    // vertical middle, then sort by region (top, left), line top, word left.
    let mut keyed = Vec::with_capacity(ann.words.len());
    let mut region_order: Vec<usize> = (0..plan.regions.len()).collect();
    region_order.sort_by(|&a, &b| {
        let (ra, rb) = (&plan.regions[a].rect, &plan.regions[b].rect);
        ra.top.total_cmp(&rb.top).then(ra.left.total_cmp(&rb.left))
    });
    for (i, word) in ann.words.iter().enumerate() {
        let pts: Vec<Point> = word.quad.iter().map(|&[x, y]| inv.apply(Point::new(x, y))).collect();
        let left = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let top = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let bottom = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let middle = (top + bottom) / 2.0;
        let center_x = pts.iter().map(|p| p.x).sum::<f64>() / 4.0;
        let region = region_order
            .iter()
            .position(|&r| {
                let rect = &plan.regions[r].rect;
                center_x >= rect.left && center_x <= rect.right && middle >= rect.top && middle <= rect.bottom
            })
            .ok_or(format!("word {i} lies in no region"))?;
        let lines = &plan.regions[region_order[region]].lines;
        let line = lines
            .iter()
            .position(|l| middle >= l.top - 0.05 && middle < l.bottom + 0.05)
            .ok_or(format!("word {i} lies in no line"))?;
        keyed.push(((region, line, left), i));
    }
    keyed.sort_by(|a, b| {
        let ((ra, la, xa), (rb, lb, xb)) = (a.0, b.0);
        ra.cmp(&rb).then(la.cmp(&lb)).then(xa.total_cmp(&xb))
    });
    if keyed.iter().enumerate().any(|(pos, (_, i))| pos != *i) {
        return Err("stored order differs from the order re-derived from quads".into());
    }
    Ok(())
}

pub fn unique<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> bool {
    let mut seen = HashSet::new();
    items.into_iter().all(|x| seen.insert(x))
}
